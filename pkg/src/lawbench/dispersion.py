"""Shear-horizontal layered acoustic wave (LAW) analysis for a three-layer stack.

Layers, bottom to top: piezoelectric substrate (unprimed symbols), a
sandwiched interlayer of thickness ``h`` (double-primed) and a quasi-infinite
cladding (primed). The guided-mode condition is ``Omega(V) + Delta(V) = K^2``
where ``Delta`` is the effective surface-impedance term of the layers above
the substrate.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, DomainError, NoRoot

__all__ = [
    "LayerStack",
    "SoundCone",
    "ModeClass",
    "omega_term",
    "delta_v",
    "delta_v_complex",
    "delta_single_overlayer",
    "dispersion_residual",
    "solve_law_velocity",
    "existence_lhs",
    "existence_boundary",
    "boundary_coefficient",
    "classify_mode",
]


@dataclass(frozen=True)
class LayerStack:
    """Densities (kg/m^3) and slow-shear velocities (m/s) of the three layers.

    ``beta`` is the wavenumber along the substrate/interlayer boundary,
    ``2*pi/wavelength``.
    """

    rho: float
    v_b: float
    rho_p: float
    v_b_p: float
    rho_pp: float
    v_b_pp: float
    h: float
    beta: float
    k2: float

    def __post_init__(self):
        for name in ("rho", "v_b", "rho_p", "v_b_p", "rho_pp", "v_b_pp", "beta"):
            if not getattr(self, name) > 0:
                raise DomainError(f"{name} must be > 0")
        if self.h < 0:
            raise DomainError("h must be >= 0")
        if not 0 < self.k2 < 1:
            raise DomainError("k2 must lie in (0, 1)")

    @classmethod
    def from_wavelength(cls, wavelength, **kw):
        return cls(beta=2 * np.pi / wavelength, **kw)

    @property
    def x(self):
        return self.rho_pp / self.rho

    @property
    def y(self):
        return self.v_b_pp / self.v_b

    @property
    def a(self):
        return self.rho_pp / self.rho_p

    @property
    def b(self):
        return self.v_b_pp / self.v_b_p

    @property
    def beta_h(self):
        return self.beta * self.h


def omega_term(v, v_b):
    """``sqrt(1 - (v/v_b)^2)``, continued as ``i*sqrt((v/v_b)^2 - 1)`` above ``v_b``."""
    u = (np.asarray(v, dtype=float) / v_b) ** 2
    out = np.where(u <= 1, np.sqrt(np.abs(1 - u)) + 0j, 1j * np.sqrt(np.abs(u - 1)))
    return out[()] if out.ndim == 0 else out


def _tanh_over(z, bh):
    """``tanh(bh*z)/z`` with the removable singularity at ``z = 0`` filled in."""
    t = bh * z
    small = np.abs(t) < 1e-6
    safe = np.where(small, 1.0, z)
    return np.where(small, bh * (1 - t * t / 3), np.tanh(bh * safe) / safe)


def _tan_over(zeta, bh):
    t = bh * zeta
    small = np.abs(t) < 1e-6
    safe = np.where(small, 1.0, zeta)
    return np.where(small, bh * (1 + t * t / 3), np.tan(bh * safe) / safe)


def delta_v(v, stack):
    """Impedance term ``Delta(V)`` of the interlayer + cladding (real-valued).

    Below the interlayer shear velocity the hyperbolic form is used; above it
    the interlayer partial wave is propagating and ``tanh`` turns into
    ``tan``. Both are written as ``pre * (1 + g W tanh(bh W)) / (g + tanh(bh W)/W)``
    so the branch point ``W = 0`` is regular. Requires ``v < v_b_p``.
    """
    v = np.asarray(v, dtype=float)
    if np.any(v >= stack.v_b_p):
        raise DomainError("v must stay below the cladding shear velocity (leaky regime)")
    s = stack
    om_p = np.sqrt(1 - (v / s.v_b_p) ** 2)
    pre = (s.rho_pp / s.rho) * (s.v_b_pp / s.v_b) ** 2
    g = (s.rho_pp / (s.rho_p * om_p)) * (s.v_b_pp / s.v_b_p) ** 2
    u = (v / s.v_b_pp) ** 2
    bh = s.beta_h
    w = np.sqrt(np.abs(1 - u))
    below = u <= 1
    # W real: W tanh(bh W); W = i zeta: W tanh(bh W) = -zeta tan(bh zeta)
    wt = np.where(below, w * np.tanh(bh * w), -w * np.tan(bh * w))
    t_over = np.where(below, _tanh_over(w, bh), _tan_over(w, bh))
    out = pre * (1 + g * wt) / (g + t_over)
    return out[()] if out.ndim == 0 else out


def delta_v_complex(v, stack):
    """Direct complex evaluation of the three-layer impedance term (reference form)."""
    s = stack
    om_p = np.sqrt(1 - (v / s.v_b_p) ** 2 + 0j)
    om_pp = np.sqrt(1 - (v / s.v_b_pp) ** 2 + 0j)
    r = (s.rho_pp * om_pp / (s.rho_p * om_p)) * (s.v_b_pp / s.v_b_p) ** 2
    th = np.tanh(s.beta_h * om_pp)
    return (s.rho_pp / s.rho) * (s.v_b_pp / s.v_b) ** 2 * om_pp * (1 + r * th) / (r + th)


def delta_single_overlayer(v, stack):
    """Impedance term with the cladding directly on the substrate (``h = 0``)."""
    s = stack
    return (s.rho_p / s.rho) * (s.v_b_p / s.v_b) ** 2 * np.sqrt(1 - (v / s.v_b_p) ** 2)


def dispersion_residual(v, stack):
    """``Omega(V) + Delta(V) - K^2``; real for ``v <= v_b``."""
    v = np.asarray(v, dtype=float)
    if np.any(v > stack.v_b):
        raise DomainError("residual is complex above the substrate shear velocity")
    return np.sqrt(1 - (v / stack.v_b) ** 2) + delta_v(v, stack) - stack.k2


def default_bracket(stack):
    hi = min(stack.v_b, 0.999 * stack.v_b_p)
    return 0.5 * stack.v_b, hi


def solve_law_velocity(stack, bracket=None, tol=1e-6, grid=2001):
    """LAW phase velocity from ``Omega(V) + Delta(V) = K^2`` by bisection.

    The bracket defaults to ``[0.5 v_b, min(v_b, 0.999 v_b_p)]``: above
    ``v_b`` the substrate term is imaginary and no real root exists. The
    residual is checked to be strictly decreasing on a ``grid``-point mesh
    of the bracket before bisecting.
    """
    lo, hi = default_bracket(stack) if bracket is None else bracket
    if not 0 < lo < hi:
        raise DomainError("bracket must satisfy 0 < lo < hi")
    if hi > stack.v_b or hi >= stack.v_b_p:
        raise DomainError("bracket must lie below both v_b and v_b_p")
    vs = np.linspace(lo, hi, grid)
    fv = dispersion_residual(vs, stack)
    if not np.all(np.diff(fv) < 0):
        raise DomainError("Omega + Delta is not strictly decreasing on the bracket")
    f_lo, f_hi = fv[0], fv[-1]
    if f_lo == 0:
        return float(lo)
    if f_hi == 0:
        return float(hi)
    if f_lo < 0 or f_hi > 0:
        raise NoRoot("no sign change of Omega + Delta - K^2 on the bracket")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        fm = dispersion_residual(mid, stack)
        if fm == 0:
            return float(mid)
        if fm > 0:
            lo = mid
        else:
            hi = mid
    # finish on the float grid so the residual is as small as representable
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if mid in (lo, hi):
            break
        if dispersion_residual(mid, stack) > 0:
            lo = mid
        else:
            hi = mid
    return float(lo if abs(dispersion_residual(lo, stack)) <= abs(dispersion_residual(hi, stack)) else hi)


# -- existence range ---------------------------------------------------------


def existence_lhs(a, b, x, y, beta_h):
    """``Omega + Delta`` evaluated at ``V = V_B`` in ratio variables.

    ``x = rho''/rho``, ``y = V_B''/V_B``, ``a = rho''/rho'``, ``b = V_B''/V_B'``.
    The mode lies above ``V_B`` only while this is ``>= K^2``.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    s = np.sqrt(1 - 1 / y**2)
    t = np.tanh(beta_h * s)
    with np.errstate(divide="ignore", invalid="ignore"):
        r = a * b**2 * s / np.sqrt(1 - (b / y) ** 2)
        return x * y**2 * s * (1 + r * t) / (r + t)


def boundary_coefficient(x, y, k2, beta_h):
    """Coefficient ``C`` of the closed-form existence bound."""
    t = np.tanh(beta_h * np.sqrt(1 - 1 / y**2))
    big_a = x * y * np.sqrt(y**2 - 1)
    return ((big_a - k2 * t) / (k2 - big_a * t)) ** 2 / (y**2 - 1)


def existence_boundary(a_grid, x, y, k2, beta_h):
    """Largest ``b = V_B''/V_B'`` satisfying the existence inequality, per ``a``.

    ``b_max = (sqrt(y^2 C/a^2 + C^2/(4 a^4)) - C/(2 a^2))^(1/2)``.

    The closed form assumes the inequality bounds ``b`` from above, which
    holds when ``K^2 > A tanh`` and ``A > K^2 tanh`` with
    ``A = x y sqrt(y^2 - 1)`` and ``tanh = tanh(beta h sqrt(1 - 1/y^2))``.
    Otherwise every ``b`` is admissible (returns ``inf``) or none is
    (returns ``0``).
    """
    if not y > 1:
        raise DomainError(f"existence bound needs y = V_B''/V_B > 1, got {y}")
    if y < np.sqrt(1 - k2):
        raise DomainError("y must be >= sqrt(1 - K^2)")
    a = np.asarray(a_grid, dtype=float)
    if np.any(a <= 0):
        raise DomainError("density ratios must be > 0")
    t = np.tanh(beta_h * np.sqrt(1 - 1 / y**2))
    big_a = x * y * np.sqrt(y**2 - 1)
    if big_a * t >= k2:
        return np.full(a.shape, np.inf)[()]
    if big_a <= k2 * t:
        return np.zeros(a.shape)[()]
    c = boundary_coefficient(x, y, k2, beta_h)
    out = np.sqrt(np.sqrt(y**2 * c / a**2 + c**2 / (4 * a**4)) - c / (2 * a**2))
    return out[()]


# -- sound cone --------------------------------------------------------------


@dataclass(frozen=True)
class SoundCone:
    """Named bulk velocities (m/s) bounding the radiation continuum."""

    velocities: dict

    def __post_init__(self):
        if not self.velocities:
            raise ConfigError("sound cone needs at least one velocity")
        for k, v in self.velocities.items():
            if not v > 0:
                raise ConfigError(f"velocity {k!r} must be > 0")


@dataclass(frozen=True)
class ModeClass:
    kind: str
    leaky_into: tuple = ()


def classify_mode(omega, k_x, cone):
    """Place ``(omega, k_x)`` relative to the sound lines ``omega = c k_x``.

    Below every line the mode is ``guided``; above every line it is
    ``radiative``; in between it is ``leaky`` into each medium whose sound
    line lies below the point.
    """
    if not isinstance(cone, SoundCone):
        cone = SoundCone(dict(cone))
    if not (omega > 0 and k_x > 0):
        raise DomainError("omega and k_x must be > 0")
    v_phase = omega / k_x
    crossed = tuple(sorted((n for n, c in cone.velocities.items() if v_phase > c), key=cone.velocities.get))
    if not crossed:
        return ModeClass("guided")
    if len(crossed) == len(cone.velocities):
        return ModeClass("radiative", crossed)
    return ModeClass("leaky", crossed)
