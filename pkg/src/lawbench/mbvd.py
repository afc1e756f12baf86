"""Modified Butterworth-Van Dyke (mBVD) resonator model.

Topology: ``r_s`` in series with the parallel pair of the static branch
(``r_0`` + ``c_0``) and the motional branch (``r_m`` + ``l_m`` + ``c_m``).
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, fields, replace

import numpy as np

from .errors import ConfigError, DomainError, NoResonance, NonConvergence
from .netparam import FrequencySweep

__all__ = [
    "MbvdParams",
    "PowerBudget",
    "GammaResult",
    "mbvd_impedance",
    "branch_impedances",
    "admittance_sweep",
    "fit_mbvd",
    "initial_guess",
    "power_budget_oneport",
    "power_budget_twoport",
    "twoport_s",
    "gamma_from_s21",
    "TOPOLOGIES",
]

TOPOLOGIES = ("series", "shunt")


@dataclass(frozen=True)
class MbvdParams:
    r_s: float
    r_0: float
    c_0: float
    r_m: float
    l_m: float
    c_m: float

    def __post_init__(self):
        for fld in fields(self):
            v = getattr(self, fld.name)
            if not (np.isfinite(v) and v >= 0):
                raise DomainError(f"{fld.name} must be finite and >= 0, got {v}")
        for name in ("c_0", "l_m", "c_m"):
            if getattr(self, name) <= 0:
                raise DomainError(f"{name} must be > 0")

    @property
    def f_s(self):
        """Motional series-resonance frequency in Hz."""
        return 1.0 / (2 * np.pi * np.sqrt(self.l_m * self.c_m))

    def as_array(self):
        return np.array([getattr(self, f.name) for f in fields(self)])

    @classmethod
    def from_array(cls, a):
        return cls(*(float(v) for v in a))

    def to_dict(self):
        return {f.name: getattr(self, f.name) for f in fields(self)}

    def scaled(self, **factors):
        return replace(self, **{k: getattr(self, k) * v for k, v in factors.items()})


def _omega(f):
    f = np.asarray(f, dtype=float)
    if np.any(f <= 0):
        raise DomainError("frequency must be > 0")
    return 2 * np.pi * f


def branch_impedances(p, f):
    """``(z_static, z_motional)`` of the two parallel branches."""
    w = _omega(f)
    z0b = p.r_0 + 1 / (1j * w * p.c_0)
    zm = p.r_m + 1j * w * p.l_m + 1 / (1j * w * p.c_m)
    return z0b, zm


def mbvd_impedance(p, f):
    """Input impedance in ohms at frequency ``f`` (scalar or array)."""
    z0b, zm = branch_impedances(p, f)
    return p.r_s + 1 / (1 / z0b + 1 / zm)


def admittance_sweep(p, f):
    f = np.asarray(f, dtype=float)
    return FrequencySweep(f, 1 / mbvd_impedance(p, f))


# -- power budgets ------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class PowerBudget:
    """Fractions of the available incident power, one entry per frequency."""

    f: np.ndarray
    p_reflected: np.ndarray
    p_transmitted: np.ndarray
    p_rs: np.ndarray
    p_rm: np.ndarray
    p_r0: np.ndarray

    @property
    def dissipated(self):
        return self.p_rs + self.p_rm + self.p_r0

    @property
    def total(self):
        return self.p_reflected + self.p_transmitted + self.dissipated


def _branch_split(p, f, i_dut, p_avail):
    """Dissipated fractions for a DUT current phasor ``i_dut``."""
    z0b, zm = branch_impedances(p, f)
    zp = 1 / (1 / z0b + 1 / zm)
    v_par = i_dut * zp
    i_0 = v_par / z0b
    i_m = v_par / zm
    # peak phasors: P = |I|^2 R / 2
    return (
        0.5 * p.r_s * np.abs(i_dut) ** 2 / p_avail,
        0.5 * p.r_m * np.abs(i_m) ** 2 / p_avail,
        0.5 * p.r_0 * np.abs(i_0) ** 2 / p_avail,
    )


def power_budget_oneport(p, z0, f):
    """Budget for the DUT as the load of a source with internal impedance ``z0``."""
    f = np.asarray(f, dtype=float)
    z = mbvd_impedance(p, f)
    vs = 1.0
    p_avail = abs(vs) ** 2 / (8 * z0)
    i = vs / (z0 + z)
    gamma = (z - z0) / (z + z0)
    p_rs, p_rm, p_r0 = _branch_split(p, f, i, p_avail)
    return PowerBudget(f, np.abs(gamma) ** 2, np.zeros_like(f), p_rs, p_rm, p_r0)


def twoport_s(z, z0, topology="series"):
    """``(S11, S21)`` of an impedance ``z`` embedded in a matched thru."""
    if topology == "series":
        den = 2 * z0 + z
        return z / den, 2 * z0 / den
    if topology == "shunt":
        den = 2 * z + z0
        return -z0 / den, 2 * z / den
    raise ConfigError(f"unknown topology {topology!r}; expected one of {TOPOLOGIES}")


def power_budget_twoport(p, z0, f, topology="series"):
    """Budget for the DUT embedded as a series or shunt element between two ``z0`` ports."""
    f = np.asarray(f, dtype=float)
    z = mbvd_impedance(p, f)
    s11, s21 = twoport_s(z, z0, topology)
    vs = 1.0
    p_avail = abs(vs) ** 2 / (8 * z0)
    if topology == "series":
        i = vs / (2 * z0 + z)
    else:
        zl = z * z0 / (z + z0)
        v_node = vs * zl / (z0 + zl)
        i = v_node / z
    p_rs, p_rm, p_r0 = _branch_split(p, f, i, p_avail)
    return PowerBudget(f, np.abs(s11) ** 2, np.abs(s21) ** 2, p_rs, p_rm, p_r0)


# -- reflection from de-embedded S21 -----------------------------------------


@dataclass(frozen=True, eq=False)
class GammaResult:
    f: np.ndarray
    gamma: np.ndarray
    z: np.ndarray
    singular: np.ndarray
    nonpassive: np.ndarray


def gamma_from_s21(f, s21, topology="series", z0=50.0):
    """Recover DUT impedance from thru-embedded S21, then ``(Z - z0)/(Z + z0)``.

    Points where the inversion has no finite impedance (S21 = 0 for a series
    element, S21 = 1 for a shunt element) are flagged and set to NaN;
    ``|S21| > 1`` is flagged as non-passive with a warning.
    """
    f = np.asarray(f, dtype=float)
    s21 = np.asarray(s21, dtype=complex)
    if topology not in TOPOLOGIES:
        raise ConfigError(f"unknown topology {topology!r}; expected one of {TOPOLOGIES}")
    nonpassive = np.abs(s21) > 1 + 1e-12
    if np.any(nonpassive):
        warnings.warn(f"{int(nonpassive.sum())} non-passive S21 point(s)", RuntimeWarning, stacklevel=2)
    with np.errstate(divide="ignore", invalid="ignore"):
        if topology == "series":
            singular = s21 == 0
            z = 2 * z0 * (1 - s21) / s21
        else:
            singular = s21 == 1
            z = z0 * s21 / (2 * (1 - s21))
        z = np.where(singular, np.nan, z)
        gamma = (z - z0) / (z + z0)
    return GammaResult(f, gamma, z, singular, nonpassive)


# -- fitting -----------------------------------------------------------------

MAX_ITER = 200
STEP_TOL = 1e-10


def initial_guess(adm):
    """Deterministic starting point derived from the admittance sweep.

    * static capacitance from ``Im(Y)/w`` at the lowest frequency, which
      measures ``c_0 + c_m``; the motional share is removed with the
      ``(8/pi^2) kt2`` capacitance-ratio estimate
    * ``f_s`` from the ``|Y|`` maximum, ``c_m = c_0 (8/pi^2) kt2``,
      ``l_m`` from ``f_s`` and ``c_m``
    * ``r_m = 1/Re(Y(f_r))``; ``r_s`` = 1 mOhm and ``r_0`` = 1 Ohm
    """
    from .metrics import find_resonances, kt2

    f_r, f_a = find_resonances(adm)
    k = kt2(f_r, f_a)
    ratio = 8 / np.pi**2 * k
    w = 2 * np.pi * adm.f
    c_low = adm.values[0].imag / w[0]
    if not c_low > 0:
        raise NoResonance("admittance is not capacitive below resonance")
    c_0 = c_low / (1 + ratio)
    c_m = c_0 * ratio
    l_m = 1 / ((2 * np.pi * f_r) ** 2 * c_m)
    g_r = np.interp(f_r, adm.f, adm.values.real)
    r_m = 1 / g_r if g_r > 0 else 1 / np.max(np.abs(adm.values))
    return MbvdParams(r_s=1e-3, r_0=1.0, c_0=c_0, r_m=r_m, l_m=l_m, c_m=c_m)


def _model_and_jacobian(p, w):
    """Admittance and its derivatives with respect to log-parameters."""
    r_s, r_0, c_0, r_m, l_m, c_m = p
    jw = 1j * w
    z0b = r_0 + 1 / (jw * c_0)
    zm = r_m + jw * l_m + 1 / (jw * c_m)
    zp = 1 / (1 / z0b + 1 / zm)
    z = r_s + zp
    y = 1 / z
    dy_dz = -(y**2)
    g0 = dy_dz * zp**2 / z0b**2
    gm = dy_dz * zp**2 / zm**2
    jac = np.stack(
        [
            dy_dz * r_s,
            g0 * r_0,
            g0 * (-1 / (jw * c_0)),
            gm * r_m,
            gm * (jw * l_m),
            gm * (-1 / (jw * c_m)),
        ],
        axis=1,
    )
    return y, jac


def _lm(w, y, x0, max_iter, step_tol):
    """Levenberg-Marquardt on relative admittance error over log-parameters."""
    wt = 1 / np.abs(y)

    def evaluate(x):
        ym, jac = _model_and_jacobian(np.exp(x), w)
        r = (ym - y) * wt
        jr = jac * wt[:, None]
        return np.concatenate([r.real, r.imag]), np.concatenate([jr.real, jr.imag])

    x = x0.copy()
    r, jac = evaluate(x)
    cost = r @ r
    lam = 1e-3
    converged = False
    for _ in range(max_iter):
        jtj = jac.T @ jac
        g = jac.T @ r
        d = np.diag(jtj).copy()
        d[d == 0] = 1.0
        while True:
            try:
                step = -np.linalg.solve(jtj + lam * np.diag(d), g)
            except np.linalg.LinAlgError:
                step = np.full_like(x, np.nan)
            # log-parameters: cap any single move at a factor e^2
            if np.all(np.isfinite(step)):
                step *= min(1.0, 2.0 / np.max(np.abs(step)))
                x_new = x + step
                r_new, jac_new = evaluate(x_new)
                cost_new = r_new @ r_new
                if np.isfinite(cost_new) and cost_new <= cost:
                    break
            lam *= 10
            if lam > 1e16:
                return x, cost, True
        small = np.max(np.abs(step)) <= step_tol * (1 + np.max(np.abs(x)))
        x, r, jac, cost = x_new, r_new, jac_new, cost_new
        lam = max(lam / 10, 1e-12)
        if small or cost == 0:
            converged = True
            break
    return x, cost, converged


def fit_mbvd(adm, init=None, max_iter=MAX_ITER, step_tol=STEP_TOL):
    """Least-squares mBVD fit to a measured admittance sweep.

    Minimises ``sum |Y_model - Y|^2 / |Y|^2`` over log-parameters (so all
    elements stay positive) with a Levenberg-Marquardt iteration.

    Returns ``(params, residual_rms)`` where the residual is the RMS of the
    relative complex error. Raises :class:`NonConvergence` carrying the best
    parameters if the iteration budget runs out.
    """
    if adm.values.ndim != 1:
        raise DomainError("fit needs a scalar admittance sweep")
    if init is None:
        init = initial_guess(adm)
    w = 2 * np.pi * adm.f
    y = adm.values
    x0 = np.log(np.maximum(init.as_array(), 1e-300))
    x, cost, converged = _lm(w, y, x0, max_iter, step_tol)
    best = MbvdParams.from_array(np.exp(x))
    rms = float(np.sqrt(cost / y.size))
    if not converged:
        raise NonConvergence("mBVD fit hit the iteration limit", best=best, residual=rms)
    return best, rms
