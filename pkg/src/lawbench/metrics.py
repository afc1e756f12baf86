"""Resonator figures of merit from admittance and reflection sweeps."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError, IncompleteBand, NoAntiresonance, NoResonance
from .netparam import FrequencySweep, s_to_y

__all__ = [
    "ResonanceMetrics",
    "BodeQ",
    "find_resonances",
    "kt2",
    "fa_from_kt2",
    "admittance_ratio_db",
    "bode_q",
    "q3db",
    "summarize",
]

SINGULAR_TOL = 1e-9


@dataclass(frozen=True)
class ResonanceMetrics:
    f_r: float
    f_a: float
    ar_db: float
    kt2: float
    bode_q_max: float
    q3db_r: float
    fom: float


def _parabolic_vertex(x, y, k):
    """Vertex of the parabola through points k-1, k, k+1."""
    x0, x1, x2 = x[k - 1 : k + 2]
    y0, y1, y2 = y[k - 1 : k + 2]
    d0 = (y1 - y0) / (x1 - x0)
    d1 = (y2 - y1) / (x2 - x1)
    curv = (d1 - d0) / (x2 - x0)
    if curv == 0:
        return x1, y1
    # vertex of y0 + d0 (x - x0) + curv (x - x0)(x - x1)
    xv = 0.5 * (x0 + x1) - d0 / (2 * curv)
    xv = min(max(xv, x0), x2)
    yv = y0 + d0 * (xv - x0) + curv * (xv - x0) * (xv - x1)
    return xv, yv


def _extrema(adm):
    mag = np.abs(adm.values)
    if adm.values.ndim != 1:
        raise DomainError("resonance search needs a scalar admittance sweep")
    adm.require(3)
    logy = np.log(mag)
    i_r = int(np.argmax(mag))
    if i_r == 0 or i_r == len(mag) - 1:
        raise NoResonance("|Y| has no interior maximum")
    tail = mag[i_r + 1 :]
    if tail.size < 2:
        raise NoAntiresonance("no frequencies above the resonance")
    i_a = i_r + 1 + int(np.argmin(tail))
    if i_a == len(mag) - 1:
        raise NoAntiresonance("|Y| has no interior minimum above the resonance")
    f_r, ly_r = _parabolic_vertex(adm.f, logy, i_r)
    f_a, ly_a = _parabolic_vertex(adm.f, logy, i_a)
    return f_r, f_a, ly_r, ly_a


def find_resonances(adm):
    """Resonance and antiresonance frequencies of an admittance sweep.

    ``f_r`` is the global maximum of ``|Y|`` and ``f_a`` the minimum of
    ``|Y|`` above ``f_r``. Both are refined by a parabola through the three
    samples around the extremum on ``log|Y|``.
    """
    f_r, f_a, _, _ = _extrema(adm)
    return f_r, f_a


def admittance_ratio_db(adm):
    """``20 log10(|Y(f_r)| / |Y(f_a)|)`` using the refined extrema."""
    _, _, ly_r, ly_a = _extrema(adm)
    return 20.0 * (ly_r - ly_a) / np.log(10.0)


def kt2(f_r, f_a):
    """Effective coupling ``x / tan(x)`` with ``x = (pi/2)(f_r/f_a)``."""
    if not 0 < f_r < f_a:
        raise DomainError(f"need 0 < f_r < f_a, got f_r={f_r}, f_a={f_a}")
    x = 0.5 * np.pi * (f_r / f_a)
    return float(x / np.tan(x))


def fa_from_kt2(k2, f_r, tol=1e-15):
    """Antiresonance that reproduces ``k2`` at ``f_r``, by bisection on the ratio."""
    if not 0 < k2 < 1:
        raise DomainError("kt2 must lie in (0, 1)")
    lo, hi = 1e-12, 1 - 1e-16
    # kt2 decreases in the ratio f_r/f_a
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        x = 0.5 * np.pi * mid
        if x / np.tan(x) > k2:
            lo = mid
        else:
            hi = mid
        if hi - lo < tol:
            break
    return f_r / (0.5 * (lo + hi))


@dataclass(frozen=True, eq=False)
class BodeQ:
    """Per-point Bode quality factor. Singular points hold NaN."""

    f: np.ndarray
    q: np.ndarray
    singular: np.ndarray

    def q_max(self, band=None):
        m = ~self.singular
        if band is not None:
            m &= (self.f >= band[0]) & (self.f <= band[1])
        if not np.any(m):
            raise IncompleteBand("no non-singular points inside the band")
        return float(np.max(self.q[m]))

    def as_sweep(self):
        return FrequencySweep(self.f, np.where(self.singular, np.nan, self.q), self.singular)


def bode_q(net):
    """Bode Q of a one-port reflection sweep.

    ``Q = w * tau_g * |S11| / (1 - |S11|^2)`` with group delay
    ``tau_g = -d(phase)/dw`` taken by central differences of the unwrapped
    phase (one-sided at the ends). Points with ``|S11| >= 1 - 1e-9`` are
    flagged and left as NaN.
    """
    if net.ports != 1:
        raise DomainError("Bode Q needs one-port reflection data")
    net.sweep.require(3)
    s = net.s11
    w = 2 * np.pi * net.f
    mag = np.abs(s)
    phase = np.unwrap(np.angle(s), discont=np.pi)
    tau = -np.gradient(phase, w)
    singular = mag >= 1 - SINGULAR_TOL
    with np.errstate(divide="ignore", invalid="ignore"):
        q = w * tau * mag / (1 - mag**2)
    q = np.where(singular, np.nan, q)
    return BodeQ(net.f.copy(), q, singular)


def q3db(adm, f_peak):
    """``f_peak / bandwidth`` of the ``|Y|`` peak at its -3 dB points.

    The -3 dB level is ``|Y(f_peak)| / sqrt(2)``; crossings are located by
    linear interpolation between samples.
    """
    f = adm.f
    mag = np.abs(adm.values)
    if not f[0] <= f_peak <= f[-1]:
        raise IncompleteBand("peak lies outside the sweep")
    level = np.interp(f_peak, f, mag) / np.sqrt(2.0)
    k = int(np.searchsorted(f, f_peak))
    below = mag < level

    left = np.nonzero(below[:k])[0]
    if left.size == 0:
        raise IncompleteBand("lower -3 dB crossing lies outside the sweep")
    i = left[-1]
    f_lo = np.interp(level, [mag[i], mag[i + 1]], [f[i], f[i + 1]])

    right = np.nonzero(below[k:])[0]
    if right.size == 0:
        raise IncompleteBand("upper -3 dB crossing lies outside the sweep")
    j = k + right[0]
    f_hi = np.interp(level, [mag[j], mag[j - 1]], [f[j], f[j - 1]])
    return float(f_peak / (f_hi - f_lo))


def summarize(net, band=None):
    """All figures of merit for a one-port device; ``fom = bode_q_max * kt2``."""
    adm = s_to_y(net)
    f_r, f_a, ly_r, ly_a = _extrema(adm)
    k = kt2(f_r, f_a)
    qmax = bode_q(net).q_max(band)
    return ResonanceMetrics(
        f_r=f_r,
        f_a=f_a,
        ar_db=20.0 * (ly_r - ly_a) / np.log(10.0),
        kt2=k,
        bode_q_max=qmax,
        q3db_r=q3db(adm, f_r),
        fom=qmax * k,
    )
