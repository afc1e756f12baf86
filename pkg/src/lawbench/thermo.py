"""Temperature and power robustness models.

Quadratic TCF fitting, Eyring time-to-failure, delivered-power density
bookkeeping, the stepped power-ladder schedule and a lumped electro-thermal
self-heating simulator built on the mBVD two-port budget.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .errors import ConfigError, DomainError, RankDeficient
from .mbvd import TOPOLOGIES, MbvdParams, power_budget_twoport

__all__ = [
    "BOLTZMANN",
    "TcfFit",
    "EyringParams",
    "PowerLadder",
    "RunawayConfig",
    "LevelResult",
    "fit_tcf",
    "fit_tcf_frequencies",
    "tcf_shift",
    "eyring_ttf",
    "power_density",
    "density_fold",
    "dbm_to_watts",
    "watts_to_dbm",
    "default_ladder",
    "shifted_params",
    "dissipated_power",
    "simulate_runaway",
]

BOLTZMANN = 1.380649e-23  # J/K


@dataclass(frozen=True)
class TcfFit:
    """``(f_T - f_0)/f_0 = a1 1e-6 dT + a2 1e-9 dT^2`` with ``dT = T - t0``.

    ``a1`` in ppm/degC, ``a2`` in ppb/degC^2.
    """

    a1: float
    a2: float
    t0: float = 25.0
    residual: float = 0.0

    def fractional(self, t):
        dt = np.asarray(t, dtype=float) - self.t0
        return self.a1 * 1e-6 * dt + self.a2 * 1e-9 * dt**2

    def to_dict(self):
        return {
            "a1_ppm_per_c": self.a1,
            "a2_ppb_per_c2": self.a2,
            "t0_c": self.t0,
            "residual": self.residual,
        }


def fit_tcf(temps, shifts, t0=25.0):
    """Least-squares quadratic TCF fit to fractional frequency shifts.

    The model has no constant term. ``residual`` is the RMS misfit of the
    fractional shift.
    """
    t = np.asarray(temps, dtype=float)
    y = np.asarray(shifts, dtype=float)
    if t.shape != y.shape or t.ndim != 1:
        raise ValueError("temps and shifts must be 1-D and the same length")
    if t.size < 3 or np.unique(t).size < 3:
        raise RankDeficient("TCF fit needs at least 3 distinct temperatures")
    dt = t - t0
    design = np.column_stack([dt * 1e-6, dt**2 * 1e-9])
    # column scaling keeps the normal equations well conditioned
    scale = np.max(np.abs(design), axis=0)
    if np.any(scale == 0):
        raise RankDeficient("temperature grid does not determine both coefficients")
    coef, _, rank, _ = np.linalg.lstsq(design / scale, y, rcond=None)
    if rank < 2:
        raise RankDeficient("TCF design matrix is rank deficient")
    a1, a2 = coef / scale
    resid = y - design @ (coef / scale)
    return TcfFit(float(a1), float(a2), float(t0), float(np.sqrt(np.mean(resid**2))))


def fit_tcf_frequencies(temps, freqs, t0=25.0):
    """TCF fit from absolute frequencies; ``f0`` is fitted alongside.

    Returns ``(fit, f0)``. The quadratic ``f(T) = c0 + c1 dT + c2 dT^2`` is
    solved first, then the shifts relative to ``f0 = c0`` go through
    :func:`fit_tcf` so the reported coefficients come from the same path.
    """
    t = np.asarray(temps, dtype=float)
    f = np.asarray(freqs, dtype=float)
    if t.size < 3 or np.unique(t).size < 3:
        raise RankDeficient("TCF fit needs at least 3 distinct temperatures")
    dt = t - t0
    span = np.max(np.abs(dt)) or 1.0
    c = np.polynomial.polynomial.polyfit(dt / span, f, 2)
    f0 = float(c[0])
    return fit_tcf(t, (f - f0) / f0, t0), f0


def tcf_shift(fit, f0, t):
    """Frequency at temperature ``t`` given the value ``f0`` at ``fit.t0``."""
    return f0 * (1 + fit.fractional(t))


@dataclass(frozen=True)
class EyringParams:
    """``tau = alpha exp(E / kT) P^m``; ``e_act`` in joules."""

    alpha: float
    e_act: float
    m: float

    def __post_init__(self):
        if not self.alpha > 0:
            raise DomainError("alpha must be > 0")


def eyring_ttf(p, t_kelvin, p_in):
    """Time to failure in seconds."""
    t = np.asarray(t_kelvin, dtype=float)
    if np.any(t <= 0):
        raise DomainError("absolute temperature must be > 0")
    if np.any(np.asarray(p_in) <= 0):
        raise DomainError("input power must be > 0")
    return p.alpha * np.exp(p.e_act / (BOLTZMANN * t)) * np.asarray(p_in, dtype=float) ** p.m


def dbm_to_watts(p_dbm):
    return 10.0 ** ((np.asarray(p_dbm, dtype=float) - 30.0) / 10.0)


def watts_to_dbm(p_w):
    return 10.0 * np.log10(np.asarray(p_w, dtype=float)) + 30.0


def power_density(p_dbm, area_mm2):
    """Delivered power over the transduction area, in dBm/mm^2."""
    if not np.all(np.asarray(area_mm2) > 0):
        raise DomainError("area must be > 0")
    return p_dbm - 10.0 * np.log10(area_mm2)


def density_fold(d1, d2):
    """Linear ratio between two densities given in dB units."""
    return 10.0 ** ((d2 - d1) / 10.0)


@dataclass(frozen=True)
class PowerLadder:
    """Stepped drive schedule: ``(level_dbm, dwell_s)`` pairs."""

    steps: tuple

    def __post_init__(self):
        steps = tuple((float(l), float(d)) for l, d in self.steps)
        levels = [l for l, _ in steps]
        if any(b < a for a, b in zip(levels, levels[1:])):
            raise ConfigError("ladder levels must be non-decreasing")
        if any(d <= 0 for _, d in steps):
            raise ConfigError("dwell times must be > 0")
        object.__setattr__(self, "steps", steps)

    @property
    def levels(self):
        return np.array([l for l, _ in self.steps])

    def __len__(self):
        return len(self.steps)


def default_ladder(ceiling=35.0, dwell=300.0):
    """18 to 30 dBm in 1 dB steps, to 33 dBm in 0.5 dB, then 0.25 dB up to ``ceiling``.

    The default dwell is 300 s; pass ``dwell=600`` for the 10-minute threshold
    definition.
    """
    # integer quarter-dB counts avoid float drift in the level values
    quarters = list(range(18 * 4, 30 * 4 + 1, 4))
    quarters += list(range(30 * 4 + 2, 33 * 4 + 1, 2))
    quarters += list(range(33 * 4 + 1, int(np.floor(ceiling * 4 + 1e-9)) + 1))
    levels = [q / 4 for q in quarters if q / 4 <= ceiling + 1e-12]
    return PowerLadder(tuple((l, dwell) for l in levels))


# -- self-heating simulator --------------------------------------------------


@dataclass(frozen=True)
class RunawayConfig:
    """Inputs of the lumped self-heating model.

    ``drive_window = (f_lo, f_hi)`` is searched for the highest-dissipation
    tone at the present temperature; ``f_lo == f_hi`` pins a single tone.
    ``tcf.t0`` is the temperature at which ``mbvd`` holds.
    """

    mbvd: MbvdParams
    tcf: TcfFit
    r_th: float
    t_amb: float
    drive_window: tuple
    ladder: PowerLadder = field(default_factory=default_ladder)
    max_temp: float = 300.0
    z0: float = 50.0
    topology: str = "series"
    window_points: int = 401
    tol: float = 1e-4
    max_iter: int = 10_000

    def __post_init__(self):
        if self.r_th < 0:
            raise ConfigError("r_th must be >= 0")
        f_lo, f_hi = self.drive_window
        if not 0 < f_lo <= f_hi:
            raise ConfigError("drive window must satisfy 0 < f_lo <= f_hi")
        if self.topology not in TOPOLOGIES:
            raise ConfigError(f"unknown topology {self.topology!r}")
        if self.window_points < 1:
            raise ConfigError("window_points must be >= 1")


@dataclass(frozen=True)
class LevelResult:
    level_dbm: float
    f_drive: float
    t_steady: float
    p_diss: float
    status: str
    iterations: int


def shifted_params(p, tcf, t):
    """mBVD parameters at temperature ``t``: ``l_m`` rescaled so ``f_s`` follows the TCF law."""
    ratio = 1 + tcf.fractional(t)
    if not ratio > 0:
        raise DomainError("TCF law drives the resonance to a non-positive frequency")
    return replace(p, l_m=p.l_m / ratio**2)


def _window(cfg):
    f_lo, f_hi = cfg.drive_window
    if f_lo == f_hi:
        return np.array([f_lo])
    return np.linspace(f_lo, f_hi, cfg.window_points)


def dissipated_power(cfg, p_inc, t, freqs=None):
    """``(f*, P_diss)`` maximising dissipated power over the window at temperature ``t``."""
    f = _window(cfg) if freqs is None else np.atleast_1d(freqs)
    p = shifted_params(cfg.mbvd, cfg.tcf, t)
    frac = power_budget_twoport(p, cfg.z0, f, cfg.topology).dissipated
    k = int(np.argmax(frac))
    return float(f[k]), float(p_inc * frac[k])


def _steady_state(cfg, p_inc, t_start):
    """Fixed point of ``T = t_amb + r_th P_diss(T)`` starting from ``t_start``.

    Switches to a 0.5 relaxation once successive updates change sign.
    """
    t = t_start
    damp = 1.0
    prev = 0.0
    f_star, p_d = dissipated_power(cfg, p_inc, t)
    for it in range(1, cfg.max_iter + 1):
        target = cfg.t_amb + cfg.r_th * p_d
        step = target - t
        if step * prev < 0:
            damp = 0.5
        prev = step
        t_new = t + damp * step
        f_star, p_d = dissipated_power(cfg, p_inc, t_new)
        if abs(t_new - t) < cfg.tol:
            return t_new, f_star, p_d, it, True
        t = t_new
    return t, f_star, p_d, cfg.max_iter, False


def simulate_runaway(cfg):
    """Steady state at each ladder level, carrying the temperature forward.

    Status per level: ``stable``; ``runaway`` when the fixed point does not
    settle within ``max_iter`` iterations; ``over_temp`` when the settled
    temperature exceeds ``max_temp``. The trajectory stops at the first
    failed level.
    """
    out = []
    t = cfg.t_amb
    for level, _dwell in cfg.ladder.steps:
        p_inc = float(dbm_to_watts(level))
        t, f_star, p_d, iters, ok = _steady_state(cfg, p_inc, t)
        if not ok:
            status = "runaway"
        elif t > cfg.max_temp:
            status = "over_temp"
        else:
            status = "stable"
        out.append(LevelResult(level, f_star, t, p_d, status, iters))
        if status != "stable":
            break
    return out
