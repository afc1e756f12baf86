"""Thin-film residual stress from wafer-curvature profilometry.

Pipeline: pre/post height traces -> differential profile -> degree-5
polynomial -> pointwise radius of curvature -> Stoney stress -> per-trace
mean/std -> outlier-screened inverse-variance aggregate.

Sign convention: ``d2y/dx2 > 0`` in the differential profile gives a
positive radius and positive (tensile) stress. Pass ``sign=-1`` to flip it.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial import Polynomial
from scipy.stats import median_abs_deviation

from .errors import AllOutliers, DomainError, GridMismatch, NoCurvature, RankDeficient

__all__ = [
    "SI100_BIAXIAL_MODULUS",
    "ProfileTrace",
    "StoneyGeometry",
    "Poly5Fit",
    "TraceStress",
    "StressResult",
    "differential_profile",
    "fit_poly5",
    "curvature_radius",
    "stoney_stress",
    "trace_stress",
    "aggregate",
]

SI100_BIAXIAL_MODULUS = 180.5e9  # Pa, E/(1 - nu) for Si(100)
FLAT_CURVATURE = 1e-30


@dataclass(frozen=True, eq=False)
class ProfileTrace:
    x: np.ndarray
    y: np.ndarray
    label: str = ""

    def __post_init__(self):
        x = np.array(self.x, dtype=float)
        y = np.array(self.y, dtype=float)
        if x.ndim != 1 or x.shape != y.shape:
            raise ValueError("x and y must be 1-D arrays of equal length")
        if x.size < 7:
            raise ValueError("a trace needs at least 7 points")
        if not np.all(np.diff(x) > 0):
            raise ValueError("x must be strictly increasing")
        if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
            raise ValueError("trace contains non-finite samples")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)


@dataclass(frozen=True)
class StoneyGeometry:
    """Substrate biaxial modulus ``E/(1-nu)`` (Pa) and thicknesses (m)."""

    t_f: float
    t_s: float = 525e-6
    biaxial_modulus: float = SI100_BIAXIAL_MODULUS

    def __post_init__(self):
        for name in ("t_f", "t_s", "biaxial_modulus"):
            if not getattr(self, name) > 0:
                raise DomainError(f"{name} must be > 0")
        if self.t_f > 0.05 * self.t_s:
            warnings.warn("film thicker than 5% of the substrate; Stoney estimate is unreliable", stacklevel=2)


def differential_profile(pre, post):
    """``post - pre`` on the grid of ``pre``.

    ``post`` is linearly resampled when the grids differ; the result keeps
    only the part of ``pre``'s grid covered by ``post``.
    """
    if pre.x.shape == post.x.shape and np.array_equal(pre.x, post.x):
        return ProfileTrace(pre.x, post.y - pre.y, post.label or pre.label)
    inside = (pre.x >= post.x[0]) & (pre.x <= post.x[-1])
    if inside.sum() < 7:
        raise GridMismatch("pre and post traces do not overlap enough to resample")
    x = pre.x[inside]
    return ProfileTrace(x, np.interp(x, post.x, post.y) - pre.y[inside], post.label or pre.label)


@dataclass(frozen=True, eq=False)
class Poly5Fit:
    """Degree-5 least-squares fit. ``poly`` works in scaled coordinates internally."""

    poly: Polynomial
    residual_rms: float

    @property
    def coeffs(self):
        """Six power-series coefficients in physical units, lowest order first."""
        c = self.poly.convert(domain=[-1, 1], window=[-1, 1]).coef
        return np.pad(c, (0, 6 - c.size))

    def __call__(self, x):
        return self.poly(x)


def fit_poly5(trace):
    """Least-squares quintic through the trace, conditioned by mapping ``x`` onto [-1, 1]."""
    if trace.x.size < 7:
        raise RankDeficient("need at least 7 points for a degree-5 fit")
    poly, (_, rank, _, _) = Polynomial.fit(trace.x, trace.y, 5, full=True)
    if rank < 6:
        raise RankDeficient(f"degree-5 design matrix has rank {rank}")
    resid = trace.y - poly(trace.x)
    return Poly5Fit(poly, float(np.sqrt(np.mean(resid**2))))


def _as_poly(coeffs):
    if isinstance(coeffs, Poly5Fit):
        return coeffs.poly
    if isinstance(coeffs, Polynomial):
        return coeffs
    return Polynomial(np.asarray(coeffs, dtype=float))


def curvature_radius(coeffs, x):
    """Signed radius ``(1 + y'^2)^(3/2) / y''`` of the fitted profile.

    ``coeffs`` is a :class:`Poly5Fit`, a :class:`~numpy.polynomial.Polynomial`
    or power-series coefficients. Where ``|y''| < 1e-30`` the radius is
    reported as ``inf`` (flat).
    """
    poly = _as_poly(coeffs)
    x = np.asarray(x, dtype=float)
    d1 = poly.deriv(1)(x)
    d2 = poly.deriv(2)(x)
    flat = np.abs(d2) < FLAT_CURVATURE
    with np.errstate(divide="ignore", invalid="ignore"):
        r = np.where(flat, np.inf, (1 + d1**2) ** 1.5 / np.where(flat, 1.0, d2))
    return r[()] if r.ndim == 0 else r


def stoney_stress(radius, geo, sign=1):
    """Film stress ``E t_s^2 / (6 (1-nu) R t_f)`` in Pa; ``inf`` radius gives 0."""
    r = np.asarray(radius, dtype=float)
    if np.any(r == 0):
        raise DomainError("radius of curvature must be nonzero")
    s = sign * geo.biaxial_modulus * geo.t_s**2 / (6.0 * r * geo.t_f)
    return s[()] if s.ndim == 0 else s


@dataclass(frozen=True)
class TraceStress:
    mean: float
    std: float
    mean_roc: float = float("nan")
    label: str = ""


def trace_stress(diff, geo, edge_margin=0.05, sign=1):
    """Mean and standard deviation of the pointwise Stoney stress along one trace.

    Samples within ``edge_margin`` of the scan length from either end are
    dropped. Flat points (infinite radius) contribute zero stress.
    """
    if not 0 <= edge_margin < 0.5:
        raise ValueError("edge_margin must lie in [0, 0.5)")
    fit = fit_poly5(diff)
    x = diff.x
    span = x[-1] - x[0]
    keep = (x >= x[0] + edge_margin * span) & (x <= x[-1] - edge_margin * span)
    if not np.any(keep):
        raise NoCurvature("edge margin leaves no samples")
    r = curvature_radius(fit, x[keep])
    sigma = stoney_stress(r, geo, sign)
    finite = np.isfinite(r)
    # mean radius from mean curvature so flat points do not blow it up
    mean_curv = np.mean(np.where(finite, 1 / np.where(finite, r, 1.0), 0.0))
    mean_roc = float("inf") if mean_curv == 0 else float(1 / mean_curv)
    return TraceStress(float(np.mean(sigma)), float(np.std(sigma)), mean_roc, diff.label)


@dataclass(frozen=True)
class StressResult:
    mean_stress: float
    std_stress: float
    mean_roc: float
    traces: tuple = field(default_factory=tuple)
    excluded: tuple = field(default_factory=tuple)

    def to_dict(self):
        return {
            "mean_mpa": self.mean_stress / 1e6,
            "err_mpa": self.std_stress / 1e6,
            "mean_roc_m": self.mean_roc,
            "traces": [
                {
                    "label": t.label,
                    "mean_mpa": t.mean / 1e6,
                    "std_mpa": t.std / 1e6,
                    "excluded": bool(ex),
                }
                for t, ex in zip(self.traces, self.excluded)
            ],
        }


def _weighted(means, stds):
    zero = stds == 0
    if np.any(zero):
        return float(np.mean(means[zero])), 0.0
    w = 1 / stds**2
    return float(np.sum(w * means) / np.sum(w)), float(1 / np.sqrt(np.sum(w)))


def aggregate(traces, mad_k=3.0):
    """Inverse-variance weighted mean over traces after a median/MAD outlier screen.

    A trace is excluded when ``|mean - median| > mad_k * MAD`` of the
    per-trace means, with the MAD scaled to be consistent with a Gaussian
    standard deviation (so ``mad_k = 3`` is a three-sigma screen).
    ``std_stress`` of the result is the standard error of the weighted mean.
    """
    items = [t if isinstance(t, TraceStress) else TraceStress(*t) for t in traces]
    if not items:
        raise ValueError("need at least one trace")
    means = np.array([t.mean for t in items])
    stds = np.array([t.std for t in items])
    med = np.median(means)
    mad = median_abs_deviation(means, scale="normal")
    excluded = np.abs(means - med) > mad_k * mad
    if np.all(excluded):
        raise AllOutliers("every trace was rejected by the outlier screen")
    keep = ~excluded
    mean, err = _weighted(means[keep], stds[keep])
    rocs = np.array([t.mean_roc for t in items])[keep]
    rocs = rocs[np.isfinite(rocs)]
    mean_roc = float(np.mean(rocs)) if rocs.size else float("nan")
    return StressResult(mean, err, mean_roc, tuple(items), tuple(bool(e) for e in excluded))
