"""Network-parameter containers and conversions.

A :class:`FrequencySweep` is an immutable frequency axis with one complex
value (or one 2x2 complex matrix) per point. :class:`NetworkData` adds the
port count and reference impedance needed to interpret scattering data.
"""

from __future__ import annotations

import io
import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import SweepError

__all__ = [
    "FrequencySweep",
    "NetworkData",
    "PowerCoefficients",
    "s_to_y",
    "y_to_s",
    "power_coefficients",
    "is_passive",
    "sweep_to_csv",
]


def _frozen(a):
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class FrequencySweep:
    """Frequency axis in Hz with per-point complex values.

    ``values`` has shape ``(n,)`` for scalar data or ``(n, 2, 2)`` for
    two-port matrices. ``flags`` marks points where a conversion hit a
    singularity; flagged values are NaN and are exempt from the finiteness
    check.
    """

    f: np.ndarray
    values: np.ndarray
    flags: np.ndarray = field(default=None)

    def __post_init__(self):
        f = np.array(self.f, dtype=float)
        v = np.array(self.values, dtype=complex)
        if f.ndim != 1:
            raise SweepError("frequency axis must be one-dimensional")
        if v.shape[:1] != f.shape or v.shape[1:] not in ((), (2, 2)):
            raise SweepError(f"values shape {v.shape} does not match {f.size} frequencies")
        if not np.all(np.isfinite(f)):
            raise SweepError("frequencies must be finite")
        if f.size > 1 and not np.all(np.diff(f) > 0):
            raise SweepError("frequencies must be strictly increasing")
        if self.flags is None:
            flags = np.zeros(f.size, dtype=bool)
        else:
            flags = np.array(self.flags, dtype=bool)
            if flags.shape != f.shape:
                raise SweepError("flags must have one entry per frequency")
        ok = v[~flags]
        if not np.all(np.isfinite(ok)):
            raise SweepError("values must be finite at unflagged points")
        object.__setattr__(self, "f", _frozen(f))
        object.__setattr__(self, "values", _frozen(v))
        object.__setattr__(self, "flags", _frozen(flags))

    def __len__(self):
        return self.f.size

    @property
    def omega(self):
        return 2 * np.pi * self.f

    def require(self, n):
        if len(self) < n:
            raise SweepError(f"operation needs at least {n} points, sweep has {len(self)}")
        return self

    def select(self, f_lo=None, f_hi=None):
        """Return the sub-sweep with ``f_lo <= f <= f_hi``."""
        m = np.ones(len(self), dtype=bool)
        if f_lo is not None:
            m &= self.f >= f_lo
        if f_hi is not None:
            m &= self.f <= f_hi
        return FrequencySweep(self.f[m], self.values[m], self.flags[m])


@dataclass(frozen=True, eq=False)
class NetworkData:
    """Scattering parameters of a one- or two-port referenced to ``z0``."""

    ports: int
    sweep: FrequencySweep
    z0: float = 50.0

    def __post_init__(self):
        if self.ports not in (1, 2):
            raise SweepError(f"only 1- and 2-port networks are supported, got {self.ports}")
        if not self.z0 > 0:
            raise SweepError(f"reference impedance must be positive, got {self.z0}")
        want = () if self.ports == 1 else (2, 2)
        if self.sweep.values.shape[1:] != want:
            raise SweepError(f"{self.ports}-port data needs per-point shape {want}")

    @property
    def f(self):
        return self.sweep.f

    @property
    def s(self):
        return self.sweep.values

    @property
    def s11(self):
        return self.s if self.ports == 1 else self.s[:, 0, 0]

    @property
    def s21(self):
        if self.ports == 1:
            raise SweepError("one-port network has no S21")
        return self.s[:, 1, 0]

    @classmethod
    def from_arrays(cls, f, s, z0=50.0):
        s = np.asarray(s, dtype=complex)
        return cls(1 if s.ndim == 1 else 2, FrequencySweep(f, s), z0)


def is_passive(net, tol=1e-9):
    """True where all eigenvalues of S S^H are <= 1 + tol."""
    s = net.s
    if net.ports == 1:
        return np.abs(s) ** 2 <= 1 + tol
    ssh = s @ np.conj(np.swapaxes(s, -1, -2))
    return np.all(np.linalg.eigvalsh(ssh) <= 1 + tol, axis=-1)


def s_to_y(net):
    """Admittance parameters in siemens.

    One-port: ``Y = (1 - S11) / (z0 (1 + S11))``. Two-port:
    ``Y = (I - S)(I + S)^-1 / z0``. Points where ``1 + S`` is singular are
    returned as NaN with ``flags`` set.
    """
    s = net.s
    if net.ports == 1:
        den = 1 + s
        bad = den == 0
        with np.errstate(divide="ignore", invalid="ignore"):
            y = (1 - s) / (net.z0 * den)
        y[bad] = np.nan
        return FrequencySweep(net.f, y, bad)
    eye = np.eye(2)
    y = np.full(s.shape, np.nan, dtype=complex)
    bad = np.zeros(len(net.f), dtype=bool)
    for k, sk in enumerate(s):
        a = eye + sk
        # Y (I + S) = (I - S) transposed into a standard solve
        if np.linalg.cond(a) > 1e15:
            bad[k] = True
            continue
        y[k] = np.linalg.solve(a.T, (eye - sk).T).T / net.z0
    return FrequencySweep(net.f, y, bad)


def y_to_s(adm, z0=50.0):
    """Inverse of :func:`s_to_y` for a sweep of admittances."""
    y = adm.values
    if y.ndim == 1:
        yz = y * z0
        return NetworkData(1, FrequencySweep(adm.f, (1 - yz) / (1 + yz), adm.flags), z0)
    eye = np.eye(2)
    s = np.empty_like(y)
    for k, yk in enumerate(y):
        yz = yk * z0
        s[k] = (eye - yz) @ np.linalg.inv(eye + yz)
    return NetworkData(2, FrequencySweep(adm.f, s, adm.flags), z0)


@dataclass(frozen=True, eq=False)
class PowerCoefficients:
    """Per-point power fractions of the incident wave at port 1."""

    f: np.ndarray
    reflected: np.ndarray
    transmitted: np.ndarray | None
    dissipated: np.ndarray
    negative: np.ndarray


def power_coefficients(net, tol=1e-9):
    """Reflected, transmitted and dissipated fractions at port 1.

    ``D = 1 - R - T`` is kept raw. Points where noise drives it below
    ``-tol`` are marked in ``negative`` and a warning is emitted.
    """
    r = np.abs(net.s11) ** 2
    t = np.abs(net.s21) ** 2 if net.ports == 2 else None
    d = 1 - r - (t if t is not None else 0.0)
    neg = d < -tol
    if np.any(neg):
        warnings.warn(
            f"{int(neg.sum())} point(s) with negative dissipated power (measurement noise)",
            RuntimeWarning,
            stacklevel=2,
        )
    return PowerCoefficients(net.f, r, t, d, neg)


def sweep_to_csv(net):
    """CSV text of the sweep; columns depend on the port count."""
    buf = io.StringIO()
    if net.ports == 1:
        buf.write("freq_hz,re,im\n")
        for fk, sk in zip(net.f, net.s):
            buf.write(f"{fk:.17g},{sk.real:.17g},{sk.imag:.17g}\n")
    else:
        buf.write("freq_hz,s11_re,s11_im,s21_re,s21_im,s12_re,s12_im,s22_re,s22_im\n")
        for fk, sk in zip(net.f, net.s):
            cells = [sk[0, 0], sk[1, 0], sk[0, 1], sk[1, 1]]
            row = ",".join(f"{c.real:.17g},{c.imag:.17g}" for c in cells)
            buf.write(f"{fk:.17g},{row}\n")
    return buf.getvalue()
