"""Touchstone v1 (.s1p/.s2p) reader and writer.

Frequencies are scaled with :mod:`decimal` arithmetic so a write/parse
cycle reproduces every frequency bit for bit regardless of the unit.
"""

from __future__ import annotations

import io
from decimal import Decimal
from pathlib import Path

import numpy as np

from .errors import (
    ColumnCountError,
    NonMonotoneFrequencyError,
    OptionLineError,
    TouchstoneError,
    UnsupportedParameterError,
    UnsupportedVersionError,
)
from .netparam import FrequencySweep, NetworkData

__all__ = ["parse_touchstone", "write_touchstone", "read_touchstone", "UNITS", "FORMATS"]

UNITS = {"HZ": 0, "KHZ": 3, "MHZ": 6, "GHZ": 9}
FORMATS = ("RI", "MA", "DB")
_PARAMS = {"S", "Y", "Z", "H", "G"}


def _parse_option_line(tokens, lineno):
    opts = {"unit": "GHZ", "param": "S", "format": "MA", "z0": 50.0}
    it = iter(t.upper() for t in tokens)
    for tok in it:
        if tok in UNITS:
            opts["unit"] = tok
        elif tok in _PARAMS:
            if tok != "S":
                raise UnsupportedParameterError(
                    f"parameter type {tok!r} is not supported (only S)", lineno
                )
            opts["param"] = tok
        elif tok in FORMATS:
            opts["format"] = tok
        elif tok == "R":
            try:
                opts["z0"] = float(next(it))
            except (StopIteration, ValueError):
                raise OptionLineError("'R' must be followed by a reference impedance", lineno)
            if not opts["z0"] > 0:
                raise OptionLineError("reference impedance must be positive", lineno)
        else:
            raise OptionLineError(f"unrecognised option token {tok!r}", lineno)
    return opts


def _to_complex(a, b, fmt):
    if fmt == "RI":
        return complex(a, b)
    mag = a if fmt == "MA" else 10.0 ** (a / 20.0)
    ang = np.deg2rad(b)
    return complex(mag * np.cos(ang), mag * np.sin(ang))


def parse_touchstone(text, ports=None):
    """Parse Touchstone v1 text into :class:`NetworkData`.

    The port count is inferred from the first data row (3 columns for a
    one-port, 9 for a two-port) unless ``ports`` is given. Two-port rows are
    ordered S11 S21 S12 S22.
    """
    opts = None
    freqs, rows = [], []
    ncols = {1: 3, 2: 9}.get(ports)
    last_f = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("!", 1)[0].strip()
        if not line:
            continue
        if line.startswith("["):
            raise UnsupportedVersionError("Touchstone v2 keywords are not supported", lineno)
        if line.startswith("#"):
            # only the first option line counts
            if opts is None:
                opts = _parse_option_line(line[1:].split(), lineno)
            continue
        if opts is None:
            opts = _parse_option_line([], lineno)
        tokens = line.split()
        if ncols is None:
            if len(tokens) not in (3, 9):
                raise ColumnCountError(
                    f"expected 3 (1-port) or 9 (2-port) columns, got {len(tokens)}", lineno
                )
            ncols = len(tokens)
        if len(tokens) != ncols:
            raise ColumnCountError(f"expected {ncols} columns, got {len(tokens)}", lineno)
        try:
            fdec = Decimal(tokens[0])
            nums = [float(t) for t in tokens[1:]]
        except (ValueError, ArithmeticError):
            raise TouchstoneError(f"non-numeric data in row {line!r}", lineno)
        f_hz = float(fdec.scaleb(UNITS[opts["unit"]]))
        if last_f is not None and not f_hz > last_f:
            raise NonMonotoneFrequencyError("frequencies must be strictly increasing", lineno)
        last_f = f_hz
        freqs.append(f_hz)
        rows.append([_to_complex(nums[i], nums[i + 1], opts["format"]) for i in range(0, len(nums), 2)])
    if not freqs:
        raise TouchstoneError("no data rows found")
    data = np.array(rows, dtype=complex)
    if ncols == 3:
        return NetworkData(1, FrequencySweep(freqs, data[:, 0]), opts["z0"])
    s11, s21, s12, s22 = data.T
    s = np.stack([np.stack([s11, s12], -1), np.stack([s21, s22], -1)], -2)
    return NetworkData(2, FrequencySweep(freqs, s), opts["z0"])


def read_touchstone(path):
    path = Path(path)
    ports = {".s1p": 1, ".s2p": 2}.get(path.suffix.lower())
    return parse_touchstone(path.read_text(), ports=ports)


def _fmt_freq(f_hz, exp):
    d = Decimal(f_hz).scaleb(-exp).normalize()
    s = format(d, "f")
    return s


def _fmt_pair(z, fmt):
    if fmt == "RI":
        a, b = z.real, z.imag
    else:
        mag = abs(z)
        b = float(np.rad2deg(np.angle(z)))
        a = mag if fmt == "MA" else 20.0 * np.log10(mag) if mag > 0 else -np.inf
    return f"{float(a)!r} {float(b)!r}"


def write_touchstone(net, unit="GHZ", fmt="RI", comment=None):
    """Serialise ``net`` as Touchstone v1 text."""
    unit, fmt = unit.upper(), fmt.upper()
    if unit not in UNITS:
        raise ValueError(f"unknown frequency unit {unit!r}")
    if fmt not in FORMATS:
        raise ValueError(f"unknown data format {fmt!r}")
    if len(net.f) == 0:
        raise ValueError("nothing to serialise: empty sweep")
    exp = UNITS[unit]
    buf = io.StringIO()
    if comment:
        for c in comment.splitlines():
            buf.write(f"! {c}\n")
    buf.write(f"# {unit} S {fmt} R {float(net.z0)!r}\n")
    for f, s in zip(net.f, net.s):
        cells = [s] if net.ports == 1 else [s[0, 0], s[1, 0], s[0, 1], s[1, 1]]
        buf.write(_fmt_freq(f, exp) + " " + " ".join(_fmt_pair(c, fmt) for c in cells) + "\n")
    return buf.getvalue()
