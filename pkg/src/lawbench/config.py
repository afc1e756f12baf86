"""Flat ``key = value`` config files and material presets.

Presets ship as ``presets/<name>.cfg`` inside the package. A directory named
by the ``LAWBENCH_PRESETS`` environment variable is searched first, so user
files override the shipped ones.
"""

from __future__ import annotations

import os
from importlib import resources
from pathlib import Path

from .errors import ConfigError

__all__ = ["parse_kv", "read_kv", "load_preset", "list_presets", "get_float"]

PRESET_ENV = "LAWBENCH_PRESETS"


def parse_kv(text, source="<config>"):
    """Parse ``key = value`` lines. ``#`` starts a comment; keys are lower-cased."""
    out = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value'")
        key, value = (s.strip() for s in line.split("=", 1))
        if not key:
            raise ConfigError(f"{source}:{lineno}: empty key")
        out[key.lower()] = value
    return out


def read_kv(path):
    path = Path(path)
    return parse_kv(path.read_text(), str(path))


def get_float(cfg, key, default=None):
    if key not in cfg:
        if default is None:
            raise ConfigError(f"missing required key {key!r}")
        return default
    try:
        return float(cfg[key])
    except ValueError:
        raise ConfigError(f"key {key!r} is not a number: {cfg[key]!r}")


def _search_dirs():
    env = os.environ.get(PRESET_ENV)
    dirs = [Path(env)] if env else []
    dirs.append(Path(str(resources.files("lawbench") / "presets")))
    return dirs


def list_presets():
    names = set()
    for d in _search_dirs():
        if d.is_dir():
            names.update(p.stem for p in d.glob("*.cfg"))
    return sorted(names)


def load_preset(name):
    """Material dict with float ``rho`` and ``v_b`` (SI units)."""
    for d in _search_dirs():
        p = d / f"{name}.cfg"
        if p.is_file():
            cfg = read_kv(p)
            return {"name": cfg.get("name", name), "rho": get_float(cfg, "rho"), "v_b": get_float(cfg, "v_b")}
    raise ConfigError(f"unknown material preset {name!r}; available: {', '.join(list_presets())}")
