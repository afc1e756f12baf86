"""``lawbench`` command line.

Subcommands read measurement or config files and emit CSV/JSON plot data.
Exit codes: 0 success, 1 domain or parse error, 2 usage error.
"""

from __future__ import annotations

import argparse
import csv
import io
import math
import sys
from pathlib import Path

import numpy as np

from . import config as kv
from .dispersion import existence_boundary
from .errors import ConfigError, LawbenchError
from .mbvd import (
    MbvdParams,
    fit_mbvd,
    gamma_from_s21,
    power_budget_oneport,
    power_budget_twoport,
)
from .metrics import summarize
from .netparam import FrequencySweep, s_to_y
from .stress import ProfileTrace, StoneyGeometry, aggregate, differential_profile, trace_stress
from .thermo import PowerLadder, RunawayConfig, TcfFit, default_ladder, fit_tcf, fit_tcf_frequencies, simulate_runaway
from .touchstone import read_touchstone

EXIT_OK, EXIT_ERROR, EXIT_USAGE = 0, 1, 2


def fmt(x):
    """Fixed 17-significant-digit float formatting used by every output."""
    return f"{float(x):.17g}"


def to_json(obj, indent=0):
    """Minimal JSON writer with 17-digit floats; non-finite floats become null."""
    pad = "  " * (indent + 1)
    end = "  " * indent
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f'{pad}"{k}": {to_json(v, indent + 1)}' for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        return "[\n" + ",\n".join(pad + to_json(v, indent + 1) for v in obj) + "\n" + end + "]"
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return fmt(obj) if math.isfinite(obj) else "null"
    if obj is None:
        return "null"
    s = str(obj).replace("\\", "\\\\").replace('"', '\\"')
    return f'"{s}"'


def _emit(text, output):
    if output is None or output == "-":
        sys.stdout.write(text)
    else:
        Path(output).write_text(text)


def _csv(header, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([fmt(v) if isinstance(v, (float, np.floating)) else v for v in r])
    return buf.getvalue()


def _band(text):
    try:
        lo, hi = (float(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError("band must be 'f_lo,f_hi' in Hz")
    if not lo < hi:
        raise argparse.ArgumentTypeError("band needs f_lo < f_hi")
    return lo, hi


def _floats(text):
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _load_net(path, z0=None):
    net = read_touchstone(path)
    if z0 is not None:
        net = type(net)(net.ports, net.sweep, z0)
    return net


# -- subcommands -------------------------------------------------------------


def cmd_metrics(args):
    header = ["file", "f_r_hz", "f_a_hz", "ar_db", "kt2", "bode_q_max", "q3db", "fom"]
    rows, failed = [], 0
    for path in args.files:
        try:
            m = summarize(_load_net(path, args.z0), band=args.band)
        except (LawbenchError, ValueError, OSError) as e:
            print(f"{path}: {e}", file=sys.stderr)
            failed += 1
            continue
        rows.append([path, m.f_r, m.f_a, m.ar_db, m.kt2, m.bode_q_max, m.q3db_r, m.fom])
    _emit(_csv(header, rows), args.output)
    return EXIT_ERROR if failed else EXIT_OK


def device_admittance(net, topology="series"):
    """Device admittance from a one-port reflection or a thru-embedded two-port."""
    if net.ports == 1:
        return s_to_y(net)
    g = gamma_from_s21(net.f, net.s21, topology, net.z0)
    if np.any(g.singular):
        raise LawbenchError("S21 inversion is singular at some points")
    return FrequencySweep(net.f, 1 / g.z)


def cmd_fit_mbvd(args):
    net = _load_net(args.file, args.z0)
    adm = device_admittance(net, args.topology)
    p, rms = fit_mbvd(adm)
    report = dict(p.to_dict(), f_s_hz=p.f_s, residual_rms=rms)
    _emit(to_json(report) + "\n", args.output)
    if args.budget:
        ports = args.ports or net.ports
        if ports == 1:
            b = power_budget_oneport(p, net.z0, net.f)
        else:
            b = power_budget_twoport(p, net.z0, net.f, args.topology)
        rows = zip(b.f, b.p_reflected, b.p_transmitted, b.p_rs, b.p_rm, b.p_r0)
        Path(args.budget).write_text(
            _csv(["freq_hz", "p_refl", "p_trans", "p_rs", "p_rm", "p_r0"], rows)
        )
    return EXIT_OK


DEFAULT_STACK = {
    "piezo": "LiNbO3_loaded",
    "interlayer": "SiO2",
    "cladding": "a-Si",
    "h": "270e-9",
    "wavelength": "1.2e-6",
    "k2": "0.3,0.4,0.5",
}


def _material(cfg, role, rho_key, v_key):
    if rho_key in cfg and v_key in cfg:
        return kv.get_float(cfg, rho_key), kv.get_float(cfg, v_key)
    m = kv.load_preset(cfg[role])
    return m["rho"], m["v_b"]


def stack_context(cfg):
    """``(x, y, a, b, beta_h, k2_list)`` from a flat stack config."""
    full = dict(DEFAULT_STACK)
    full.update(cfg)
    rho, v_b = _material(full, "piezo", "rho", "v_b")
    rho_p, v_b_p = _material(full, "cladding", "rho_p", "v_b_p")
    rho_pp, v_b_pp = _material(full, "interlayer", "rho_pp", "v_b_pp")
    h = kv.get_float(full, "h")
    if "beta" in full:
        beta = kv.get_float(full, "beta")
    else:
        beta = 2 * np.pi / kv.get_float(full, "wavelength")
    k2s = [float(v) for v in full["k2"].split(",")]
    return rho_pp / rho, v_b_pp / v_b, rho_pp / rho_p, v_b_pp / v_b_p, beta * h, k2s


def cmd_dispersion(args):
    cfg = kv.read_kv(args.stack) if args.stack else {}
    x, y, _, _, bh0, k2s = stack_context(cfg)
    if args.k2:
        k2s = args.k2
    bhs = args.beta_h or [bh0]
    a_grid = np.linspace(args.a_min, args.a_max, args.a_points)
    rows = []
    for k2 in k2s:
        for bh in bhs:
            b = np.atleast_1d(existence_boundary(a_grid, x, y, k2, bh))
            rows.extend([k2, bh, ai, bi] for ai, bi in zip(a_grid, b))
    _emit(_csv(["k2", "beta_h", "a", "b_max"], rows), args.output)
    return EXIT_OK


def _read_table(path):
    with open(path, newline="") as fh:
        rows = [r for r in csv.reader(fh) if r and not r[0].lstrip().startswith("#")]
    if not rows:
        raise ConfigError(f"{path}: empty table")
    header = [h.strip().lower() for h in rows[0]]
    try:
        data = np.array([[float(v) for v in r] for r in rows[1:]], dtype=float)
    except ValueError as e:
        raise ConfigError(f"{path}: {e}")
    if data.ndim != 2 or data.shape[1] != len(header):
        raise ConfigError(f"{path}: every row needs {len(header)} columns")
    return header, data


def cmd_tcf(args):
    header, data = _read_table(args.file)
    if header[:2] == ["t_c", "shift"]:
        fit = fit_tcf(data[:, 0], data[:, 1], args.t0)
        report = fit.to_dict()
    elif header[:2] == ["t_c", "f_hz"]:
        fit, f0 = fit_tcf_frequencies(data[:, 0], data[:, 1], args.t0)
        report = dict(fit.to_dict(), f0_hz=f0)
    else:
        raise ConfigError("TCF table header must be 't_c,f_hz' or 't_c,shift'")
    _emit(to_json(report) + "\n", args.output)
    return EXIT_OK


def _read_profile(path, units):
    header, data = _read_table(path)
    scale = 1e-6 if units == "um" else 1.0
    return ProfileTrace(data[:, 0] * scale, data[:, 1] * scale, Path(path).stem)


def cmd_stoney(args):
    if len(args.files) % 2:
        raise argparse.ArgumentTypeError("stoney needs PRE POST file pairs")
    geo = StoneyGeometry(t_f=args.t_f, t_s=args.t_s, biaxial_modulus=args.modulus)
    sign = -1 if args.invert_sign else 1
    traces = []
    for pre_path, post_path in zip(args.files[::2], args.files[1::2]):
        diff = differential_profile(_read_profile(pre_path, args.units), _read_profile(post_path, args.units))
        traces.append(trace_stress(diff, geo, args.edge_margin, sign))
    res = aggregate(traces, args.mad_k)
    _emit(to_json(res.to_dict()) + "\n", args.output)
    return EXIT_OK


def runaway_config(cfg):
    g = kv.get_float
    p = MbvdParams(*(g(cfg, k) for k in ("r_s", "r_0", "c_0", "r_m", "l_m", "c_m")))
    tcf = TcfFit(g(cfg, "a1", 0.0), g(cfg, "a2", 0.0), g(cfg, "t0", 25.0))
    if "levels" in cfg:
        dwell = g(cfg, "dwell", 300.0)
        ladder = PowerLadder(tuple((float(v), dwell) for v in cfg["levels"].split(",")))
    else:
        ladder = default_ladder(g(cfg, "ceiling", 35.0), g(cfg, "dwell", 300.0))
    f_lo = g(cfg, "f_lo")
    return RunawayConfig(
        mbvd=p,
        tcf=tcf,
        r_th=g(cfg, "r_th"),
        t_amb=g(cfg, "t_amb", 25.0),
        drive_window=(f_lo, g(cfg, "f_hi", f_lo)),
        ladder=ladder,
        max_temp=g(cfg, "max_temp", 300.0),
        z0=g(cfg, "z0", 50.0),
        topology=cfg.get("topology", "series"),
        window_points=int(g(cfg, "window_points", 401.0)),
    )


def cmd_power_sim(args):
    cfg = kv.read_kv(args.config)
    if args.topology:
        cfg["topology"] = args.topology
    if args.z0 is not None:
        cfg["z0"] = str(args.z0)
    traj = simulate_runaway(runaway_config(cfg))
    rows = [[r.level_dbm, r.f_drive, r.t_steady, r.p_diss, r.status] for r in traj]
    _emit(_csv(["level_dbm", "f_drive_hz", "t_steady_c", "p_diss_w", "status"], rows), args.output)
    return EXIT_OK


# -- parser ------------------------------------------------------------------


def build_parser():
    parser = argparse.ArgumentParser(prog="lawbench", description=__doc__.splitlines()[0])
    parser.add_argument("--seed", type=int, default=0, help="seed for any randomised path (none by default)")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("-o", "--output", help="output file (default: stdout)")
        return p

    p = common(sub.add_parser("metrics", help="resonator figures of merit per .s1p file"))
    p.add_argument("files", nargs="+")
    p.add_argument("--band", type=_band, help="Bode-Q_max band 'f_lo,f_hi' in Hz")
    p.add_argument("--z0", type=float)
    p.set_defaults(func=cmd_metrics)

    p = common(sub.add_parser("fit-mbvd", help="mBVD fit and power budget"))
    p.add_argument("file")
    p.add_argument("--ports", type=int, choices=(1, 2), help="budget embedding (default: file port count)")
    p.add_argument("--topology", choices=("series", "shunt"), default="series")
    p.add_argument("--z0", type=float)
    p.add_argument("--budget", help="write the power-budget CSV here")
    p.set_defaults(func=cmd_fit_mbvd)

    p = common(sub.add_parser("dispersion", help="LAW existence-boundary curves"))
    p.add_argument("--stack", help="key = value stack config")
    p.add_argument("--k2", type=_floats, help="comma-separated K^2 values")
    p.add_argument("--beta-h", type=_floats, help="comma-separated beta*h values")
    p.add_argument("--a-min", type=float, default=0.1)
    p.add_argument("--a-max", type=float, default=3.0)
    p.add_argument("--a-points", type=int, default=59)
    p.set_defaults(func=cmd_dispersion)

    p = common(sub.add_parser("tcf", help="quadratic TCF fit"))
    p.add_argument("file", help="CSV with header t_c,f_hz or t_c,shift")
    p.add_argument("--t0", type=float, default=25.0)
    p.set_defaults(func=cmd_tcf)

    p = common(sub.add_parser("stoney", help="residual stress from profilometry"))
    p.add_argument("files", nargs="+", metavar="PRE POST")
    p.add_argument("--t-f", type=float, required=True, help="film thickness (m)")
    p.add_argument("--t-s", type=float, default=525e-6, help="substrate thickness (m)")
    p.add_argument("--modulus", type=float, default=180.5e9, help="substrate E/(1-nu) (Pa)")
    p.add_argument("--units", choices=("m", "um"), default="m")
    p.add_argument("--edge-margin", type=float, default=0.05)
    p.add_argument("--mad-k", type=float, default=3.0)
    p.add_argument("--invert-sign", action="store_true")
    p.set_defaults(func=cmd_stoney)

    p = common(sub.add_parser("power-sim", help="self-heating ladder simulation"))
    p.add_argument("config")
    p.add_argument("--topology", choices=("series", "shunt"))
    p.add_argument("--z0", type=float)
    p.set_defaults(func=cmd_power_sim)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except argparse.ArgumentTypeError as e:
        parser.print_usage(sys.stderr)
        print(f"lawbench: error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except (LawbenchError, ValueError, OSError) as e:
        print(f"lawbench {args.command}: {e}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
