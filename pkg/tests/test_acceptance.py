"""Acceptance suite: one PASS/FAIL line per criterion.

Each test gathers named sub-checks plus a wall-clock budget, records the
outcome for the terminal summary, prints it and then asserts. Run with
``pytest tests/test_acceptance.py -v`` or ``python3 tests/test_acceptance.py``.
"""

import time

import numpy as np
from scipy.optimize import brentq
from scipy.stats import norm

from lawbench.dispersion import (
    LayerStack,
    delta_single_overlayer,
    delta_v,
    delta_v_complex,
    existence_boundary,
    existence_lhs,
)
from lawbench.mbvd import (
    admittance_sweep,
    fit_mbvd,
    gamma_from_s21,
    mbvd_impedance,
    power_budget_oneport,
    power_budget_twoport,
    twoport_s,
)
from lawbench.metrics import bode_q, find_resonances, fa_from_kt2, kt2, q3db
from lawbench.netparam import FrequencySweep, NetworkData
from lawbench.stress import (
    ProfileTrace,
    StoneyGeometry,
    TraceStress,
    aggregate,
    differential_profile,
    trace_stress,
)
from lawbench.thermo import (
    PowerLadder,
    RunawayConfig,
    TcfFit,
    dbm_to_watts,
    density_fold,
    dissipated_power,
    fit_tcf,
    power_density,
    simulate_runaway,
)
from lawbench.touchstone import parse_touchstone, write_touchstone

from conftest import (
    ACCEPTANCE,
    FLANK_TONE,
    NEG_TCF,
    add_noise,
    fit_grid,
    make_device,
    random_device,
)


class Criterion:
    """Collects named sub-checks and a runtime budget for one criterion."""

    def __init__(self, name, budget_s):
        self.name = name
        self.budget = budget_s
        self.checks = []
        self.t0 = time.perf_counter()

    def check(self, label, ok, note=""):
        self.checks.append((label, bool(ok), note))

    def finish(self):
        elapsed = time.perf_counter() - self.t0
        self.check("runtime", elapsed < self.budget, f"{elapsed:.2f}s < {self.budget:g}s")
        failed = [c for c in self.checks if not c[1]]
        parts = [f"{l}{' (' + n + ')' if n else ''}" for l, ok, n in self.checks if not ok] or [
            f"{len(self.checks)} checks"
        ]
        detail = ("failed: " if failed else "") + "; ".join(parts)
        ACCEPTANCE.append((self.name, not failed, detail))
        print(f"{'PASS' if not failed else 'FAIL'}  criterion {self.name}: {detail}")
        assert not failed, detail


# -- 1 -----------------------------------------------------------------------


def test_criterion_1_power_density_arithmetic():
    c = Criterion("1", 1.0)
    d1 = power_density(22.65, 0.0644)
    d2 = power_density(33.70, 0.0644)
    c.check("22.65 dBm -> 34.56 dBm/mm2", abs(d1 - 34.56) <= 0.01, f"{d1:.4f}")
    c.check("33.70 dBm -> 45.61 dBm/mm2", abs(d2 - 45.61) <= 0.01, f"{d2:.4f}")
    fold = density_fold(34.56, 45.61)
    c.check("fold 12.73", abs(fold - 12.73) <= 0.01, f"{fold:.4f}")
    w = float(dbm_to_watts(49.45))
    c.check("49.45 dBm/mm2 -> 88.11 W/mm2", abs(w - 88.11) <= 0.05, f"{w:.4f}")
    c.finish()


# -- 2 -----------------------------------------------------------------------


def test_criterion_2_tcf_recovery():
    c = Criterion("2", 1.0)
    temps = np.linspace(-150, 325, 25)
    for a1, a2 in [(-21.8, -3.387), (-13.0, -0.948), (-64.30, -9.672)]:
        fit = fit_tcf(temps, TcfFit(a1, a2).fractional(temps))
        e1 = abs(fit.a1 / a1 - 1)
        e2 = abs(fit.a2 / a2 - 1)
        c.check(f"({a1}, {a2})", max(e1, e2) <= 1e-6, f"rel err {max(e1, e2):.1e}")
    c.finish()


# -- 3 -----------------------------------------------------------------------

STACK_X, STACK_Y, STACK_BH = 2200 / 4640, 3750 / 3300, 2 * np.pi / 1.2e-6 * 270e-9


def _random_stack(rng, h):
    v_b = rng.uniform(2500, 4500)
    return LayerStack(
        rho=rng.uniform(2000, 8000),
        v_b=v_b,
        rho_p=rng.uniform(1500, 20000),
        v_b_p=v_b * rng.uniform(1.05, 2.0),
        rho_pp=rng.uniform(1500, 8000),
        v_b_pp=rng.uniform(1000, 6000),
        h=h,
        beta=2 * np.pi / rng.uniform(0.5e-6, 5e-6),
        k2=rng.uniform(0.05, 0.9),
    )


def _brute_boundary(a, x, y, k2, bh, n=4001):
    """Largest feasible ``b`` by scanning the inequality then bisecting the crossing."""
    b = np.linspace(0, y, n)[:-1]
    feasible = existence_lhs(a, b, x, y, bh) >= k2
    if feasible.all():
        return np.inf
    if not feasible[0]:
        return 0.0
    k = np.argmin(feasible)
    return brentq(lambda u: existence_lhs(a, u, x, y, bh) - k2, b[k - 1], b[k], xtol=1e-14)


def test_criterion_3_dispersion():
    c = Criterion("3", 30.0)
    rng = np.random.default_rng(3)

    # (a) h = 0 reduces to the single-overlayer form
    worst = 0.0
    for _ in range(100):
        s = _random_stack(rng, 0.0)
        v = rng.uniform(0.3, 0.999) * min(s.v_b, s.v_b_p)
        ref = delta_single_overlayer(v, s)
        worst = max(worst, abs(delta_v(v, s) / ref - 1))
    c.check("(a) h=0 single overlayer", worst <= 1e-12, f"{worst:.1e}")

    # (b) real tan/tanh branches against the complex-continued form
    worst = 0.0
    for _ in range(200):
        s = _random_stack(rng, rng.uniform(0, 1e-6))
        v = rng.uniform(0.3, 0.999) * s.v_b_p
        ref = delta_v_complex(v, s)
        worst = max(worst, abs(delta_v(v, s) - ref) / max(1.0, abs(ref)))
    c.check("(b) branch vs complex form", worst <= 1e-10, f"{worst:.1e}")

    # (c) closed form against a brute-force scan of the inequality on a 50x50 grid
    worst_b, misclassified = 0.0, 0
    cases = [(0.3, STACK_BH), (0.4, STACK_BH), (0.3, 0.5), (0.35, 2.5)]
    a_grid = np.linspace(0.1, 3.0, 50)
    b_grid = np.linspace(0.01, 0.999 * STACK_Y, 50)
    for k2, bh in cases:
        closed = existence_boundary(a_grid, STACK_X, STACK_Y, k2, bh)
        brute = np.array([_brute_boundary(a, STACK_X, STACK_Y, k2, bh) for a in a_grid])
        both = np.isfinite(closed) & np.isfinite(brute)
        worst_b = max(worst_b, float(np.max(np.abs(closed[both] - brute[both]), initial=0)))
        misclassified += int(np.sum(np.isfinite(closed) != np.isfinite(brute)))
        aa, bb = np.meshgrid(a_grid, b_grid, indexing="ij")
        scan = existence_lhs(aa, bb, STACK_X, STACK_Y, bh) >= k2
        pred = bb <= closed[:, None]
        near = np.abs(bb - closed[:, None]) <= 1e-4
        misclassified += int(np.sum((scan != pred) & ~near))
    c.check("(c) closed form vs scan", worst_b <= 1e-4 and misclassified == 0,
            f"max |db| {worst_b:.1e}, {misclassified} misclassified")

    # (d) monotonicity on the plotted family (K^2 in 0.3..0.5, a in 0.1..3)
    a_fine = np.linspace(0.1, 3.0, 59)
    bhs = np.linspace(0.25, 4.0, 16)
    k2s = np.linspace(0.30, 0.50, 9)
    grid = np.array([[existence_boundary(a_fine, STACK_X, STACK_Y, k2, bh) for bh in bhs] for k2 in k2s])
    d_bh = np.diff(grid, axis=1)
    d_k2 = np.diff(grid, axis=0)
    c.check("(d) non-increasing in beta*h", np.all(d_bh <= 1e-12), f"max step {d_bh.max():.2e}")
    c.check("(d) non-decreasing in K^2", np.all(d_k2 >= -1e-12),
            f"min step {d_k2.min():.3f}; {int(np.sum(d_k2 < -1e-12))}/{d_k2.size} steps decrease")
    c.finish()


# -- 4 -----------------------------------------------------------------------


def test_criterion_4_mbvd():
    c = Criterion("4", 60.0)
    rng = np.random.default_rng(2024)

    p = make_device()
    f = np.linspace(0.8 * p.f_s, 1.3 * p.f_s, 10_000)
    worst = max(
        np.max(np.abs(power_budget_oneport(p, 50.0, f).total - 1)),
        np.max(np.abs(power_budget_twoport(p, 50.0, f, "series").total - 1)),
        np.max(np.abs(power_budget_twoport(p, 50.0, f, "shunt").total - 1)),
    )
    c.check("budget conservation", worst <= 1e-9, f"{worst:.1e}")

    worst_clean = 0.0
    for _ in range(50):
        q = random_device(rng)
        fq = fit_grid(q, 4001)
        fit, _ = fit_mbvd(admittance_sweep(q, fq))
        worst_clean = max(worst_clean, np.max(np.abs(fit.as_array() / q.as_array() - 1)))
    c.check("noiseless fit", worst_clean <= 1e-6, f"{worst_clean:.1e}")

    worst_noisy = 0.0
    for _ in range(50):
        q = random_device(rng)
        fq = fit_grid(q)
        y = add_noise(admittance_sweep(q, fq).values, rng, 0.01)
        fit, _ = fit_mbvd(FrequencySweep(fq, y))
        worst_noisy = max(worst_noisy, np.max(np.abs(fit.as_array() / q.as_array() - 1)))
    c.check("1% noise fit", worst_noisy <= 0.01, f"{worst_noisy:.4f}")

    peaks_ok = True
    for _ in range(20):
        q = make_device(
            f_s=rng.uniform(1e9, 4e9), c_0=rng.uniform(0.5e-12, 2e-12), ratio=rng.uniform(0.05, 0.2),
            q=rng.uniform(1000, 3000), r_s=rng.uniform(0.05, 0.5), r_0=rng.uniform(0.1, 1.0),
        )
        fq = np.linspace(0.95 * q.f_s, 1.15 * q.f_s, 40001)
        f_r, f_a = find_resonances(admittance_sweep(q, fq))
        f2 = fq[np.argmax(power_budget_twoport(q, 50.0, fq, "series").dissipated)]
        f1 = fq[np.argmax(power_budget_oneport(q, 50.0, fq).dissipated)]
        peaks_ok &= f_r < f2 <= f_a and abs(f1 - f_r) <= f_a - f_r
    c.check("dissipation peak locations", peaks_ok)

    worst_z = 0.0
    for topology in ("series", "shunt"):
        z = mbvd_impedance(p, f)
        g = gamma_from_s21(f, twoport_s(z, 50.0, topology)[1], topology, 50.0)
        worst_z = max(worst_z, np.max(np.abs(g.z - z) / np.abs(z)))
    c.check("gamma_from_s21 round trip", worst_z <= 1e-12, f"{worst_z:.1e}")
    c.finish()


# -- 5 -----------------------------------------------------------------------


def test_criterion_5_metrics():
    c = Criterion("5", 5.0)
    r = np.linspace(1e-4, 1 - 1e-4, 2001)
    k = np.array([kt2(ri, 1.0) for ri in r])
    c.check("kt2 limits", abs(kt2(1e-9, 1.0) - 1) < 1e-12 and kt2(1 - 1e-12, 1.0) < 1e-11)
    c.check("kt2 decreasing in f_r/f_a", np.all(np.diff(k) < 0))
    inv = max(abs(kt2(1.0, fa_from_kt2(v, 1.0)) / v - 1) for v in np.linspace(0.01, 0.99, 50))
    c.check("kt2 inversion", inv < 1e-9, f"{inv:.1e}")

    f0, l, z0 = 1e9, 1e-6, 50.0
    cap = 1 / ((2 * np.pi * f0) ** 2 * l)
    fq = np.linspace(0.99 * f0, 1.01 * f0, 20001)
    w = 2 * np.pi * fq
    worst = 0.0
    for res in (0.5, 2.0, 10.0):
        z = res + 1j * w * l + 1 / (1j * w * cap)
        qb = bode_q(NetworkData.from_arrays(fq, (z - z0) / (z + z0), z0)).q_max()
        worst = max(worst, abs(qb / (2 * np.pi * f0 * l / res) - 1))
    c.check("Bode-Q series RLC", worst <= 0.01, f"{worst:.1e}")

    worst = 0.0
    for q in (50.0, 300.0, 2000.0):
        fl = np.linspace(f0 * (1 - 10 / q), f0 * (1 + 10 / q), 40001)
        y = 1 / (1 + 2j * q * (fl - f0) / f0)
        worst = max(worst, abs(q3db(FrequencySweep(fl, y), f0) / q - 1))
    c.check("q3db Lorentzian", worst <= 1e-3, f"{worst:.1e}")

    p = make_device()
    fd = np.linspace(2.2e9, 2.8e9, 3001)
    y = admittance_sweep(p, fd).values
    f_r, f_a = find_resonances(FrequencySweep(fd, y))
    worst = 0.0
    for kf, ky in [(1e-3, 1.0), (7.3, 1e-4), (1e3, 55.0)]:
        g_r, g_a = find_resonances(FrequencySweep(fd * kf, y * ky))
        worst = max(worst, abs(g_r / (kf * f_r) - 1), abs(g_a / (kf * f_a) - 1))
    c.check("find_resonances scaling", worst < 1e-12, f"{worst:.1e}")
    c.finish()


# -- 6 -----------------------------------------------------------------------


def test_criterion_6_stoney():
    c = Criterion("6", 5.0)
    geo = StoneyGeometry(t_f=2e-6)
    x = np.linspace(-0.04, 0.04, 801)
    flat = ProfileTrace(x, np.zeros_like(x))
    for r0 in (50.0, 337.0, 1000.0):
        got = trace_stress(differential_profile(flat, ProfileTrace(x, x**2 / (2 * r0))), geo).mean
        want = geo.biaxial_modulus * geo.t_s**2 / (6 * r0 * geo.t_f)
        c.check(f"R0={r0:g} m", abs(got / want - 1) <= 0.01, f"{abs(got / want - 1):.1e}")
    c.check("flat -> 0", trace_stress(differential_profile(flat, flat), geo).mean == 0)
    # inliers at the normal quantiles of a 2 MPa spread, outliers planted at positions 1 and 7
    inliers = 50e6 + 2e6 * norm.ppf((np.arange(7) + 0.5) / 7)
    means = np.insert(inliers, [1, 6], [120e6, -20e6])
    res = aggregate([TraceStress(m, 6e6, 337.0, f"t{i}") for i, m in enumerate(means)])
    flagged = [i for i, e in enumerate(res.excluded) if e]
    c.check("2 planted outliers", flagged == [1, 7], f"excluded {flagged}")
    c.finish()


# -- 7 -----------------------------------------------------------------------


def _config(r_th, levels, tcf=NEG_TCF, window=(FLANK_TONE, FLANK_TONE)):
    lad = PowerLadder(tuple((float(l), 300.0) for l in levels))
    return RunawayConfig(make_device(), TcfFit(*tcf), r_th, 25.0, window, lad)


def test_criterion_7_runaway():
    c = Criterion("7", 30.0)

    t0 = [r.t_steady for r in simulate_runaway(_config(0.0, [15, 20, 25, 30]))]
    c.check("r_th = 0 gives ambient", max(abs(t - 25.0) for t in t0) <= 1e-6)

    cfg = _config(400.0, [15, 20, 25, 30], tcf=(0.0, 0.0))
    worst = 0.0
    for r in simulate_runaway(cfg):
        _, p_d = dissipated_power(cfg, float(dbm_to_watts(r.level_dbm)), 25.0)
        worst = max(worst, abs(r.t_steady - (25.0 + 400.0 * p_d)))
    c.check("zero-TCF closed form", worst <= 1e-6, f"{worst:.1e} C")

    f_pk = 2.5264e9
    window = (f_pk - 20e6, f_pk + 5e6)
    r_ths = np.linspace(0, 1000, 10)
    levels = np.linspace(15, 28, 10)
    table = np.array(
        [[simulate_runaway(_config(rt, [lv], window=window))[0].t_steady for lv in levels] for rt in r_ths]
    )
    c.check("monotone in r_th", np.all(np.diff(table, axis=0) >= 0))
    c.check("monotone in power", np.all(np.diff(table, axis=1) >= 0))

    hot_cfg = _config(400.0, [30])
    hot = simulate_runaway(hot_cfg)[0].t_steady
    cold = simulate_runaway(_config(400.0, [30], tcf=(0.0, 0.0)))[0].t_steady
    p_in = float(dbm_to_watts(30))

    def g(t):
        return 25.0 + 400.0 * dissipated_power(hot_cfg, p_in, t)[1] - t

    grid = np.linspace(25.0, 300.0, 5501)
    vals = np.array([g(t) for t in grid])
    k = np.nonzero(np.sign(vals[:-1]) != np.sign(vals[1:]))[0][0]
    oracle = brentq(g, grid[k], grid[k + 1], xtol=1e-10)
    c.check("self-amplification", hot > cold and abs(hot - oracle) <= 1e-3,
            f"T={hot:.3f} vs zero-TCF {cold:.3f}, oracle {oracle:.3f}")
    c.finish()


# -- 8 -----------------------------------------------------------------------


def _random_network(rng):
    ports = int(rng.integers(1, 3))
    n = int(rng.integers(1, 60))
    f = np.cumsum(rng.uniform(1e3, 5e7, n)) + rng.uniform(1e6, 1e10)
    shape = (n,) if ports == 1 else (n, 2, 2)
    mag = rng.uniform(1e-4, 1.0, shape)
    s = mag * np.exp(1j * rng.uniform(-np.pi, np.pi, shape))
    return NetworkData.from_arrays(f, s, float(rng.choice([25.0, 50.0, 75.0])))


def test_criterion_8_touchstone():
    c = Criterion("8", 10.0)
    rng = np.random.default_rng(8)
    worst_id, worst_x, text_stable = 0.0, 0.0, True
    for _ in range(200):
        net = _random_network(rng)
        unit = str(rng.choice(["HZ", "KHZ", "MHZ", "GHZ"]))
        parsed = {}
        for fmt in ("RI", "MA", "DB"):
            text = write_touchstone(net, unit=unit, fmt=fmt)
            back = parse_touchstone(text)
            worst_id = max(
                worst_id,
                float(np.max(np.abs(back.f / net.f - 1))),
                float(np.max(np.abs(back.s - net.s))),
            )
            text_stable &= write_touchstone(back, unit=unit, fmt=fmt) == text or fmt != "RI"
            parsed[fmt] = back.s
        worst_x = max(
            worst_x,
            float(np.max(np.abs(parsed["RI"] - parsed["MA"]))),
            float(np.max(np.abs(parsed["RI"] - parsed["DB"]))),
        )
    c.check("parse(write) identity", worst_id <= 1e-12, f"{worst_id:.1e}")
    c.check("RI text fixed point", text_stable)
    c.check("RI/MA/DB agreement", worst_x <= 1e-12, f"{worst_x:.1e}")
    c.finish()


if __name__ == "__main__":
    for name, fn in sorted(globals().items()):
        if name.startswith("test_criterion_"):
            try:
                fn()
            except AssertionError:
                pass
