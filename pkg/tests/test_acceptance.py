"""Acceptance suite: one PASS/FAIL line per criterion.

Each test prints a single line of the form ``PASS criterion N: ...`` (or
``FAIL``) with the measured quantities, then asserts the criterion. Timings are
taken after a warm-up that compiles every field used here.
"""
import itertools
import math
import os
import subprocess
import sys
import time
from concurrent.futures import ThreadPoolExecutor

import numpy as np
import pytest

from canardkit import canard_formulas as cf
from canardkit import cli, models, slowfast
from canardkit.numerics import IntegratorConfig, Section, integrate, integrate_stiff

TESTS = os.path.dirname(os.path.abspath(__file__))


def report(capsys, number, ok, detail):
    with capsys.disabled():
        print(f"\n{'PASS' if ok else 'FAIL'} criterion {number}: {detail}")
    assert ok, detail


@pytest.fixture(scope="module", autouse=True)
def warm_up():
    """Compile every field and the march kernel outside the timed sections."""
    cfg = IntegratorConfig(step=1e-3, max_time=1e-2)
    systems = [models.transcritical1d(), models.dtc(coords="strip"), models.dtcp(),
               models.dtcbb(models.DtcbbParams(0.5, 5.0, 2.0), coords="compact"),
               models.dtcbnl(), models.tritrophic()]
    for s in systems:
        integrate(s, s.initial(np.full(s.dim, 1e-3)), cfg, [Section(0, 0.5)])


# ------------------------------------------------------------- 1

def test_criterion_1_bernoulli_delay_bound(capsys):
    x0, y0, eps = 0.05, 1.0, 0.1
    sys_ = models.transcritical1d(models.Transcritical1dParams(eps))
    t0 = time.perf_counter()
    traj, _ = integrate(sys_, [x0, y0], IntegratorConfig(step=1e-4, max_time=20.0, record_stride=100))
    exact, _ = models.bernoulli_exact_series(traj.t, x0, y0, eps)
    wall = time.perf_counter() - t0
    x = traj["x"]
    rel = float(np.max(np.abs(x - exact) / np.abs(exact)))
    cs = (1.0, 1.25, 1.5, 1.75, 2.0)
    at_c = [float(np.interp(c * y0 / eps, traj.t, x)) for c in cs]
    ok = all(v < 2 * x0 for v in at_c) and rel <= 1e-6 and wall < 1.0
    report(capsys, 1, ok, f"x(c y0/eps) = {', '.join(f'{v:.4g}' for v in at_c)} < {2 * x0}; "
           f"max rel diff closed form vs RK4 = {rel:.2e}; {wall:.2f} s")


# ------------------------------------------------------------- 2

def test_criterion_2_enhanced_delay(capsys):
    p = models.DtcParams(0.1)
    sc = models.dtc(p, coords="strip")
    t0 = time.perf_counter()
    traj, _ = integrate(sc, sc.initial([1e-3, 0.0]),
                        IntegratorConfig(step=1e-5, max_time=800.0, record_stride=100))
    traj = sc.physical(traj)
    out = {}
    for br in slowfast.critical_set(models.dtc(p), (-20.0, 20.0), 401):
        if br.label in ("x=-1", "x=+1"):
            out[br.label] = [r.duration for r in slowfast.measure_delays(traj, br, 0.05) if r.complete][:3]
    wall = time.perf_counter() - t0
    ok = wall < 30.0 and all(len(d) == 3 and d[0] < d[1] < d[2] for d in out.values()) and len(out) == 2
    report(capsys, 2, ok, "; ".join(f"{k}: {', '.join(f'{v:.2f}' for v in d)}" for k, d in out.items())
           + f"; {wall:.1f} s")


# ------------------------------------------------------------- 3

def _exterior(start, ts):
    ext = models.dtc(models.DtcParams(0.1), coords="exterior")
    traj = integrate_stiff(lambda t, u: ext.field(u, t), ext.initial(start), (ts[0], ts[-1]), ts,
                           jac=lambda t, u: ext.jac(u), coords=ext.coords)
    return slowfast.asymptote_distance(traj)


def test_criterion_3_exterior_asymptotics(capsys):
    ts = np.array([0.0, 20.0, 200.0])
    t0 = time.perf_counter()
    ratios = {s: d[2] / d[1] for s in ((2.0, 0.0), (-3.0, 0.0), (3.0, 0.0)) for d in [_exterior(s, ts)]}
    wall = time.perf_counter() - t0
    ok = all(r < 0.1 for r in ratios.values()) and wall < 10.0
    report(capsys, 3, ok, "; ".join(f"{s}: d(200)/d(20) = {r:.2e}" for s, r in ratios.items())
           + f"; {wall:.2f} s")


def test_criterion_3_strip_start_is_outside_its_scope():
    # (0, 3) has |x0| < 1: it stays in the strip and keeps oscillating between the
    # lines x = -1 and x = +1 instead of settling on y = x
    sc = models.dtc(models.DtcParams(0.1), coords="strip")
    traj, _ = integrate(sc, sc.initial([0.0, 3.0]), IntegratorConfig(step=1e-4, max_time=200.0, record_stride=100))
    d = slowfast.asymptote_distance(sc.physical(traj))
    i20 = int(np.searchsorted(traj.t, 20.0))
    assert d[-1] > 0.1 * d[i20]


# ------------------------------------------------------------- 4

def test_criterion_4_structural_instability(capsys):
    cfg = dict(cli.load_presets()["presets"]["fig3"], name="fig3")
    rep = cli.perturbation_report(cli.run_trajectory(cfg))
    ok = rep["exited"] and rep["max_perturbation"] < 3e-3 and rep["oscillations_at_exit"] <= 5
    where = f"exit at t = {rep['exit_time']:.4g}" if rep["exited"] else "no strip exit"
    report(capsys, 4, ok, f"{where}; max |alpha n| = {rep['max_perturbation']:.2e} < 3e-3; "
           f"oscillations at exit = {rep['oscillations_at_exit']} <= 5")


# ------------------------------------------------------------- 5

def _graphic_entries(a, step):
    p = models.DtcbbParams(0.5, a, 2.0)
    sc = models.dtcbb(p, coords="compact")
    traj, _ = integrate(sc, sc.initial([1e-3, 0.0]),
                        IntegratorConfig(step=step, max_time=200.0, record_stride=max(1, round(1e-3 / step))))
    traj = sc.physical(traj)
    x, y = traj["x"], traj["y"]
    entries = {}
    for name, v in (("x=-1", x + 1), ("x=+1", x - 1), ("y=-b", y + p.b), ("y=a", y - a)):
        near = np.abs(v) < 0.05
        entries[name] = float(traj.t[np.argmax(near)]) if near.any() else math.inf
    return entries


def test_criterion_5_graphic_approach(capsys):
    t0 = time.perf_counter()
    found = {a: _graphic_entries(a, 1e-5) for a in (5.0, 30.0)}
    wall = time.perf_counter() - t0
    ok = wall < 60.0 and all(t <= 200.0 for e in found.values() for t in e.values())
    report(capsys, 5, ok, "; ".join(f"a={a:g}: " + ", ".join(f"{k} at t={t:.2f}" for k, t in e.items())
                                     for a, e in found.items()) + f"; step 1e-5, {wall:.1f} s")


@pytest.mark.slow
@pytest.mark.parametrize("a", [5.0, 30.0])
def test_criterion_5_step_equivalence(a):
    # the 1e-5 run reaches each neighbourhood at the same sampled time as the 1e-6 run
    coarse, fine = _graphic_entries(a, 1e-5), _graphic_entries(a, 1e-6)
    for k in coarse:
        assert abs(coarse[k] - fine[k]) <= 1e-3 + 1e-9, (k, coarse[k], fine[k])


# ------------------------------------------------------------- 6

ENTRY = cf.EntryParams(C=0.1, k=0.5)
EPS_LADDER = (0.1, 0.05, 0.025)
GRID = [(b, f * (b - 1.0), e) for b, f, e in
        itertools.product((1.5, 2.0, 3.0), (0.25, 0.5, 1.0), EPS_LADDER)]


def _three_way(point):
    b, d, e = point
    s = cf.TransitionSetup(b, d, 0.1, e)
    T = cf.transition_time_exact(s, ENTRY)
    T_root = cf.transition_time_root(s, ENTRY)
    Y = cf.exit_value_exact(s, ENTRY)
    sys_ = models.dtcbnl(models.DtcbnlParams(b, e))
    out = Section(0, s.eta, "increasing", bounds={1: (0.0, d)})
    inn = Section(1, d, "either", bounds={0: (0.0, s.eta)})
    rec = slowfast.numeric_transition_map(sys_, (ENTRY.x0(e), d), out,
                                          IntegratorConfig(step=1e-6, max_time=2 * T + 10,
                                                           record_stride=10 ** 6), inn)
    return abs(T - T_root) / T, abs(T - rec.time) / T, abs(Y - rec.exit[1]) / d


def test_criterion_6_transition_three_way(capsys):
    t0 = time.perf_counter()
    with ThreadPoolExecutor(max_workers=os.cpu_count() or 1) as pool:
        rows = list(pool.map(_three_way, GRID))
    wall = time.perf_counter() - t0
    root, sim, yout = (max(r[i] for r in rows) for i in range(3))
    ok = root <= 1e-9 and sim <= 1e-3 and yout <= 1e-3 and wall < 60.0
    report(capsys, 6, ok, f"{len(rows)} points; max |T-T_root|/T = {root:.1e}, "
           f"max |T-T_sim|/T = {sim:.1e}, max |Y-Y_sim|/delta = {yout:.1e}; {wall:.1f} s")


# ------------------------------------------------------------- 7

ORDER_CASES = [(cf.TransitionSetup(2.0, 0.5, 0.05, 0.1), ENTRY),
               (cf.TransitionSetup(2.0, 0.5, 0.1, 0.1), cf.EntryParams(C=0.02, k=0.5)),
               (cf.TransitionSetup(3.0, 1.0, 0.01, 0.1), cf.EntryParams(C=1.0, k=0.8))]


def _bounded(seq):
    """Non-growing as eps halves: increments contract and nothing exceeds the first value by 10%."""
    a = [abs(v) for v in seq]
    return max(a) <= 1.1 * a[0] and abs(seq[2] - seq[1]) <= 0.75 * abs(seq[1] - seq[0])


def test_criterion_7_asymptotic_orders(capsys):
    lines, ok = [], True
    for setup, entry in ORDER_CASES:
        ss = [setup.with_epsilon(e) for e in EPS_LADDER]
        dT = [cf.transition_time_exact(s, entry) - cf.transition_time_leading(s, entry.k) for s in ss]
        dY = [(cf.exit_value_exact(s, entry) - cf.exit_value_leading(s, entry.k)) / s.epsilon for s in ss]
        ok &= _bounded(dT) and _bounded(dY)
        lines.append("dT " + "/".join(f"{v:.4f}" for v in dT) + ", dY/eps " + "/".join(f"{v:.4f}" for v in dY))
    report(capsys, 7, ok, "; ".join(lines))


# ------------------------------------------------------------- 8

def _types(z):
    return sorted(c for _, c in slowfast.tritrophic_fast_equilibria(models.TABLE_PARAMS, z))


def test_criterion_8_tritrophic_bifurcations(capsys):
    p = models.TABLE_PARAMS
    zT_formula = models.z_T(p)
    pts = {b.kind: b.slow_value for b in slowfast.find_bifurcations_tritrophic(p)}
    zT, zH, zP = pts["saddle-node-transcritical"], pts["hopf"], pts["saddle-node"]
    eig = np.sort(np.linalg.eigvals(models.jacobian_tritrophic(np.array([1.0, 0.0, 0.0]), p)).real)
    eig_ok = np.max(np.abs(eig - np.array([-1.0, -0.1, 0.06]))) <= 1e-8
    h = 1e-4
    flips = {
        "above z_P": _types(zP + h) == ["attracting-node"],
        "below z_P": len(_types(zP - h)) == 3 and "saddle" in _types(zP - h),
        "above z_H": _types(zH + h) == ["attracting-focus", "attracting-node", "saddle"],
        "below z_H": _types(zH - h) == ["attracting-node", "repelling-focus", "saddle"],
        "above z_T": _types(zT + h) == ["attracting-node", "repelling-focus", "saddle"],
        "below z_T": _types(zT - h) == ["repelling-focus", "saddle"]
        and dict(slowfast.tritrophic_fast_equilibria(p, zT - h))[(1.0, 0.0)] == "saddle",
    }
    ok = abs(zT_formula - 1 / 700) <= 1e-12 and zT < zH < zP and eig_ok and all(flips.values())
    bad = [k for k, v in flips.items() if not v]
    report(capsys, 8, ok, f"z_T = {zT_formula:.15g} (1/700), z_T < z_H < z_P = {zT:.6g} < {zH:.6g} < {zP:.6g}; "
           f"eigenvalues at (1,0,0) = {', '.join(f'{v:.10g}' for v in eig)}; "
           f"classification flips {'all as listed' if not bad else 'wrong: ' + ', '.join(bad)}")


# ------------------------------------------------------------- 9

@pytest.mark.slow
def test_criterion_9_bursting_cycles(capsys):
    cfg = dict(cli.load_presets()["presets"]["table23"], name="table23")
    t0 = time.perf_counter()
    res = cli.run_trajectory(cfg)
    wall = time.perf_counter() - t0
    seq = [ev.section_index for ev in res["events"]]
    # a full cycle: z decreasing through z_T, then z increasing through z_P
    cycles = sum(1 for a, b in zip(seq, seq[1:]) if (a, b) == (0, 1))
    # descents pass z_T close to the invariant line (1, 0, z)
    downs = [ev.state for ev in res["events"] if ev.section_index == 0][1:]
    near_delta = all(abs(s[0] - 1.0) < 0.05 and abs(s[1]) < 0.05 for s in downs)
    positive = bool(np.all(np.array(res["initial_state"]) > 0))
    ok = res["status"] in ("ok", "stopped") and cycles >= 2 and near_delta and positive and wall < 300.0
    report(capsys, 9, ok, f"crossings {''.join('TP'[i] for i in seq)}, {cycles} full cycles, "
           f"descents near (1,0,z): {near_delta}; {wall:.0f} s")


# ------------------------------------------------------------- 10

INVARIANTS = [
    "test_numerics.py::test_lambert_round_trip_grid",
    "test_numerics.py::test_lambert_defining_identity",
    "test_numerics.py::test_rk4_convergence_order",
    "test_models.py::test_invariant_set_exactness",
    "test_models.py::test_dtcbb_translation_conjugacy",
    "test_models.py::test_strip_coordinates_conjugacy",
    "test_models.py::test_compact_coordinates_conjugacy",
    "test_models.py::test_exterior_coordinates_conjugacy",
    "test_models.py::test_rescale_round_trip_and_conjugacy",
    "test_models.py::test_saddle_table_eigen_axes",
    "test_slowfast.py::test_critical_set_residuals_and_consistency",
    "test_canard_formulas.py::test_exit_value_identity",
    "test_canard_formulas.py::test_exit_value_leading_decreases_in_k",
]


def test_criterion_10_invariant_suites(capsys):
    ids = [os.path.join(TESTS, i) for i in INVARIANTS]
    run = subprocess.run([sys.executable, "-m", "pytest", "-q", "-p", "no:cacheprovider", *ids],
                         capture_output=True, text=True, cwd=os.path.dirname(TESTS))
    tail = run.stdout.strip().splitlines()[-1] if run.stdout.strip() else run.stderr.strip()
    ok = run.returncode == 0 and f"{len(INVARIANTS)} passed" in tail
    report(capsys, 10, ok, f"{len(INVARIANTS)} invariant tests: {tail}")
