"""Acceptance criteria, one test each.

Every test prints a single ``PASS``/``FAIL`` line before asserting, so
``pytest tests/test_acceptance.py -s`` gives a readable scorecard.
"""
import math
import time

import numpy as np

from nlqm import scenarios
from nlqm.cli import main
from nlqm.config import bundled_config, bundled_names, load
from nlqm.dynamics import Stepper
from nlqm.hamiltonians import HamiltonianSpec, Nonlinear
from nlqm.observables import ehrenfest_residual, moments
from nlqm.verify import INJECTIONS
from nlqm.wavefield import GridSpec, cat_state, product_superposition_state


def _bundled(name):
    return load(bundled_config(name), natural=True).scenario


def _report(tag, ok, detail, started, budget_s):
    elapsed = time.perf_counter() - started
    ok = ok and elapsed < budget_s
    print(f"\n{'PASS' if ok else 'FAIL'} {tag}: {detail}; {elapsed:.1f}s (budget {budget_s:g}s)")
    assert ok, detail


def _distance(a, b, grid):
    return float(np.sqrt(np.sum(np.abs(a - b) ** 2) * grid.cell_volume))


def test_c1_estimates():
    t0 = time.perf_counter()
    expected = {"cat_final": 1e16, "pointer_initial": 1e-13, "hydrogen": 1e-51, "thermal_correlation": 1e4}
    parts, ok = [], True
    for kind, ref in expected.items():
        rep = scenarios.paper_estimates(kind)
        good = scenarios.same_order(rep.value, ref)
        ok &= good
        parts.append(f"{kind}={rep.value:.3g}")
    ratio = scenarios.paper_estimates("hydrogen").extras["ratio_to_ground_state"]
    ok &= scenarios.same_order(ratio, 1e-32)
    parts.append(f"hydrogen_ratio={ratio:.3g}")
    _report("C1 estimates", ok, ", ".join(parts), t0, 1.0)


def test_c2_dispersion_scaling():
    t0 = time.perf_counter()
    r, R = 0.1, 2.0
    worst = 0.0
    for N in (1, 2, 3):
        grid = GridSpec.uniform(N, -3, 3, 256)
        d_cat = moments(cat_state(grid, N, r, R)).D_N
        d_prod = moments(product_superposition_state(grid, N, r, R)).D_N
        worst = max(worst, abs(d_cat / (R**2 + r**2 / N) - 1), abs(d_prod / ((R**2 + r**2) / N) - 1))
    _report("C2 dispersion scaling", worst < 1e-4, f"max relative error {worst:.2e} (tol 1e-4)", t0, 30.0)


def test_c3_conservation():
    t0 = time.perf_counter()
    cfg = _bundled("cat_free")
    assert cfg.integrator.n_steps == 10_000 and cfg.integrator.method == "split" and cfg.w > 0
    rec = scenarios.run(cfg)
    dE, dn = rec.relative_drift("E_total"), rec.relative_drift("norm_sq")
    pair = scenarios.run(_bundled("pair_bound"))
    dP = pair.relative_drift("P")
    ok = rec.status == "completed" and pair.status == "completed" and dE < 1e-6 and dn < 1e-10 and dP < 1e-8
    _report("C3 conservation", ok,
            f"energy {dE:.2e} (tol 1e-6), norm {dn:.2e} (tol 1e-10), momentum {dP:.2e} (tol 1e-8)", t0, 300.0)


def test_c4_ehrenfest():
    t0 = time.perf_counter()
    base = _bundled("harmonic")
    assert base.w > 0
    recs = []
    for cfg in (base.with_param("w", 0.0), base):
        recs.append(scenarios.run(cfg, keep_fields=True))
    t = recs[0].column("t")
    # oscillator with m = omega = 1, X(0) = 1, P(0) = 0
    oracle = np.cos(t)
    errs = [np.max(np.abs(r.column("X") - oracle)) / np.max(np.abs(oracle)) for r in recs]
    diff = float(np.max(np.abs(recs[0].column("X") - recs[1].column("X"))))

    cubic = _bundled("cubic")
    _, ham, _ = scenarios.build(cubic)
    rec = scenarios.run(cubic, keep_fields=True)
    c = cubic.hamiltonian.potentials[0].c
    rep = ehrenfest_residual(rec, ham, rec.fields)
    naive_gap = float(np.max(np.abs(rep.naive + 3 * c * rep.L2)))
    corrected = float(np.max(np.abs(rep.corrected)) / rep.scale)
    ok = max(errs) < 1e-5 and diff < 1e-6 and naive_gap < 1e-4 and corrected < 1e-4
    _report("C4 Ehrenfest", ok,
            f"oracle error w=0 {errs[0]:.2e} w={base.w:g} {errs[1]:.2e} (tol 1e-5), difference {diff:.2e} (tol 1e-6), "
            f"|naive + 3cL^2| {naive_gap:.2e} (tol 1e-4), corrected/scale {corrected:.2e} (tol 1e-4)", t0, 120.0)


def test_c5_cat_blocking():
    t0 = time.perf_counter()
    cfg = _bundled("double_well")
    values = list(10.0 ** np.linspace(-2.5, 1.5, 17))
    res = scenarios.sweep(cfg, "w", values)
    decades = math.log10(values[-1] / values[0])
    completed = all(r.status == "completed" for r in res.rows)
    bound = all(r.bound_ok for r in res.rows)
    ratio = res.w_at_transition / res.w_estimate if res.transition else float("nan")
    ok = (decades >= 4 and completed and bound and res.monotone and res.transition is not None
          and 1 / 3 <= ratio <= 3)
    flags = "".join("B" if r.blocked else "." for r in res.rows)
    _report("C5 cat blocking", ok,
            f"{decades:g} decades, blocked pattern {flags}, monotone {res.monotone}, bound held {bound}, "
            f"transition w {res.w_at_transition:.3g} vs estimate {res.w_estimate:.3g} (ratio {ratio:.2f})",
            t0, 600.0)


def test_c6_correlation_model():
    t0 = time.perf_counter()
    f1, eta, eps, L = 1.0, 0.03, 0.01, 1.0
    rep = scenarios.correlation_model(f1, eta, eps, L, n=10_000)
    gap = abs(rep.C2_quadrature - rep.C2_closed)
    ratio_exact = rep.f1 / rep.f2 == (eta - eps) / eps
    ok = gap < 1e-6 and abs(rep.zero_mean_residual) < 1e-8 and ratio_exact
    _report("C6 correlation model", ok,
            f"C2 quadrature {rep.C2_quadrature:.6e} vs L f1 eps/6 = {rep.C2_closed:.6e} "
            f"(|gap| {gap:.2e}, tol 1e-6; exact flat-density value {rep.C2_exact:.6e}), "
            f"zero-mean residual {rep.zero_mean_residual:.1e} (tol 1e-8), f1/f2 exact {ratio_exact}", t0, 10.0)


def test_c7_cross_method():
    t0 = time.perf_counter()
    parts, worst = [], 0.0
    for name in bundled_names():
        cfg = _bundled(name)
        field0, ham, _ = scenarios.build(cfg)
        psi, spin, dt = np.array(field0.amplitudes), field0.spin_components, cfg.integrator.dt
        a = Stepper(ham, cfg.grid, spin, dt, "rk4").run(psi, 100)
        b = Stepper(ham, cfg.grid, spin, dt, "split").run(psi, 100)
        d = _distance(a, b, cfg.grid)
        worst = max(worst, d)
        parts.append(f"{name} {d:.1e}")

    grid = GridSpec.uniform(2, -10, 10, 64)
    ham = HamiltonianSpec((1.0, 1.0), 1.0, (), Nonlinear("position", 0.5))
    psi0, T = np.array(cat_state(grid, 2, 0.5, 2.0).amplitudes), 0.2
    ref = Stepper(ham, grid, 1, T / 800, "rk4").run(psi0, 800)
    e1, e2 = (_distance(Stepper(ham, grid, 1, T / n, "rk4").run(psi0, n), ref, grid) for n in (50, 100))
    order = e1 / e2
    ok = worst < 1e-5 and abs(order / 16 - 1) <= 0.2
    _report("C7 cross-method", ok, f"distances {', '.join(parts)} (tol 1e-5); rk4 halving ratio {order:.2f}",
            t0, 180.0)


def test_c8_verify_and_determinism(tmp_path, capsys):
    t0 = time.perf_counter()
    codes = {"clean": main(["verify"])}
    for name in INJECTIONS:
        codes[name] = main(["verify", "--inject", name])
    capsys.readouterr()
    outs = [tmp_path / "a", tmp_path / "b"]
    sim = [main(["simulate", "--config", "double_well", "--natural-units", "--plot", "--out", str(o)]) for o in outs]
    same = all((outs[0] / n).read_bytes() == (outs[1] / n).read_bytes()
               for n in ("double_well.csv", "summary.csv", "double_well.svg"))
    ok = codes["clean"] == 0 and all(codes[n] == 4 for n in INJECTIONS) and sim == [0, 0] and same
    with capsys.disabled():
        _report("C8 verify and determinism", ok,
                f"exit codes {codes}, simulate byte-identical {same}", t0, float("inf"))
