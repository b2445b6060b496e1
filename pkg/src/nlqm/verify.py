"""Self-contained invariant suite behind ``nlqm verify``.

Every check builds its own small problem, measures a residual and compares
it with a fixed tolerance. ``inject`` switches on one deliberate fault so
that the negative path of the suite can itself be tested.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from . import scenarios
from .dynamics import IntegratorConfig, Stepper, evolve
from .hamiltonians import (
    DiscreteHamiltonian,
    ExternalPoly,
    HamiltonianSpec,
    Nonlinear,
    PairShortRange,
    h_nl,
)
from .observables import ehrenfest_residual, moments
from .wavefield import GridSpec, PacketSpec, cat_state, gaussian_packet, product_superposition_state

INJECTIONS = ("w_sign_flip", "norm_leak", "moment_bias", "estimate_scale")


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str

    def line(self) -> str:
        return f"{'PASS' if self.passed else 'FAIL'}  {self.name:<28} {self.detail}"


class _Faults:
    def __init__(self, inject: Optional[str]):
        if inject is not None and inject not in INJECTIONS:
            raise ValueError(f"unknown injection {inject!r}; choose from {INJECTIONS}")
        self.inject = inject

    def nonlinear(self, form: str, w: float, coords=None) -> Nonlinear:
        nl = Nonlinear(form, w, coords)
        if self.inject == "w_sign_flip":
            object.__setattr__(nl, "w", -w)
        return nl

    def moments(self, field, coords=None):
        mr = moments(field, coords)
        if self.inject == "moment_bias" and mr.C2 is not None:
            mr = dataclasses.replace(mr, C2=mr.C2 + 1e-6)
        return mr

    def step_hook(self, psi):
        return psi * (1 - 1e-9) if self.inject == "norm_leak" else psi

    def estimate_inputs(self, kind):
        w = scenarios.REFERENCE_INPUTS[kind]["w"]
        return {"w": w * 100} if self.inject == "estimate_scale" else {}


def _fmt(x: float) -> str:
    return f"{x:.3e}"


def check_estimates(f: _Faults) -> CheckResult:
    parts, ok = [], True
    for kind in scenarios.REFERENCE_INPUTS:
        rep = scenarios.paper_estimates(kind, **f.estimate_inputs(kind))
        match = scenarios.same_order(rep.value, scenarios.REFERENCE_VALUES[kind])
        ok &= match
        parts.append(f"{kind}={rep.value:.3g} J")
        if kind == "hydrogen":
            ratio = rep.extras["ratio_to_ground_state"]
            ok &= scenarios.same_order(ratio, scenarios.REFERENCE_VALUES["hydrogen_ratio"])
            parts.append(f"hydrogen_ratio={ratio:.3g}")
    return CheckResult("estimates", ok, " ".join(parts) + " (order of magnitude)")


def _small_states():
    g1 = GridSpec.uniform(1, -6, 6, 128)
    g2 = GridSpec.uniform(2, -6, 6, 64)
    yield gaussian_packet(g1, [PacketSpec(0.5, 0.6, 1.0)])
    yield product_superposition_state(g2, 2, 0.4, 2.0)
    yield cat_state(g2, 2, 0.4, 2.0)


def check_h_nl_nonnegative(f: _Faults) -> CheckResult:
    worst = math.inf
    for field in _small_states():
        ham = HamiltonianSpec((1.0,) * field.grid.ndim, 1.0, (), f.nonlinear("position", 0.5))
        worst = min(worst, h_nl(field, ham))
        ham = HamiltonianSpec((1.0,) * field.grid.ndim, 1.0, (), f.nonlinear("momentum", 0.5))
        worst = min(worst, h_nl(field, ham))
    return CheckResult("h_nl_nonnegative", worst >= 0, f"min h_nl={_fmt(worst)}")


def check_decomposition(f: _Faults) -> CheckResult:
    worst = 0.0
    for field in _small_states():
        mr = f.moments(field)
        if mr.C2 is None:
            continue
        N = mr.N
        worst = max(worst, abs(mr.D_N - ((1 - 1 / N) * mr.C2 + mr.L2 / N)))
    return CheckResult("decomposition_identity", worst < 1e-12, f"residual={_fmt(worst)} (tol 1e-12)")


def check_scaling(f: _Faults) -> CheckResult:
    r, R = 0.1, 2.0
    worst = 0.0
    for N, row in zip((1, 2, 3), scenarios.scaling_table((1, 2, 3), r, R)):
        grid = GridSpec.uniform(N, -3, 3, 128)
        dc = f.moments(cat_state(grid, N, r, R)).D_N
        dp = f.moments(product_superposition_state(grid, N, r, R)).D_N
        worst = max(worst, abs(dc - row.D_cat) / row.D_cat, abs(dp - row.D_product) / row.D_product)
    return CheckResult("scaling_vs_grid", worst < 1e-4, f"max rel={_fmt(worst)} (tol 1e-4)")


def _drifts(field, ham, dt, n_steps, f: _Faults):
    stepper = Stepper(ham, field.grid, field.spin_components, dt, "split")
    op = stepper.op
    psi = np.array(field.amplitudes)

    def measure(psi):
        e = sum(op.energies(psi))
        return op.norm_sq(psi), e, moments(field.replace(psi), hbar=ham.hbar).P_total

    n0, e0, p0 = measure(psi)
    dn = de = dp = 0.0
    for step in range(1, n_steps + 1):
        psi = f.step_hook(stepper(psi))
        if step % 100 == 0 or step == n_steps:
            n, e, p = measure(psi)
            dn, de, dp = max(dn, abs(n - n0) / n0), max(de, abs(e - e0) / abs(e0)), max(dp, abs(p - p0) / abs(p0) if p0 else abs(p))
    return dn, de, dp


def check_conservation(f: _Faults) -> CheckResult:
    grid = GridSpec.uniform(2, -10, 10, 64)
    field = cat_state(grid, 2, 0.5, 2.0)
    ham = HamiltonianSpec((1.0, 1.0), 1.0, (), f.nonlinear("position", 0.5))
    dn, de, _ = _drifts(field, ham, 1e-3, 1000, f)
    ok = dn < 1e-10 and de < 1e-6
    return CheckResult("conservation_norm_energy", ok,
                       f"norm={_fmt(dn)} (tol 1e-10) energy={_fmt(de)} (tol 1e-6)")


def check_momentum(f: _Faults) -> CheckResult:
    grid = GridSpec.uniform(2, -10, 10, 64)
    field = gaussian_packet(grid, [PacketSpec(-0.5, 0.5, 1.0), PacketSpec(0.5, 0.5, 1.0)])
    ham = HamiltonianSpec((1.0, 1.0), 1.0, (PairShortRange(1.0, 0.5),), f.nonlinear("position", 0.5))
    dn, _, dp = _drifts(field, ham, 1e-3, 1000, f)
    ok = dp < 1e-8 and dn < 1e-10
    return CheckResult("momentum_pair_forces", ok, f"momentum={_fmt(dp)} (tol 1e-8) norm={_fmt(dn)}")


def check_ehrenfest_harmonic(f: _Faults) -> CheckResult:
    grid = GridSpec.uniform(1, -10, 10, 256)
    field = gaussian_packet(grid, [PacketSpec(1.0, math.sqrt(0.5))])
    cfg = IntegratorConfig(dt=1e-3, t_end=2 * math.pi, sample_every=10, energy_drift=None)
    xs = []
    for w in (0.0, 0.2):
        ham = HamiltonianSpec((1.0,), 1.0, (ExternalPoly(b=0.5),), f.nonlinear("position", w))
        rec = evolve(field, ham, cfg)
        xs.append((rec.column("t"), rec.column("X")))
    t, x0 = xs[0]
    oracle = max(float(np.max(np.abs(x - np.cos(t)))) for _, x in xs)
    diff = float(np.max(np.abs(xs[0][1] - xs[1][1])))
    ok = oracle < 1e-5 and diff < 1e-6
    return CheckResult("ehrenfest_harmonic", ok,
                       f"vs classical={_fmt(oracle)} (tol 1e-5) w-difference={_fmt(diff)} (tol 1e-6)")


def check_ehrenfest_cubic(f: _Faults) -> CheckResult:
    grid = GridSpec.uniform(1, -12, 12, 256)
    field = gaussian_packet(grid, [PacketSpec(1.0, 0.5)])
    c = 0.05
    ham = HamiltonianSpec((1.0,), 1.0, (ExternalPoly(b=0.5, c=c),), f.nonlinear("position", 0.2))
    rec = evolve(field, ham, IntegratorConfig(1e-3, 2.0, sample_every=10, energy_drift=None), keep_fields=True)
    rep = ehrenfest_residual(rec, ham, rec.fields)
    structure = float(np.max(np.abs(rep.naive + 3 * c * rep.L2)))
    corrected = float(np.max(np.abs(rep.corrected))) / rep.scale
    ok = structure < 1e-4 and corrected < 1e-4
    return CheckResult("ehrenfest_cubic", ok,
                       f"|naive + 3cL2|={_fmt(structure)} (tol 1e-4) corrected/scale={_fmt(corrected)} (tol 1e-4)")


def check_correlation(f: _Faults) -> CheckResult:
    f1, eta, eps, L = 1.0, 0.03, 0.01, 1.0
    rep = scenarios.correlation_model(f1, eta, eps, L)
    ratio_err = abs(rep.f1 / rep.f2 - (eta - eps) / eps) / ((eta - eps) / eps)
    quad_err = abs(rep.C2_quadrature - rep.C2_exact)
    ok = abs(rep.zero_mean_residual) < 1e-8 and ratio_err < 1e-14 and quad_err < 1e-9
    return CheckResult(
        "correlation_model", ok,
        f"zero_mean={_fmt(rep.zero_mean_residual)} (tol 1e-8) ratio_err={_fmt(ratio_err)} "
        f"quadrature-exact={_fmt(quad_err)} (tol 1e-9) C2={rep.C2_quadrature:.6g} "
        f"[L f1 eps/6={rep.C2_closed:.6g}, info only]",
    )


def check_cross_method(f: _Faults) -> CheckResult:
    grid = GridSpec.uniform(1, -10, 10, 256)
    field = gaussian_packet(grid, [PacketSpec(1.0, 0.7)])
    ham = HamiltonianSpec((1.0,), 1.0, (ExternalPoly(b=0.5, c=0.05),), f.nonlinear("position", 0.5))
    psi = np.array(field.amplitudes)
    a = Stepper(ham, grid, 1, 1e-3, "rk4").run(psi, 100)
    b = Stepper(ham, grid, 1, 1e-3, "split").run(psi, 100)
    d = float(np.sqrt(np.sum(np.abs(a - b) ** 2) * grid.cell_volume))
    return CheckResult("rk4_vs_split", d < 1e-5, f"distance={_fmt(d)} (tol 1e-5)")


CHECKS: tuple[Callable[[_Faults], CheckResult], ...] = (
    check_estimates,
    check_h_nl_nonnegative,
    check_decomposition,
    check_scaling,
    check_conservation,
    check_momentum,
    check_ehrenfest_harmonic,
    check_ehrenfest_cubic,
    check_correlation,
    check_cross_method,
)


def run_suite(inject: Optional[str] = None, echo: Optional[Callable[[str], None]] = None) -> list[CheckResult]:
    faults = _Faults(inject)
    results = []
    for check in CHECKS:
        try:
            res = check(faults)
        except Exception as exc:  # a crashing check is a failing check
            res = CheckResult(check.__name__[6:], False, f"error: {exc}")
        results.append(res)
        if echo is not None:
            echo(res.line())
    return results
