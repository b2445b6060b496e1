import math

import numpy as np
import pytest

from nlqm.dynamics import IntegratorConfig, Stepper, default_dt, evolve, step_rk4, step_split
from nlqm.hamiltonians import ExternalPoly, HamiltonianSpec, Nonlinear, PairShortRange
from nlqm.observables import moments
from nlqm.wavefield import GridSpec, PacketSpec, cat_state, gaussian_packet, inner, norm_sq

G1 = GridSpec.uniform(1, -10, 10, 256)


def _distance(a, b, grid):
    return float(np.sqrt(np.sum(np.abs(a - b) ** 2) * grid.cell_volume))


def test_free_spreading_matches_closed_form():
    grid = GridSpec.uniform(1, -40, 40, 512)
    sigma0, t, m = 1.0, 3.0, 2.0
    f = gaussian_packet(grid, [PacketSpec(0.0, sigma0, 0.5)])
    ham = HamiltonianSpec((m,))
    rec = evolve(f, ham, IntegratorConfig(dt=0.01, t_end=t, sample_every=100))
    var = rec.column("L2")[-1]
    assert var == pytest.approx(sigma0**2 + (t / (2 * m * sigma0)) ** 2, rel=1e-10)
    assert rec.column("X")[-1] == pytest.approx(0.5 * t / m, rel=1e-10)


def test_coherent_state_returns_after_one_period():
    f = gaussian_packet(G1, [PacketSpec(2.0, math.sqrt(0.5))])
    ham = HamiltonianSpec((1.0,), 1.0, (ExternalPoly(b=0.5),))
    n = 2000
    psi = Stepper(ham, G1, 1, 2 * math.pi / n).run(np.array(f.amplitudes), n)
    assert abs(inner(f, f.replace(psi))) == pytest.approx(1.0, abs=1e-6)


def test_rk4_is_fourth_order():
    grid = GridSpec.uniform(2, -10, 10, 64)
    f = cat_state(grid, 2, 0.5, 2.0)
    ham = HamiltonianSpec((1.0, 1.0), 1.0, (), Nonlinear("position", 0.5))
    psi0, T = np.array(f.amplitudes), 0.2

    def run(n):
        return Stepper(ham, grid, 1, T / n, "rk4").run(psi0, n)

    ref = run(800)
    e1, e2 = (_distance(run(n), ref, grid) for n in (50, 100))
    assert e1 / e2 == pytest.approx(16, rel=0.2)


def test_split_and_rk4_agree():
    f = gaussian_packet(G1, [PacketSpec(1.0, 0.7, 0.3)])
    ham = HamiltonianSpec((1.0,), 1.0, (ExternalPoly(b=0.5, c=0.05),), Nonlinear("position", 0.5))
    psi = np.array(f.amplitudes)
    a = Stepper(ham, G1, 1, 1e-3, "rk4").run(psi, 100)
    b = Stepper(ham, G1, 1, 1e-3, "split").run(psi, 100)
    assert _distance(a, b, G1) < 1e-5


def test_split_is_second_order():
    f = gaussian_packet(G1, [PacketSpec(1.0, 0.7)])
    ham = HamiltonianSpec((1.0,), 1.0, (ExternalPoly(b=0.5, d=0.02),), Nonlinear("position", 0.5))
    psi0, T = np.array(f.amplitudes), 0.5
    ref = Stepper(ham, G1, 1, T / 1000, "rk4").run(psi0, 1000)
    e1, e2 = (_distance(Stepper(ham, G1, 1, T / n).run(psi0, n), ref, G1) for n in (25, 50))
    assert e1 / e2 == pytest.approx(4, rel=0.1)


def test_single_step_functions():
    f = gaussian_packet(G1, [PacketSpec(0.0, 1.0)])
    ham = HamiltonianSpec((1.0,), 1.0, (ExternalPoly(b=0.5),), Nonlinear("position", 0.3))
    a, b = step_rk4(f, ham, 1e-3), step_split(f, ham, 1e-3)
    assert _distance(a.amplitudes, b.amplitudes, G1) < 1e-8
    assert norm_sq(b) == pytest.approx(1.0, abs=1e-14)


@pytest.mark.parametrize("form", ["position", "momentum"])
def test_conservation_with_nonlinear_term(form):
    grid = GridSpec.uniform(2, -10, 10, 64)
    f = cat_state(grid, 2, 0.5, 2.0)
    w = 0.5 if form == "position" else 0.2
    ham = HamiltonianSpec((1.0, 1.0), 1.0, (ExternalPoly(b=0.05),), Nonlinear(form, w))
    rec = evolve(f, ham, IntegratorConfig(dt=1e-3, t_end=1.0, sample_every=50))
    assert rec.status == "completed"
    assert rec.relative_drift("norm_sq") < 1e-12
    assert rec.relative_drift("E_total") < 1e-6


def test_pair_forces_conserve_momentum():
    grid = GridSpec.uniform(2, -10, 10, 64)
    f = gaussian_packet(grid, [PacketSpec(-0.5, 0.5, 1.0), PacketSpec(0.5, 0.5, 1.0)])
    ham = HamiltonianSpec((1.0, 1.0), 1.0, (PairShortRange(1.0, 0.5),), Nonlinear("position", 0.5))
    rec = evolve(f, ham, IntegratorConfig(dt=1e-3, t_end=1.0, sample_every=100))
    assert rec.column("P")[0] == pytest.approx(2.0, rel=1e-10)
    assert rec.relative_drift("P") < 1e-8


def test_row_count():
    f = gaussian_packet(G1, [PacketSpec()])
    cfg = IntegratorConfig(dt=0.01, t_end=1.0, sample_every=7)
    rec = evolve(f, HamiltonianSpec((1.0,)), cfg)
    assert len(rec) == math.floor(1.0 / (0.01 * 7)) + 1
    assert len(rec.rows()[0]) == 10


@pytest.mark.filterwarnings("ignore::RuntimeWarning")
def test_huge_dt_rk4_aborts_nan():
    grid = GridSpec.uniform(2, -10, 10, 64)
    f = cat_state(grid, 2, 0.5, 2.0)
    ham = HamiltonianSpec((1.0, 1.0), 1.0, (), Nonlinear("position", 0.5))
    rec = evolve(f, ham, IntegratorConfig(dt=10.0, t_end=1000.0, method="rk4", sample_every=100))
    assert rec.status == "aborted_nan"
    assert rec.final is None or rec.final.is_finite()


def test_drift_tolerance_aborts():
    f = gaussian_packet(G1, [PacketSpec(1.0, 0.5)])
    ham = HamiltonianSpec((1.0,), 1.0, (ExternalPoly(b=0.5, d=0.1),), Nonlinear("position", 1.0))
    rec = evolve(f, ham, IntegratorConfig(dt=0.05, t_end=2.0, energy_drift=1e-12))
    assert rec.status == "aborted_drift"
    assert "energy drift" in rec.message


def test_field_is_never_renormalized():
    f = gaussian_packet(G1, [PacketSpec()])
    f2 = f.replace(2 * f.amplitudes)
    rec = evolve(f2, HamiltonianSpec((1.0,)), IntegratorConfig(dt=0.01, t_end=0.1))
    assert rec.column("norm_sq")[-1] == pytest.approx(4.0, rel=1e-12)


def test_default_dt_formula():
    f = gaussian_packet(G1, [PacketSpec()])
    ham = HamiltonianSpec((1.0,), 1.0, (ExternalPoly(b=0.5),))
    dx = G1.spacing[0]
    vmax = 0.5 * 10**2
    assert default_dt(f, ham) == pytest.approx(min(0.05 * dx**2, 0.05 / vmax))


def test_evolution_is_deterministic():
    grid = GridSpec.uniform(2, -10, 10, 32)
    f = cat_state(grid, 2, 0.5, 2.0)
    ham = HamiltonianSpec((1.0, 1.0), 1.0, (), Nonlinear("position", 0.5))
    cfg = IntegratorConfig(dt=1e-3, t_end=0.05)
    a, b = evolve(f, ham, cfg), evolve(f, ham, cfg)
    assert a.rows() == b.rows()
    assert np.array_equal(a.final.amplitudes, b.final.amplitudes)


def test_nonlinear_term_slows_centroid_spreading():
    """With w>0 the centroid variance of a spreading product state grows more slowly."""
    grid = GridSpec.uniform(2, -12, 12, 64)
    f = gaussian_packet(grid, [PacketSpec(0.0, 0.5)] * 2)
    cfg = IntegratorConfig(dt=1e-3, t_end=1.0, sample_every=100)
    free = evolve(f, HamiltonianSpec((1.0, 1.0)), cfg)
    held = evolve(f, HamiltonianSpec((1.0, 1.0), 1.0, (), Nonlinear("position", 2.0)), cfg)
    assert held.column("D_N")[-1] < free.column("D_N")[-1]
    assert moments(held.final).D_N == pytest.approx(held.column("D_N")[-1])
