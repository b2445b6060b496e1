"""Time integration of i hbar d(psi)/dt = dH/d(psi*).

Two steppers share the same discrete operators:

* ``rk4`` integrates the full nonlinear right-hand side, re-evaluating the
  state-dependent mean inside V_NL at every stage.
* ``split`` is Strang splitting (half kinetic, full potential, half
  kinetic). The potential flow leaves |psi|^2 unchanged, so the mean <S>
  taken after the first kinetic half-step is exactly the midpoint value.
  All factors are pure phases and the norm is preserved to rounding.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .hamiltonians import DiscreteHamiltonian, HamiltonianSpec, NumericalError, _resolve
from .observables import moments
from .wavefield import WaveField

COLUMNS = ("t", "norm_sq", "E_total", "E_qm", "E_nl", "X", "P", "D_N", "L2", "C2")


@dataclass(frozen=True)
class IntegratorConfig:
    dt: float
    t_end: float
    method: str = "split"
    sample_every: int = 1
    norm_drift: float = 1e-6
    energy_drift: Optional[float] = 1e-2

    def __post_init__(self):
        if self.method not in ("rk4", "split"):
            raise ValueError(f"unknown method {self.method!r}")
        if not self.dt > 0:
            raise ValueError("dt must be positive")
        if not self.t_end >= self.dt:
            raise ValueError("t_end must be at least dt")
        if int(self.sample_every) < 1:
            raise ValueError("sample_every must be >= 1")

    @property
    def n_steps(self) -> int:
        return int(math.floor(self.t_end / self.dt * (1 + 1e-12)))


@dataclass
class TrajectoryRecord:
    times: list = field(default_factory=list)
    norm_sq: list = field(default_factory=list)
    E_total: list = field(default_factory=list)
    E_qm: list = field(default_factory=list)
    E_nl: list = field(default_factory=list)
    X: list = field(default_factory=list)
    P: list = field(default_factory=list)
    D_N: list = field(default_factory=list)
    L2: list = field(default_factory=list)
    C2: list = field(default_factory=list)
    status: str = "completed"
    message: str = ""
    coords: tuple = ()
    fields: Optional[list] = None
    final: Optional[WaveField] = None

    def __len__(self):
        return len(self.times)

    def column(self, name: str) -> np.ndarray:
        attr = {"t": "times"}.get(name, name)
        return np.array([np.nan if v is None else v for v in getattr(self, attr)], dtype=float)

    def rows(self):
        cols = [self.column(c) for c in COLUMNS]
        return list(zip(*cols))

    def relative_drift(self, name: str) -> float:
        v = self.column(name)
        return float(np.max(np.abs(v - v[0])) / abs(v[0]))


def _rk4(op: DiscreteHamiltonian, psi: np.ndarray, dt: float) -> np.ndarray:
    k1 = op.rhs(psi)
    k2 = op.rhs(psi + 0.5 * dt * k1)
    k3 = op.rhs(psi + 0.5 * dt * k2)
    k4 = op.rhs(psi + dt * k3)
    return psi + dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4)


class _SplitPropagator:
    def __init__(self, op: DiscreteHamiltonian, dt: float):
        self.op = op
        self.dt = dt
        self.half_T = np.exp(-0.5j * dt / op.hbar * op.T)
        self.full_V = np.exp(-1j * dt / op.hbar * op.V)

    def _kinetic_half(self, psi):
        op = self.op
        psi_k = op.fft(psi)
        phase = self.half_T
        if op.nl_form == "momentum":
            # |psi_k|^2 is invariant under this flow, so <K> is exact
            phase = phase * np.exp(-0.5j * self.dt / op.hbar * op.k_nl(op.nl_mean(psi, psi_k)))
        return op.ifft(phase * psi_k)

    def __call__(self, psi):
        op = self.op
        psi = self._kinetic_half(psi)
        psi = self.full_V * psi
        if op.nl_form == "position":
            psi = np.exp(-1j * self.dt / op.hbar * op.v_nl(op.nl_mean(psi))) * psi
        return self._kinetic_half(psi)


def _check_finite(psi):
    if not np.isfinite(psi).all():
        raise NumericalError("non-finite amplitudes after step", "field")


def step_rk4(field: WaveField, ham: HamiltonianSpec, dt: float) -> WaveField:
    op = DiscreteHamiltonian(ham, field.grid, field.spin_components)
    psi = _rk4(op, field.amplitudes, dt)
    _check_finite(psi)
    return field.replace(psi)


def step_split(field: WaveField, ham: HamiltonianSpec, dt: float) -> WaveField:
    op = DiscreteHamiltonian(ham, field.grid, field.spin_components)
    psi = _SplitPropagator(op, dt)(field.amplitudes)
    _check_finite(psi)
    return field.replace(psi)


def default_dt(field: WaveField, ham: HamiltonianSpec) -> float:
    """min(0.05 m dx^2 / hbar, 0.05 hbar / V_max) with V_max including V_NL at t=0."""
    op = DiscreteHamiltonian(ham, field.grid, field.spin_components)
    grid = field.grid
    kin = min(0.05 * m * dx**2 / ham.hbar for m, dx in zip(ham.masses, grid.spacing))
    V = np.abs(op.V)
    if op.nl_form == "position":
        V = V + np.abs(op.v_nl(op.nl_mean(field.amplitudes)))
    vmax = float(V.max())
    return kin if vmax == 0 else min(kin, 0.05 * ham.hbar / vmax)


class Stepper:
    """Repeated stepping with operators built once."""

    def __init__(self, ham: HamiltonianSpec, grid, spin: int, dt: float, method: str = "split"):
        self.op = DiscreteHamiltonian(ham, grid, spin)
        self.dt = dt
        self.method = method
        if method == "split":
            self._step = _SplitPropagator(self.op, dt)
        elif method == "rk4":
            self._step = lambda psi: _rk4(self.op, psi, dt)
        else:
            raise ValueError(f"unknown method {method!r}")

    def __call__(self, psi: np.ndarray) -> np.ndarray:
        return self._step(psi)

    def run(self, psi: np.ndarray, n: int) -> np.ndarray:
        for _ in range(n):
            psi = self._step(psi)
        return psi


def evolve(field: WaveField, ham: HamiltonianSpec, cfg: IntegratorConfig,
           observe: Optional[Sequence[int]] = None, keep_fields: bool = False) -> TrajectoryRecord:
    """Integrate and sample observables every ``cfg.sample_every`` steps.

    Observables X, P, D_N, L2, C2 are taken over the ``observe`` coordinates
    (default: the nonlinear group, or every axis). The run stops with status
    ``aborted_nan`` on non-finite values and ``aborted_drift`` when the norm
    (or, if configured, energy) drifts past tolerance. The field is never
    renormalized.
    """
    grid = field.grid
    coords = _resolve(observe if observe is not None else ham.nonlinear.coords, grid.ndim)
    stepper = Stepper(ham, grid, field.spin_components, cfg.dt, cfg.method)
    op = stepper.op
    rec = TrajectoryRecord(coords=coords, fields=[] if keep_fields else None)

    def sample(step, psi):
        e_qm, e_nl = op.energies(psi)
        f = field.replace(psi)
        mr = moments(f, coords, hbar=ham.hbar)
        rec.times.append(step * cfg.dt)
        rec.norm_sq.append(op.norm_sq(psi))
        rec.E_total.append(e_qm + e_nl)
        rec.E_qm.append(e_qm)
        rec.E_nl.append(e_nl)
        rec.X.append(mr.X)
        rec.P.append(mr.P_total)
        rec.D_N.append(mr.D_N)
        rec.L2.append(mr.L2)
        rec.C2.append(mr.C2)
        if keep_fields:
            rec.fields.append(f)

    psi = np.array(field.amplitudes)
    sample(0, psi)
    n0, e0 = rec.norm_sq[0], rec.E_total[0]
    for step in range(1, cfg.n_steps + 1):
        try:
            psi = stepper(psi)
        except NumericalError as exc:
            rec.status, rec.message = "aborted_nan", str(exc)
            break
        if not np.isfinite(psi).all():
            rec.status, rec.message = "aborted_nan", f"non-finite amplitudes at step {step}"
            break
        if step % cfg.sample_every == 0:
            sample(step, psi)
            n_drift = abs(rec.norm_sq[-1] - n0) / n0
            if not math.isfinite(rec.E_total[-1]):
                rec.status, rec.message = "aborted_nan", f"non-finite energy at step {step}"
                break
            if n_drift > cfg.norm_drift:
                rec.status = "aborted_drift"
                rec.message = f"norm drift {n_drift:.3e} > {cfg.norm_drift:.1e} at step {step}"
                break
            if cfg.energy_drift is not None and e0 != 0:
                e_drift = abs(rec.E_total[-1] - e0) / abs(e0)
                if e_drift > cfg.energy_drift:
                    rec.status = "aborted_drift"
                    rec.message = f"energy drift {e_drift:.3e} > {cfg.energy_drift:.1e} at step {step}"
                    break
    rec.final = field.replace(psi) if np.isfinite(psi).all() else None
    return rec
