"""Measurement setups and closed-form estimators.

Grid scenarios use two axes for the measurement models: axis 0 is the
microscopic coordinate y, axis 1 is the pointer's collective coordinate X.
The pointer stands in for N_eff identical constituents, so its nonlinear
coupling is w_eff = w * N_eff**2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

import numpy as np

from .dynamics import IntegratorConfig, TrajectoryRecord, evolve
from .hamiltonians import (
    HamiltonianSpec,
    LinearCoupling,
    Nonlinear,
    SpinGradient,
    double_well,
    energy_floor,
)
from .observables import moments
from .wavefield import (
    GridSpec,
    PacketSpec,
    WaveField,
    attach_spin,
    cat_state,
    gaussian_packet,
    normalize,
    product_superposition_state,
    tensor_product,
)

MICRO, POINTER = 0, 1
KINDS = ("gaussian", "product", "cat", "double_well", "stern_gerlach")


@dataclass(frozen=True)
class ScenarioConfig:
    """Declarative description of one run.

    ``hamiltonian`` carries hbar, masses, any extra potentials and the
    per-constituent coupling ``w``; measurement scenarios add their own
    potentials and scale ``w`` by ``N_eff**2`` on the pointer axis.
    """

    kind: str
    grid: GridSpec
    hamiltonian: HamiltonianSpec
    integrator: IntegratorConfig
    packets: tuple = ()
    r: float = 0.1
    R: float = 2.0
    N_eff: float = 1.0
    delta_V: float = 1.0
    kick: float = 0.0
    micro_offset: float = 1.0
    micro_sigma: float = 0.25
    pointer_sigma: float = 0.2
    spin_amplitudes: tuple = (math.sqrt(0.5), math.sqrt(0.5))
    gamma: float = 0.0
    gradient: float = 0.0
    coupling: float = 0.0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown scenario kind {self.kind!r}")
        if self.kind in ("double_well", "stern_gerlach") and self.grid.ndim != 2:
            raise ValueError(f"{self.kind} needs a 2-axis grid (y, X)")
        if self.N_eff <= 0:
            raise ValueError("N_eff must be positive")

    @property
    def w(self) -> float:
        return self.hamiltonian.nonlinear.w

    @property
    def w_eff(self) -> float:
        return self.w * self.N_eff**2

    def with_param(self, name: str, value: float) -> ScenarioConfig:
        if name == "w":
            return replace(self, hamiltonian=self.hamiltonian.with_w(value))
        if name in SWEEPABLE:
            return replace(self, **{SWEEPABLE[name]: value})
        raise KeyError(name)


SWEEPABLE = {"w": "w", "N_eff": "N_eff", "delta_V": "delta_V", "R": "R", "kick": "kick"}


def _pointer_ham(cfg: ScenarioConfig, extra: Sequence) -> HamiltonianSpec:
    h = cfg.hamiltonian
    nl = h.nonlinear
    form = nl.form if nl.active else "position"
    return HamiltonianSpec(
        h.masses, h.hbar, tuple(h.potentials) + tuple(extra), Nonlinear(form, cfg.w_eff, (POINTER,))
    )


def _two_packet(grid: GridSpec, offset: float, sigma: float) -> WaveField:
    y = grid.coords(0)
    amp = np.exp(-((y - offset) ** 2) / (4 * sigma**2)) + np.exp(-((y + offset) ** 2) / (4 * sigma**2))
    return normalize(WaveField(grid, amp))


def build(cfg: ScenarioConfig) -> tuple[WaveField, HamiltonianSpec, tuple[int, ...]]:
    """Initial field, full Hamiltonian and observed coordinates for ``cfg``."""
    grid, ham = cfg.grid, cfg.hamiltonian
    if cfg.kind == "gaussian":
        packets = cfg.packets or tuple(PacketSpec() for _ in range(grid.ndim))
        field0 = gaussian_packet(grid, packets)
    elif cfg.kind == "product":
        field0 = product_superposition_state(grid, grid.ndim, cfg.r, cfg.R)
    elif cfg.kind == "cat":
        field0 = cat_state(grid, grid.ndim, cfg.r, cfg.R)
    elif cfg.kind == "double_well":
        gy, gx = GridSpec(grid.axes[:1]), GridSpec(grid.axes[1:])
        micro = _two_packet(gy, cfg.micro_offset, cfg.micro_sigma)
        pointer = gaussian_packet(gx, [PacketSpec(0.0, cfg.pointer_sigma)])
        field0 = tensor_product(micro, pointer)
        # impulsive linear-coupling pulse: exp(-i kick X y / hbar)
        phase = np.exp(-1j * cfg.kick * grid.mesh(MICRO) * grid.mesh(POINTER) / ham.hbar)
        field0 = field0.replace(field0.amplitudes * phase)
        ham = _pointer_ham(cfg, [double_well(cfg.delta_V, cfg.R, coords=(POINTER,))])
        return field0, ham, (POINTER,)
    elif cfg.kind == "stern_gerlach":
        base = gaussian_packet(grid, [PacketSpec(0.0, cfg.micro_sigma), PacketSpec(0.0, cfg.pointer_sigma)])
        a, b = cfg.spin_amplitudes
        field0 = attach_spin(base, [a, b * np.exp(1j * cfg.gamma)])
        ham = _pointer_ham(cfg, [SpinGradient(cfg.gradient, MICRO),
                                 LinearCoupling(cfg.coupling, micro=MICRO, coords=(POINTER,))])
        return field0, ham, (POINTER,)
    observe = ham.nonlinear.coords if ham.nonlinear.coords is not None else tuple(range(grid.ndim))
    return field0, ham, tuple(observe)


def run(cfg: ScenarioConfig, keep_fields: bool = False) -> TrajectoryRecord:
    field0, ham, observe = build(cfg)
    return evolve(field0, ham, cfg.integrator, observe=observe, keep_fields=keep_fields)


def edge_mass(field: WaveField, fraction: float = 1 / 16) -> float:
    """Largest probability within ``fraction`` of any axis end."""
    rho = field.density() * field.grid.cell_volume
    worst = 0.0
    for j, ax in enumerate(field.grid.axes):
        m = rho.sum(axis=tuple(i for i in range(rho.ndim) if i != j))
        k = max(1, int(ax.n_points * fraction))
        worst = max(worst, float(m[:k].sum() + m[-k:].sum()))
    return worst


@dataclass
class SternGerlachReport:
    times: np.ndarray
    populations: np.ndarray  # (n_samples, 2): |+> and |-> weights
    X: np.ndarray
    D: np.ndarray
    status: str
    message: str
    record: TrajectoryRecord = field(repr=False)


def stern_gerlach_run(cfg: ScenarioConfig, edge_tol: float = 1e-4) -> SternGerlachReport:
    """Spin splits the micro packet; the coupling drags the pointer per branch."""
    if cfg.kind != "stern_gerlach":
        raise ValueError("config is not a stern_gerlach scenario")
    rec = run(cfg, keep_fields=True)
    dv = cfg.grid.cell_volume
    pops = np.array([[float(np.sum(np.abs(c) ** 2) * dv) for c in f.amplitudes] for f in rec.fields])
    status, message = rec.status, rec.message
    for t, f in zip(rec.times, rec.fields):
        em = edge_mass(f)
        if em > edge_tol:
            status = "aborted_edge"
            message = f"packet reached the grid edge at t={t:.4g} (edge mass {em:.2e})"
            break
    return SternGerlachReport(
        times=rec.column("t"), populations=pops, X=rec.column("X"), D=rec.column("D_N"),
        status=status, message=message, record=rec,
    )


@dataclass
class DoubleWellReport:
    times: np.ndarray
    D: np.ndarray
    E_nl: np.ndarray
    E_total: np.ndarray
    blocked: bool
    w_eff: float
    threshold_D: float
    budget: float  # E_total(0) - E_floor
    bound_ok: bool  # E_nl(t) <= budget at every sample
    status: str
    record: TrajectoryRecord = field(repr=False)

    @property
    def cat_energy(self) -> float:
        """w_eff * R^2: the nonlinear energy a fully formed cat would carry."""
        return self.w_eff * self.threshold_D * 2


def double_well_run(cfg: ScenarioConfig) -> DoubleWellReport:
    """Pointer at the top of a quartic double well, kicked both ways by the micro system.

    ``blocked`` means the pointer dispersion never reached half the squared
    well separation, max_t D(t) < R^2 / 2; for w_eff > 0 this is the same as
    max_t E_nl(t) < w_eff R^2 / 2.
    """
    if cfg.kind != "double_well":
        raise ValueError("config is not a double_well scenario")
    field0, ham, observe = build(cfg)
    rec = evolve(field0, ham, cfg.integrator, observe=observe)
    D = rec.column("D_N")
    E_nl = rec.column("E_nl")
    budget = rec.E_total[0] - energy_floor(ham, cfg.grid)
    threshold = 0.5 * cfg.R**2
    return DoubleWellReport(
        times=rec.column("t"),
        D=D,
        E_nl=E_nl,
        E_total=rec.column("E_total"),
        blocked=bool(np.max(D) < threshold),
        w_eff=cfg.w_eff,
        threshold_D=threshold,
        budget=budget,
        bound_ok=bool(np.all(E_nl <= budget)),
        status=rec.status,
        record=rec,
    )


@dataclass
class SweepRow:
    value: float
    blocked: bool
    max_D: float
    max_E_nl: float
    budget: float
    bound_ok: bool
    status: str


@dataclass
class SweepResult:
    param: str
    rows: list
    transition: Optional[float]  # geometric midpoint between last unblocked and first blocked
    w_at_transition: Optional[float]
    w_estimate: Optional[float]  # estimate_w back-calculation at the transition
    reports: list = field(default_factory=list, repr=False)

    @property
    def monotone(self) -> bool:
        flags = [r.blocked for r in self.rows]
        return all(not a or b for a, b in zip(flags, flags[1:]))


def summary_row(value: float, rep: DoubleWellReport) -> SweepRow:
    return SweepRow(value, rep.blocked, float(rep.D.max()), float(rep.E_nl.max()),
                    rep.budget, rep.bound_ok, rep.status)


def sweep(cfg: ScenarioConfig, param: str, values: Sequence[float], mapper=map) -> SweepResult:
    """Run double_well_run over ``values`` of ``param`` (sorted ascending).

    ``mapper`` may be a parallel map such as ``Executor.map``; points are
    independent.
    """
    if param not in SWEEPABLE:
        raise KeyError(f"{param!r} is not sweepable; choose from {sorted(SWEEPABLE)}")
    values = sorted(values)
    reports = list(mapper(double_well_run, [cfg.with_param(param, v) for v in values]))
    rows = [summary_row(v, rep) for v, rep in zip(values, reports)]
    transition = w_t = w_est = None
    for lo, hi in zip(rows, rows[1:]):
        if lo.blocked != hi.blocked:
            a, b = lo.value, hi.value
            transition = math.sqrt(a * b) if a > 0 and b > 0 else 0.5 * (a + b)
            at = cfg.with_param(param, transition)
            w_t = at.w
            w_est = estimate_w(at.delta_V / at.N_eff, at.N_eff, at.R)
            break
    return SweepResult(param, rows, transition, w_t, w_est, reports)


def estimate_w(delta_V: float, N_c: float, R: float) -> float:
    """Coupling at which a cat of N_c constituents just breaks up: delta_V / (N_c R^2)."""
    if not (delta_V > 0 and N_c > 0 and R > 0):
        raise ValueError("delta_V, N_c and R must be positive")
    return delta_V / (N_c * R**2)


@dataclass(frozen=True)
class EstimateReport:
    name: str
    value: float
    unit: str
    inputs: dict
    extras: dict = field(default_factory=dict)


# Illustrative SI inputs and the orders of magnitude quoted alongside them.
REFERENCE_INPUTS = {
    "cat_final": {"w": 1e-30, "R": 1.0, "N": 1e23},
    "pointer_initial": {"w": 1e-30, "N": 1e23, "L": 1e-3},
    "hydrogen": {"w": 1e-30, "length": 6e-11, "ground_state": 1.6e-19},
    "thermal_correlation": {"w": 1e-30, "N": 1e23, "L": 1e-3, "epsilon": 1e-9},
}
REFERENCE_VALUES = {
    "cat_final": 1e16,
    "pointer_initial": 1e-13,
    "hydrogen": 1e-51,
    "hydrogen_ratio": 1e-32,
    "thermal_correlation": 1e4,
}


def paper_estimates(kind: str, **params) -> EstimateReport:
    """Order-of-magnitude energies in SI units (Joule)."""
    if kind not in REFERENCE_INPUTS:
        raise ValueError(f"unknown estimate {kind!r}; choose from {sorted(REFERENCE_INPUTS)}")
    p = dict(REFERENCE_INPUTS[kind])
    unknown = set(params) - set(p)
    if unknown:
        raise ValueError(f"unknown parameters for {kind}: {sorted(unknown)}")
    p.update(params)
    missing = [k for k, v in p.items() if v is None]
    if missing:
        raise ValueError(f"missing parameters for {kind}: {missing}")
    extras = {}
    if kind == "cat_final":
        value = p["w"] * p["R"] ** 2 * p["N"] ** 2
    elif kind == "pointer_initial":
        value = p["w"] * p["N"] * p["L"] ** 2
    elif kind == "hydrogen":
        value = p["w"] * p["length"] ** 2
        extras["ratio_to_ground_state"] = value / p["ground_state"]
    else:
        value = p["w"] * p["N"] ** 2 * p["L"] * p["epsilon"]
    return EstimateReport(kind, value, "J", p, extras)


def same_order(value: float, reference: float) -> bool:
    """True when the two magnitudes differ by less than a factor of ten."""
    return abs(math.log10(abs(value)) - math.log10(abs(reference))) < 1.0


@dataclass(frozen=True)
class ScalingRow:
    N: float
    D_product: float
    D_cat: float
    H_nl_product: float
    H_nl_cat: float


def scaling_table(N_list: Sequence[float], r: float, R: float, w: float = 1.0) -> list[ScalingRow]:
    """Closed-form centroid dispersion for product vs cat states (no overlap)."""
    rows = []
    for N in N_list:
        if not N > 0:
            raise ValueError("N must be positive")
        dp = (R**2 + r**2) / N
        dc = R**2 + r**2 / N
        rows.append(ScalingRow(N, dp, dc, w * N**2 * dp, w * N**2 * dc))
    return rows


@dataclass(frozen=True)
class CorrelationReport:
    f1: float
    f2: float
    epsilon: float
    eta: float
    L: float
    C2_closed: float  # L f1 epsilon / 6
    C2_quadrature: float
    C2_exact: float  # exact flat-density value for the chosen boundary
    zero_mean_residual: float
    boundary: str


def _f_antiderivative(s, f1, f2, eps, eta):
    a = np.abs(s)
    g = f1 * np.minimum(a, eps) - f2 * np.clip(a - eps, 0.0, eta - eps)
    return np.sign(s) * g


def _f_abs_moment(p, f1, f2, eps, eta):
    """Integral of f(s) |s|^p over the real line."""
    return 2 * (f1 * eps ** (p + 1) - f2 * (eta ** (p + 1) - eps ** (p + 1))) / (p + 1)


def correlation_model(f1: float, eta: float, epsilon: float, L: float, *,
                      n: int = 10_000, boundary: str = "periodic") -> CorrelationReport:
    """Two-level pair correlation f on a flat one-coordinate density of width L.

    f = f1 for |s| <= epsilon and -f2 for epsilon < |s| <= eta, with
    f1/f2 = (eta - epsilon)/epsilon so that f integrates to zero. The pair
    term C2 = integral rho1 rho1 f x1 x2 is evaluated as an n x n midpoint
    quadrature (cell-averaged kernel, summed by FFT convolution).

    ``boundary="periodic"`` measures separations around a ring of length L,
    which makes the zero-mean constraint exact; ``"open"`` uses the segment
    [-L/2, L/2], where edge pairs leave a residual of order f1 eps eta / L^2.
    """
    if not 0 < epsilon < eta:
        raise ValueError("need 0 < epsilon < eta")
    if f1 < 0 or L <= 0:
        raise ValueError("need f1 >= 0 and L > 0")
    if eta >= L / 2:
        raise ValueError("eta must be below L/2")
    if boundary not in ("periodic", "open"):
        raise ValueError("boundary must be 'periodic' or 'open'")
    f2 = f1 * epsilon / (eta - epsilon)
    if f2 >= 1:
        raise ValueError(f"f2 = {f2:g} violates f2 < 1")

    h = L / n
    x = -L / 2 + (np.arange(n) + 0.5) * h
    args = (f1, f2, epsilon, eta)

    def kernel(lags):
        return (_f_antiderivative((lags + 0.5) * h, *args) - _f_antiderivative((lags - 0.5) * h, *args)) / h

    if boundary == "periodic":
        lags = np.arange(n)
        lags = np.where(lags < n // 2, lags, lags - n)
        F = np.fft.rfft(kernel(lags))

        def pair_sum(u, v):
            return float(u @ np.fft.irfft(F * np.fft.rfft(v), n))
    else:
        F = kernel(np.arange(-(n - 1), n))

        def pair_sum(u, v):
            from scipy.signal import fftconvolve
            return float(u @ fftconvolve(v, F)[n - 1: 2 * n - 1])

    w2 = h**2 / L**2
    c2 = w2 * pair_sum(x, x)
    ones = np.ones(n)
    residual = w2 * pair_sum(ones, ones)

    m1 = _f_abs_moment(1, *args)
    if boundary == "periodic":
        exact = -0.5 * m1 + _f_abs_moment(2, *args) / (2 * L)
    else:
        exact = -0.25 * m1 + _f_abs_moment(3, *args) / (6 * L**2)
    return CorrelationReport(
        f1=f1, f2=f2, epsilon=epsilon, eta=eta, L=L,
        C2_closed=L * f1 * epsilon / 6,
        C2_quadrature=c2,
        C2_exact=exact,
        zero_mean_residual=residual,
        boundary=boundary,
    )
