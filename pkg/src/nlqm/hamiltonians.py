"""Energy functionals and the evolution right-hand side.

The total energy is H = H_QM + H_NL. ``H_QM`` is the usual quadratic
functional <psi|T + V|psi>; ``H_NL`` is the centroid-variance penalty

    position form:  w * (<S^2> - <S>^2),      S = sum_j x_j
    momentum form:  w * (<K^2> - <K>^2),      K = sum_j p_j

and the dynamics is i hbar d(psi)/dt = dH/d(psi*). For the position form
that derivative is a real multiplicative potential
V_NL = w S^2 - 2 w <S> S, so the norm is conserved.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence, Union

import numpy as np
import scipy.fft as sfft

from .wavefield import GridSpec, WaveField


class NumericalError(RuntimeError):
    """Non-finite values appeared while evaluating a Hamiltonian term."""

    def __init__(self, message: str, term: str):
        super().__init__(f"{message} (term: {term})")
        self.term = term


def _resolve(coords: Optional[Sequence[int]], ndim: int, exclude: Sequence[int] = ()) -> tuple[int, ...]:
    if coords is None:
        return tuple(i for i in range(ndim) if i not in exclude)
    out = tuple(int(c) for c in coords)
    for c in out:
        if not 0 <= c < ndim:
            raise ValueError(f"coordinate index {c} out of range for {ndim} axes")
    if len(set(out)) != len(out):
        raise ValueError(f"duplicate coordinates in {out}")
    return out


@dataclass(frozen=True)
class ExternalPoly:
    """offset + a x + b x^2 + c x^3 + d x^4 applied to each listed coordinate."""

    a: float = 0.0
    b: float = 0.0
    c: float = 0.0
    d: float = 0.0
    offset: float = 0.0
    coords: Optional[tuple[int, ...]] = None
    tag = "external_poly"

    def __call__(self, x):
        return self.offset + x * (self.a + x * (self.b + x * (self.c + x * self.d)))

    def derivative(self, x):
        return self.a + x * (2 * self.b + x * (3 * self.c + x * 4 * self.d))

    def minimum(self) -> float:
        """Global minimum over the real line, or -inf if unbounded below."""
        if self.d < 0 or (self.d == 0 and self.c != 0) or (self.d == 0 and self.c == 0 and self.b < 0):
            return -math.inf
        if self.d == 0 and self.c == 0 and self.b == 0:
            return self.offset if self.a == 0 else -math.inf
        crit = np.roots([4 * self.d, 3 * self.c, 2 * self.b, self.a])
        crit = crit[np.abs(crit.imag) < 1e-9].real
        return float(min(self(x) for x in crit))

    def grid_values(self, grid: GridSpec, spin: int) -> np.ndarray:
        out = np.zeros(grid.shape)
        for j in _resolve(self.coords, grid.ndim):
            out = out + self(grid.mesh(j))
        return out[np.newaxis]

    def gradient(self, grid: GridSpec, axis: int) -> np.ndarray:
        if axis in _resolve(self.coords, grid.ndim):
            return np.broadcast_to(self.derivative(grid.mesh(axis)), grid.shape)[np.newaxis]
        return np.zeros((1,) + grid.shape)

    def floor(self, grid: GridSpec) -> float:
        n = len(_resolve(self.coords, grid.ndim))
        m = self.minimum()
        if math.isinf(m):
            # unbounded on the line; the grid is the actual domain
            m = min(float(self(grid.coords(j)).min()) for j in _resolve(self.coords, grid.ndim))
        return n * m


def double_well(delta_V: float, R: float, coords: Optional[Sequence[int]] = None) -> ExternalPoly:
    """delta_V * ((x/R)^2 - 1)^2: maximum delta_V at 0, minima 0 at +-R."""
    return ExternalPoly(
        b=-2 * delta_V / R**2,
        d=delta_V / R**4,
        offset=delta_V,
        coords=None if coords is None else tuple(coords),
    )


@dataclass(frozen=True)
class PairShortRange:
    """Sum over unordered pairs j<k of u(x_j - x_k), u(s) = -u0 exp(-s^2 / 2 lam^2)."""

    u0: float
    lam: float
    coords: Optional[tuple[int, ...]] = None
    tag = "pair_shortrange"

    def profile(self, s):
        return -self.u0 * np.exp(-(s**2) / (2 * self.lam**2))

    def profile_derivative(self, s):
        return -s / self.lam**2 * self.profile(s)

    def _pairs(self, ndim):
        cs = _resolve(self.coords, ndim)
        if len(cs) < 2:
            raise ValueError("pair_shortrange needs at least two coordinates")
        return list(itertools.combinations(cs, 2))

    def grid_values(self, grid: GridSpec, spin: int) -> np.ndarray:
        out = np.zeros(grid.shape)
        for j, k in self._pairs(grid.ndim):
            out = out + self.profile(grid.mesh(j) - grid.mesh(k))
        return out[np.newaxis]

    def gradient(self, grid: GridSpec, axis: int) -> np.ndarray:
        out = np.zeros(grid.shape)
        for j, k in self._pairs(grid.ndim):
            if axis == j:
                out = out + self.profile_derivative(grid.mesh(j) - grid.mesh(k))
            elif axis == k:
                out = out - self.profile_derivative(grid.mesh(j) - grid.mesh(k))
        return out[np.newaxis]

    def floor(self, grid: GridSpec) -> float:
        return -self.u0 * len(self._pairs(grid.ndim))


@dataclass(frozen=True)
class LinearCoupling:
    """alpha * (sum_j x_j) * y, pointer coordinates x_j and micro coordinate y."""

    alpha: float
    micro: int
    coords: Optional[tuple[int, ...]] = None
    tag = "linear_coupling"

    def _coords(self, ndim):
        return _resolve(self.coords, ndim, exclude=(self.micro,))

    def _sum(self, grid):
        return sum(grid.mesh(j) for j in self._coords(grid.ndim))

    def grid_values(self, grid: GridSpec, spin: int) -> np.ndarray:
        return (self.alpha * self._sum(grid) * grid.mesh(self.micro))[np.newaxis]

    def gradient(self, grid: GridSpec, axis: int) -> np.ndarray:
        if axis == self.micro:
            g = self.alpha * self._sum(grid)
        elif axis in self._coords(grid.ndim):
            g = self.alpha * grid.mesh(self.micro)
        else:
            g = np.zeros(1)
        return np.broadcast_to(g, grid.shape)[np.newaxis]

    def floor(self, grid: GridSpec) -> float:
        return float(self.grid_values(grid, 1).min())


@dataclass(frozen=True)
class SpinGradient:
    """g * y * sigma_z on a two-component spinor (|+> first)."""

    g: float
    axis: int
    tag = "spin_gradient"

    def grid_values(self, grid: GridSpec, spin: int) -> np.ndarray:
        if spin != 2:
            raise ValueError("spin_gradient requires two spin components")
        y = np.broadcast_to(self.g * grid.mesh(self.axis), grid.shape)
        return np.stack([y, -y])

    def gradient(self, grid: GridSpec, axis: int) -> np.ndarray:
        if axis != self.axis:
            return np.zeros((1,) + grid.shape)
        return np.stack([np.full(grid.shape, self.g), np.full(grid.shape, -self.g)])

    def floor(self, grid: GridSpec) -> float:
        return -abs(self.g) * float(np.abs(grid.coords(self.axis)).max())


PotentialTerm = Union[ExternalPoly, PairShortRange, LinearCoupling, SpinGradient]


@dataclass(frozen=True)
class Nonlinear:
    """Selector for H_NL: ``off``, ``position`` (w in energy/length^2) or ``momentum`` (w in 1/mass)."""

    form: str = "off"
    w: float = 0.0
    coords: Optional[tuple[int, ...]] = None

    def __post_init__(self):
        if self.form not in ("off", "position", "momentum"):
            raise ValueError(f"unknown nonlinear form {self.form!r}")
        if not self.w >= 0:
            raise ValueError("w must be non-negative")
        if self.coords is not None:
            object.__setattr__(self, "coords", tuple(int(c) for c in self.coords))

    @property
    def active(self) -> bool:
        return self.form != "off"


@dataclass(frozen=True)
class HamiltonianSpec:
    masses: tuple[float, ...]
    hbar: float = 1.0
    potentials: tuple = ()
    nonlinear: Nonlinear = field(default_factory=Nonlinear)

    def __post_init__(self):
        object.__setattr__(self, "masses", tuple(float(m) for m in self.masses))
        object.__setattr__(self, "potentials", tuple(self.potentials))
        if any(not m > 0 for m in self.masses):
            raise ValueError("masses must be positive")
        if not self.hbar > 0:
            raise ValueError("hbar must be positive")

    def with_w(self, w: float) -> HamiltonianSpec:
        nl = self.nonlinear
        form = nl.form if nl.active else "position"
        return HamiltonianSpec(self.masses, self.hbar, self.potentials, Nonlinear(form, w, nl.coords))

    def check(self, grid: GridSpec, spin: int = 1):
        if len(self.masses) != grid.ndim:
            raise ValueError(f"{len(self.masses)} masses for a {grid.ndim}-axis grid")
        _resolve(self.nonlinear.coords, grid.ndim)
        for term in self.potentials:
            term.grid_values(grid, spin)


def _fft_axes(grid: GridSpec) -> tuple[int, ...]:
    return tuple(range(1, grid.ndim + 1))


class DiscreteHamiltonian:
    """Grid operators for one (HamiltonianSpec, GridSpec, spin) combination.

    Built once per run; holds the kinetic multiplier, the static potential
    and the operand of the nonlinear term.
    """

    def __init__(self, ham: HamiltonianSpec, grid: GridSpec, spin: int = 1):
        ham.check(grid, spin)
        self.ham = ham
        self.grid = grid
        self.spin = spin
        self.hbar = ham.hbar
        self.axes = _fft_axes(grid)
        self.dv = grid.cell_volume
        self.kfac = self.dv / grid.size  # Parseval weight for unnormalized FFTs

        T = np.zeros(grid.shape)
        for j, m in enumerate(ham.masses):
            T = T + ham.hbar**2 * grid.kmesh(j) ** 2 / (2 * m)
        self.T = T

        self.terms = list(ham.potentials)
        self.term_values = [t.grid_values(grid, spin) for t in self.terms]
        V = np.zeros((1,) + grid.shape)
        for v in self.term_values:
            V = V + v
        self.V = V

        nl = ham.nonlinear
        self.nl_form = nl.form
        self.w = nl.w
        self.nl_coords = _resolve(nl.coords, grid.ndim)
        if nl.form == "position":
            self.S = np.broadcast_to(sum(grid.mesh(j) for j in self.nl_coords), grid.shape)
        elif nl.form == "momentum":
            self.K = ham.hbar * np.broadcast_to(sum(grid.kmesh(j) for j in self.nl_coords), grid.shape)

    # transforms
    def fft(self, psi):
        return sfft.fftn(psi, axes=self.axes)

    def ifft(self, psi_k):
        return sfft.ifftn(psi_k, axes=self.axes)

    # quadratures
    def density(self, psi) -> np.ndarray:
        return np.sum(psi.real**2 + psi.imag**2, axis=0)

    def norm_sq(self, psi) -> float:
        return float(self.density(psi).sum() * self.dv)

    def nl_mean(self, psi, psi_k=None) -> float:
        """<S> (position form) or <K> (momentum form)."""
        if self.nl_form == "position":
            return float(np.sum(self.S * self.density(psi)) * self.dv)
        if self.nl_form == "momentum":
            psi_k = self.fft(psi) if psi_k is None else psi_k
            return float(np.sum(self.K * self.density(psi_k)) * self.kfac)
        return 0.0

    def v_nl(self, mean: float) -> np.ndarray:
        """Position-form effective potential w S^2 - 2 w <S> S."""
        return self.w * self.S * (self.S - 2 * mean)

    def k_nl(self, mean: float) -> np.ndarray:
        """Momentum-form multiplier w K^2 - 2 w <K> K."""
        return self.w * self.K * (self.K - 2 * mean)

    def energies(self, psi) -> tuple[float, float]:
        """(H_QM, H_NL) of the raw (unnormalized) amplitudes."""
        psi_k = self.fft(psi)
        rho_k = self.density(psi_k)
        rho = self.density(psi)
        kin = float(np.sum(self.T * rho_k) * self.kfac)
        pot = float(np.sum(self.V * (psi.real**2 + psi.imag**2)) * self.dv)
        e_nl = 0.0
        if self.nl_form == "position":
            m1 = np.sum(self.S * rho) * self.dv
            m2 = np.sum(self.S**2 * rho) * self.dv
            e_nl = float(self.w * (m2 - m1**2))
        elif self.nl_form == "momentum":
            m1 = np.sum(self.K * rho_k) * self.kfac
            m2 = np.sum(self.K**2 * rho_k) * self.kfac
            e_nl = float(self.w * (m2 - m1**2))
        return kin + pot, e_nl

    def apply(self, psi) -> np.ndarray:
        """dH/d(psi*) on the grid."""
        if not np.isfinite(psi).all():
            raise NumericalError("non-finite amplitudes", "field")
        psi_k = self.fft(psi)
        mult = self.T
        if self.nl_form == "momentum":
            mult = mult + self.k_nl(self.nl_mean(psi, psi_k))
        out = self.ifft(mult * psi_k)
        if not np.isfinite(out).all():
            raise NumericalError("non-finite kinetic contribution", "kinetic")
        pot = self.V * psi
        if not np.isfinite(pot).all():
            for term, v in zip(self.terms, self.term_values):
                if not np.isfinite(v * psi).all():
                    raise NumericalError("non-finite potential contribution", term.tag)
            raise NumericalError("non-finite potential contribution", "potential")
        out = out + pot
        if self.nl_form == "position":
            nl = self.v_nl(self.nl_mean(psi)) * psi
            if not np.isfinite(nl).all():
                raise NumericalError("non-finite nonlinear contribution", "nonlinear_position")
            out = out + nl
        return out

    def rhs(self, psi) -> np.ndarray:
        return self.apply(psi) / (1j * self.hbar)


def _discrete(field: WaveField, ham: HamiltonianSpec) -> DiscreteHamiltonian:
    return DiscreteHamiltonian(ham, field.grid, field.spin_components)


def h_qm(field: WaveField, ham: HamiltonianSpec) -> float:
    """Kinetic (spectral) plus potential energy, summed over spin components."""
    return _discrete(field, ham).energies(field.amplitudes)[0]


def h_nl(field: WaveField, ham: HamiltonianSpec) -> float:
    """The nonlinear energy w * (<S^2> - <S>^2), position or momentum form."""
    if not ham.nonlinear.active:
        raise ValueError("nonlinear term is off")
    return _discrete(field, ham).energies(field.amplitudes)[1]


def total_energy(field: WaveField, ham: HamiltonianSpec) -> float:
    return sum(_discrete(field, ham).energies(field.amplitudes))


def effective_nl_potential(field: WaveField, w: float, coords: Optional[Sequence[int]] = None) -> np.ndarray:
    """V_NL = w S^2 - 2 w <psi|S|psi> S evaluated pointwise, S = sum of coords."""
    grid = field.grid
    S = np.broadcast_to(sum(grid.mesh(j) for j in _resolve(coords, grid.ndim)), grid.shape)
    mean = float(np.sum(S * field.density()) * grid.cell_volume)
    return w * S * (S - 2 * mean)


def rhs(field: WaveField, ham: HamiltonianSpec) -> WaveField:
    """(1 / i hbar) dH/d(psi*) as a field."""
    return field.replace(_discrete(field, ham).rhs(field.amplitudes))


def energy_floor(ham: HamiltonianSpec, grid: GridSpec) -> float:
    """Lower bound of H_QM for normalized states: kinetic >= 0 plus per-term minima.

    Terms unbounded on the real line fall back to their minimum over the grid,
    which bounds the discretized dynamics exactly.
    """
    return float(sum(t.floor(grid) for t in ham.potentials))
