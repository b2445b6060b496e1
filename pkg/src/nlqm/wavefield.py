"""Wavefunctions on periodic tensor-product grids.

Every coordinate (pointer "particle" or microscopic degree of freedom) gets
its own one-dimensional axis. Amplitudes are stored with a leading spin
axis, so a scalar field on a 2-axis grid has shape ``(1, n0, n1)``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Sequence

import numpy as np

DEFAULT_MAX_POINTS = 2**24


class OverlapWarning(UserWarning):
    """Superposed packets overlap enough that closed-form moments are off."""


@dataclass(frozen=True)
class Axis:
    x_min: float
    x_max: float
    n_points: int

    @property
    def spacing(self) -> float:
        return (self.x_max - self.x_min) / self.n_points

    @property
    def length(self) -> float:
        return self.x_max - self.x_min


@dataclass(frozen=True)
class GridSpec:
    """Regular periodic grid, one axis per coordinate.

    Points sit at ``x_min + i * dx`` for ``i < n_points``; ``x_max`` is the
    periodic image of ``x_min``.
    """

    axes: tuple[Axis, ...]
    max_points: int = DEFAULT_MAX_POINTS

    def __post_init__(self):
        axes = tuple(a if isinstance(a, Axis) else Axis(*a) for a in self.axes)
        object.__setattr__(self, "axes", axes)
        if not axes:
            raise ValueError("grid needs at least one axis")
        for i, ax in enumerate(axes):
            n = ax.n_points
            if n < 8 or n & (n - 1):
                raise ValueError(f"axis {i}: n_points={n} must be a power of two >= 8")
            if not ax.x_max > ax.x_min:
                raise ValueError(f"axis {i}: x_max must exceed x_min")
        if self.size > self.max_points:
            raise ValueError(
                f"grid has {self.size} points, above the memory guard of {self.max_points}"
            )

    @classmethod
    def uniform(cls, ndim: int, x_min: float, x_max: float, n_points: int, **kw) -> GridSpec:
        return cls(tuple(Axis(x_min, x_max, n_points) for _ in range(ndim)), **kw)

    @property
    def ndim(self) -> int:
        return len(self.axes)

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(a.n_points for a in self.axes)

    @property
    def size(self) -> int:
        return math.prod(self.shape)

    @property
    def spacing(self) -> tuple[float, ...]:
        return tuple(a.spacing for a in self.axes)

    @property
    def cell_volume(self) -> float:
        return math.prod(self.spacing)

    def coords(self, axis: int) -> np.ndarray:
        ax = self.axes[axis]
        return ax.x_min + ax.spacing * np.arange(ax.n_points)

    def wavenumbers(self, axis: int) -> np.ndarray:
        ax = self.axes[axis]
        return 2 * np.pi * np.fft.fftfreq(ax.n_points, d=ax.spacing)

    def _broadcast(self, values: np.ndarray, axis: int) -> np.ndarray:
        shape = [1] * self.ndim
        shape[axis] = -1
        return values.reshape(shape)

    def mesh(self, axis: int) -> np.ndarray:
        """Coordinate values of ``axis`` shaped to broadcast against the grid."""
        return self._broadcast(self.coords(axis), axis)

    def kmesh(self, axis: int) -> np.ndarray:
        return self._broadcast(self.wavenumbers(axis), axis)

    def __add__(self, other: GridSpec) -> GridSpec:
        return GridSpec(self.axes + other.axes, max(self.max_points, other.max_points))


@dataclass(frozen=True, eq=False)
class WaveField:
    """Complex amplitudes of shape ``(spin_components, *grid.shape)``.

    The array is made read-only; operations return new fields.
    """

    grid: GridSpec
    amplitudes: np.ndarray

    def __post_init__(self):
        amp = np.asarray(self.amplitudes, dtype=np.complex128)
        if amp.ndim == self.grid.ndim:
            amp = amp[np.newaxis]
        if amp.shape[1:] != self.grid.shape:
            raise ValueError(f"amplitude shape {amp.shape} does not match grid {self.grid.shape}")
        if amp.flags.writeable:
            amp = amp.view()
            amp.flags.writeable = False
        object.__setattr__(self, "amplitudes", amp)

    @property
    def n_coords(self) -> int:
        return self.grid.ndim

    @property
    def spin_components(self) -> int:
        return self.amplitudes.shape[0]

    def density(self) -> np.ndarray:
        """|psi|^2 summed over spin components (shape ``grid.shape``)."""
        return np.sum(self.amplitudes.real**2 + self.amplitudes.imag**2, axis=0)

    def replace(self, amplitudes: np.ndarray) -> WaveField:
        return WaveField(self.grid, amplitudes)

    def is_finite(self) -> bool:
        return bool(np.isfinite(self.amplitudes).all())


@dataclass(frozen=True)
class PacketSpec:
    center: float = 0.0
    sigma: float = 1.0
    momentum_k: float = 0.0

    def __post_init__(self):
        if not self.sigma > 0:
            raise ValueError("sigma must be positive")


def norm_sq(field: WaveField) -> float:
    return float(field.density().sum() * field.grid.cell_volume)


def inner(a: WaveField, b: WaveField) -> complex:
    """<a|b> by grid quadrature, summed over spin components."""
    return complex(np.vdot(a.amplitudes, b.amplitudes) * a.grid.cell_volume)


def normalize(field: WaveField) -> WaveField:
    n = norm_sq(field)
    if not n > 0:
        raise ValueError("cannot normalize a zero field")
    return field.replace(field.amplitudes / math.sqrt(n))


def _gaussian_1d(x: np.ndarray, center: float, sigma: float, k: float = 0.0) -> np.ndarray:
    # |phi|^2 has standard deviation sigma
    norm = (2 * np.pi * sigma**2) ** -0.25
    return norm * np.exp(-((x - center) ** 2) / (4 * sigma**2) + 1j * k * x)


def _check_support(grid: GridSpec, axis: int, lo: float, hi: float):
    ax = grid.axes[axis]
    if lo < ax.x_min or hi > ax.x_max:
        raise ValueError(
            f"axis {axis}: packet support [{lo:g}, {hi:g}] exceeds grid bounds "
            f"[{ax.x_min:g}, {ax.x_max:g}]"
        )


def _outer(factors: Sequence[np.ndarray]) -> np.ndarray:
    out = factors[0]
    for f in factors[1:]:
        out = np.multiply.outer(out, f)
    return out


def gaussian_packet(grid: GridSpec, specs: Sequence[PacketSpec]) -> WaveField:
    """Normalized product of per-axis Gaussians exp(-(x-c)^2/(4 sigma^2) + i k x)."""
    if len(specs) != grid.ndim:
        raise ValueError(f"need {grid.ndim} packet specs, got {len(specs)}")
    factors = []
    for axis, s in enumerate(specs):
        _check_support(grid, axis, s.center - 6 * s.sigma, s.center + 6 * s.sigma)
        factors.append(_gaussian_1d(grid.coords(axis), s.center, s.sigma, s.momentum_k))
    return normalize(WaveField(grid, _outer(factors)))


def _check_two_site(grid: GridSpec, N: int, r: float, R: float):
    if N != grid.ndim:
        raise ValueError(f"N={N} must equal the grid axis count {grid.ndim}")
    if not r > 0 or R < 0:
        raise ValueError("need r > 0 and R >= 0")
    for axis in range(N):
        _check_support(grid, axis, -R - 3 * r, R + 3 * r)
    if R < 4 * r:
        warnings.warn(
            f"R={R:g} < 4r={4 * r:g}: the two packets overlap, closed-form moments are approximate",
            OverlapWarning,
            stacklevel=3,
        )


def product_superposition_state(grid: GridSpec, N: int, r: float, R: float) -> WaveField:
    """prod_j (phi_r(x_j + R) + phi_r(x_j - R)) / sqrt(2), normalized.

    Each coordinate independently sits at two places; the centroid variance
    is (R^2 + r^2) / N.
    """
    _check_two_site(grid, N, r, R)
    factors = [
        (_gaussian_1d(grid.coords(a), -R, r) + _gaussian_1d(grid.coords(a), R, r)) / math.sqrt(2)
        for a in range(N)
    ]
    return normalize(WaveField(grid, _outer(factors)))


def cat_state(grid: GridSpec, N: int, r: float, R: float) -> WaveField:
    """(prod_j phi_r(x_j + R) + prod_j phi_r(x_j - R)) / sqrt(2), normalized.

    The whole object is at -R or at +R; centroid variance is R^2 + r^2/N.
    """
    _check_two_site(grid, N, r, R)
    left = _outer([_gaussian_1d(grid.coords(a), -R, r) for a in range(N)])
    right = _outer([_gaussian_1d(grid.coords(a), R, r) for a in range(N)])
    return normalize(WaveField(grid, (left + right) / math.sqrt(2)))


def tensor_product(a: WaveField, b: WaveField) -> WaveField:
    """psi_A (x) psi_B on the concatenated grid; spin components must not both exceed 1."""
    if a.spin_components > 1 and b.spin_components > 1:
        raise ValueError("at most one factor may carry spin")
    amp = np.multiply.outer(a.amplitudes, b.amplitudes[0] if b.spin_components == 1 else b.amplitudes)
    if b.spin_components > 1:
        # outer gives (1, *ga, s, *gb); move spin to the front
        amp = np.moveaxis(amp[0], a.grid.ndim, 0)
    return WaveField(a.grid + b.grid, amp)


def attach_spin(field: WaveField, coefficients: Sequence[complex]) -> WaveField:
    """Spinor ``sum_s c_s psi |s>`` from a scalar field, normalized."""
    if field.spin_components != 1:
        raise ValueError("field already carries spin")
    c = np.asarray(coefficients, dtype=np.complex128)
    amp = c.reshape((-1,) + (1,) * field.grid.ndim) * field.amplitudes
    return normalize(WaveField(field.grid, amp))
