"""Centroid, dispersion, momentum and reduced-density functionals.

For a coordinate group x_1..x_N the centroid is X = <(1/N) sum x_j> and the
dispersion D_N is the variance of that average. It splits exactly into a
single-coordinate size term and a two-coordinate term,

    D_N = (1 - 1/N) C2 + (1/N) L2,

with L2 and C2 built from the (symmetrized) one- and two-coordinate
marginals.
"""

from __future__ import annotations

import itertools
import warnings
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
import scipy.fft as sfft

from .hamiltonians import ExternalPoly, HamiltonianSpec, LinearCoupling, _resolve
from .wavefield import WaveField


class AsymmetryWarning(UserWarning):
    """Field is not symmetric under interchange of the selected coordinates."""


@dataclass(frozen=True)
class MomentReport:
    X: float
    D_N: float
    P_total: float
    L2: float
    C2: Optional[float]  # None when N == 1
    means: tuple[float, ...]
    variances: tuple[float, ...]

    @property
    def N(self) -> int:
        return len(self.means)


def _marginal(rho: np.ndarray, keep: Sequence[int]) -> np.ndarray:
    drop = tuple(i for i in range(rho.ndim) if i not in keep)
    return rho.sum(axis=drop) if drop else rho


def moments(field: WaveField, coords: Optional[Sequence[int]] = None, *, hbar: float = 1.0) -> MomentReport:
    """All centroid functionals over ``coords`` (default: every axis)."""
    grid = field.grid
    cs = _resolve(coords, grid.ndim)
    if not cs:
        raise ValueError("coordinate subset must be non-empty")
    N = len(cs)
    dv = grid.cell_volume
    rho = field.density()

    first, second = [], []
    for j in cs:
        m = _marginal(rho, (j,)) * dv
        x = grid.coords(j)
        first.append(float(m @ x))
        second.append(float(m @ x**2))
    cross = 0.0
    for j, k in itertools.combinations(cs, 2):
        m = _marginal(rho, (j, k)) * dv
        if j > k:
            m = m.T
        cross += 2 * float(grid.coords(j) @ m @ grid.coords(k))

    X = sum(first) / N
    L2 = sum(second) / N - X**2
    D_N = (sum(second) + cross) / N**2 - X**2
    C2 = cross / (N * (N - 1)) - X**2 if N > 1 else None

    P = 0.0
    amp = field.amplitudes
    for j in cs:
        a = j + 1
        psi_k = sfft.fft(amp, axis=a)
        k = grid.wavenumbers(j).reshape([-1 if i == a else 1 for i in range(amp.ndim)])
        P += float(np.sum(k * (psi_k.real**2 + psi_k.imag**2))) * dv / grid.axes[j].n_points
    return MomentReport(
        X=X,
        D_N=D_N,
        P_total=hbar * P,
        L2=L2,
        C2=C2,
        means=tuple(first),
        variances=tuple(s - f**2 for f, s in zip(first, second)),
    )


def is_symmetric(field: WaveField, coords: Sequence[int], rtol: float = 1e-8) -> bool:
    rho = field.density()
    scale = rho.max()
    for j, k in itertools.combinations(coords, 2):
        if field.grid.axes[j] != field.grid.axes[k]:
            return False
        if np.abs(rho - np.swapaxes(rho, j, k)).max() > rtol * scale:
            return False
    return True


def reduced_density(field: WaveField, k: int, coords: Optional[Sequence[int]] = None) -> np.ndarray:
    """k-th reduced density (k = 1 or 2) over the first k coordinates of ``coords``.

    The remaining coordinates of the group, and every coordinate outside
    it, are integrated out. Values are densities (per unit length^k).
    """
    cs = _resolve(coords, field.grid.ndim)
    if k not in (1, 2) or k > len(cs):
        raise ValueError(f"k={k} not available for {len(cs)} coordinates")
    if not is_symmetric(field, cs):
        warnings.warn(
            "field is not interchange-symmetric; reducing onto the leading coordinates",
            AsymmetryWarning,
            stacklevel=2,
        )
    keep = cs[:k]
    rho = field.density()
    drop = tuple(i for i in range(rho.ndim) if i not in keep)
    out = rho.sum(axis=drop) * np.prod([field.grid.spacing[i] for i in drop])
    if k == 2 and keep[0] > keep[1]:
        out = out.T
    return out


@dataclass(frozen=True)
class EhrenfestReport:
    """Second-derivative balance of the centroid.

    ``residual`` is m X'' + (1/N) sum <dV/dx_k> (all static terms). For
    polynomial externals, ``naive`` is m X'' + V'(X) and ``corrected`` is
    ``naive + 3 c L2``.
    """

    times: np.ndarray
    residual: np.ndarray
    naive: np.ndarray
    corrected: np.ndarray
    force: np.ndarray
    L2: np.ndarray
    fd_error: np.ndarray
    scale: float


def _second_derivative(x: np.ndarray, h: float):
    """Five-point central second difference on interior samples, with an error estimate."""
    d5 = (-x[:-4] + 16 * x[1:-3] - 30 * x[2:-2] + 16 * x[3:-1] - x[4:]) / (12 * h**2)
    d3 = (x[1:-3] - 2 * x[2:-2] + x[3:-1]) / h**2
    return d5, np.abs(d5 - d3)


def mean_force(field: WaveField, ham: HamiltonianSpec, coords: Sequence[int]) -> float:
    """(1/N) sum_k <psi| dV/dx_k |psi> over the static potential terms."""
    grid = field.grid
    total = 0.0
    amp2 = field.amplitudes.real**2 + field.amplitudes.imag**2
    for term in ham.potentials:
        for j in coords:
            total += float(np.sum(term.gradient(grid, j) * amp2)) * grid.cell_volume
    return total / len(coords)


def ehrenfest_residual(traj, ham: HamiltonianSpec, field_samples: Sequence[WaveField],
                       coords: Optional[Sequence[int]] = None) -> EhrenfestReport:
    """Check m X'' = -(1/N) sum <V'(x_k)> - alpha <y> along a sampled trajectory.

    X'' comes from five-point central differences of ``traj.X``, so the
    samples must be uniformly spaced. The nonlinear term is deliberately not
    part of the force: its contribution to the centroid equation vanishes.
    """
    times = np.asarray(traj.times)
    X = np.asarray(traj.X)
    if len(times) < 5 or len(field_samples) != len(times):
        raise ValueError("need at least 5 samples with a stored field for each")
    h = times[1] - times[0]
    if not np.allclose(np.diff(times), h, rtol=1e-9, atol=0):
        raise ValueError("samples must be uniformly spaced")
    grid = field_samples[0].grid
    cs = tuple(traj.coords) if coords is None else _resolve(coords, grid.ndim)
    masses = {ham.masses[j] for j in cs}
    if len(masses) != 1:
        raise ValueError("centroid equation needs equal masses over the group")
    m = masses.pop()

    acc, fd_err = _second_derivative(X, h)
    inner = slice(2, len(times) - 2)
    force = np.array([mean_force(f, ham, cs) for f in field_samples[inner]])
    L2 = np.asarray(traj.L2)[inner]
    residual = m * acc + force

    polys = [t for t in ham.potentials if isinstance(t, ExternalPoly)]
    Xi = X[inner]
    dV = sum((p.derivative(Xi) for p in polys if set(cs) <= set(_resolve(p.coords, grid.ndim))),
             np.zeros_like(Xi))
    c = sum(p.c for p in polys if set(cs) <= set(_resolve(p.coords, grid.ndim)))
    naive = m * acc + dV
    for t in ham.potentials:
        if isinstance(t, LinearCoupling):
            y = np.array([moments(f, (t.micro,)).X for f in field_samples[inner]])
            naive = naive + t.alpha * y
    corrected = naive + 3 * c * L2
    scale = float(np.max(np.abs(force))) if force.size else 0.0
    return EhrenfestReport(
        times=times[inner],
        residual=residual,
        naive=naive,
        corrected=corrected,
        force=force,
        L2=L2,
        fd_error=m * fd_err,
        scale=scale,
    )
