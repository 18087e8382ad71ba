"""Periodic cubic grids and the spectral/quadrature helpers built on them."""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

__all__ = [
    "GridSpec",
    "axis_coords",
    "coords",
    "radius_sq",
    "wavenumbers",
    "k_squared",
    "l2_norm_sq",
    "grad_norm_sq",
    "lp_integral",
]


@dataclass(frozen=True)
class GridSpec:
    """Uniform periodic box: ``points`` samples per axis over length ``length``.

    The box spans [center - length/2, center + length/2) on every axis.
    """

    dim: int
    points: int
    length: float
    center: float = 0.0

    def __post_init__(self) -> None:
        if self.dim not in (1, 2, 3):
            raise ValueError("grid dimension must be 1, 2 or 3")
        if self.points < 8 or self.points & (self.points - 1):
            raise ValueError("points per axis must be a power of two >= 8")
        if not self.length > 0:
            raise ValueError("box length must be positive")

    @property
    def spacing(self) -> float:
        return self.length / self.points

    @property
    def cell_volume(self) -> float:
        return self.spacing**self.dim

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.points,) * self.dim


@lru_cache(maxsize=64)
def axis_coords(grid: GridSpec) -> np.ndarray:
    """Sample positions along one axis (identical for all axes)."""
    return grid.center - grid.length / 2 + grid.spacing * np.arange(grid.points)


@lru_cache(maxsize=64)
def coords(grid: GridSpec) -> tuple[np.ndarray, ...]:
    """Broadcastable per-axis coordinate arrays."""
    ax = axis_coords(grid)
    return tuple(np.meshgrid(*([ax] * grid.dim), indexing="ij", sparse=True))


@lru_cache(maxsize=64)
def radius_sq(grid: GridSpec) -> np.ndarray:
    """|x - center|^2 on the grid (box-centered coordinates)."""
    out = np.zeros(grid.shape)
    for x in coords(grid):
        out = out + (x - grid.center) ** 2
    return out


@lru_cache(maxsize=64)
def wavenumbers(grid: GridSpec) -> tuple[np.ndarray, ...]:
    """Broadcastable per-axis angular wavenumbers of the discrete transform."""
    k = 2.0 * np.pi * np.fft.fftfreq(grid.points, d=grid.spacing)
    return tuple(np.meshgrid(*([k] * grid.dim), indexing="ij", sparse=True))


@lru_cache(maxsize=64)
def k_squared(grid: GridSpec) -> np.ndarray:
    out = np.zeros(grid.shape)
    for k in wavenumbers(grid):
        out = out + k * k
    return out


def l2_norm_sq(grid: GridSpec, u: np.ndarray) -> float:
    """Grid quadrature of |u|^2 (exact for band-limited periodic data)."""
    return grid.cell_volume * float(np.sum(np.abs(u) ** 2))


def grad_norm_sq(grid: GridSpec, u: np.ndarray, uhat: np.ndarray | None = None) -> float:
    """Spectral evaluation of the gradient's squared L^2 norm."""
    if uhat is None:
        uhat = np.fft.fftn(u)
    weight = grid.cell_volume / grid.points**grid.dim
    return weight * float(np.sum(k_squared(grid) * np.abs(uhat) ** 2))


def lp_integral(grid: GridSpec, u: np.ndarray, power: float) -> float:
    """Grid quadrature of |u|^power."""
    return grid.cell_volume * float(np.sum(np.abs(u) ** power))
