"""Initial-condition generators, selectable by name from run configurations."""

from __future__ import annotations

import numpy as np

from .grid import GridSpec, coords, k_squared, l2_norm_sq, radius_sq

__all__ = ["gaussian", "ring", "random_band_limited", "make_initial", "GENERATORS"]


def gaussian(grid: GridSpec, width: float = 1.0, amplitude: float = 1.0,
             phase_ramp: float = 0.0) -> np.ndarray:
    """Centered Gaussian amplitude * exp(-|x|^2 / (2 width^2) + i phase_ramp x_1)."""
    if width <= 0:
        raise ValueError("width must be positive")
    u = amplitude * np.exp(-radius_sq(grid) / (2.0 * width * width))
    out = u.astype(np.complex128)
    if phase_ramp != 0.0:
        x1 = coords(grid)[0] - grid.center
        out = out * np.exp(1j * phase_ramp * x1)
    return out


def ring(grid: GridSpec, radius: float = 3.0, width: float = 1.0,
         amplitude: float = 1.0) -> np.ndarray:
    """Radial shell amplitude * exp(-(|x| - radius)^2 / (2 width^2))."""
    if width <= 0 or radius < 0:
        raise ValueError("radius must be nonnegative and width positive")
    r = np.sqrt(radius_sq(grid))
    return (amplitude * np.exp(-((r - radius) ** 2) / (2.0 * width * width))
            ).astype(np.complex128)


def random_band_limited(grid: GridSpec, seed: int, cutoff: float,
                        amplitude: float = 1.0) -> np.ndarray:
    """Random spectrum supported on |k| <= cutoff, rescaled to L^2 norm amplitude.

    Deterministic for a fixed (grid, seed, cutoff, amplitude).
    """
    if cutoff <= 0:
        raise ValueError("cutoff must be positive")
    rng = np.random.default_rng(seed)
    spectrum = rng.standard_normal(grid.shape) + 1j * rng.standard_normal(grid.shape)
    spectrum[k_squared(grid) > cutoff * cutoff] = 0.0
    u = np.fft.ifftn(spectrum)
    norm = np.sqrt(l2_norm_sq(grid, u))
    if norm == 0.0:
        raise ValueError("cutoff excludes every mode")
    return (amplitude / norm) * u


GENERATORS = {
    "gaussian": gaussian,
    "ring": ring,
    "random-band-limited": random_band_limited,
}


def make_initial(grid: GridSpec, kind: str, params: dict | None = None,
                 seed: int | None = None) -> np.ndarray:
    """Build a named initial condition; ``seed`` feeds the random generators."""
    if kind not in GENERATORS:
        raise ValueError(f"unknown initial condition '{kind}' "
                         f"(choices: {sorted(GENERATORS)})")
    kwargs = dict(params or {})
    if kind == "random-band-limited":
        kwargs.setdefault("seed", 0 if seed is None else seed)
        if seed is not None:
            kwargs["seed"] = seed
    return GENERATORS[kind](grid, **kwargs)
