"""Built-in initial data and random smooth test fields."""

from __future__ import annotations

import numpy as np

from .spectral import Grid, PhysicalField, ifft, reflect


def _radius2(grid: Grid, center: tuple[float, ...] | None = None) -> np.ndarray:
    center = grid.center if center is None else center
    return sum((x - c) ** 2 for x, c in zip(grid.mesh(), center))


def gaussian_bump(grid: Grid, amplitude: float = 1.0, width: float = 1.0, center=None) -> PhysicalField:
    return PhysicalField(grid, amplitude * np.exp(-_radius2(grid, center) / (2 * width**2)))


def compact_bump(grid: Grid, radius: float, center=None) -> np.ndarray:
    """``exp(1 - 1 / (1 - r^2))`` for ``r = |x - c| / radius < 1``, else 0; peak value 1."""
    r2 = _radius2(grid, center) / radius**2
    out = np.zeros(grid.shape)
    inside = r2 < 1.0
    out[inside] = np.exp(1.0 - 1.0 / (1.0 - r2[inside]))
    return out


def negative_bump(grid: Grid, amplitude: float = 1.0, radius: float = 1.0) -> PhysicalField:
    """Compactly supported smooth bump ``-amplitude * psi`` centred on the box."""
    return PhysicalField(grid, -amplitude * compact_bump(grid, radius))


def multi_bump(grid: Grid, amplitude: float = 1.0, width: float = 1.0) -> PhysicalField:
    """Three Gaussians at fixed offsets from the centre, with unequal weights."""
    c = np.array(grid.center)
    lengths = np.array(grid.lengths)
    offsets = [np.zeros(grid.dim), 0.12 * lengths, -0.1 * lengths * np.eye(grid.dim)[0]]
    weights = [1.0, 0.6, 0.8]
    values = np.zeros(grid.shape)
    for w, off in zip(weights, offsets):
        values += w * np.exp(-_radius2(grid, tuple(c + off)) / (2 * width**2))
    return PhysicalField(grid, amplitude * values / values.max())


def random_smooth_coeffs(grid: Grid, rng: np.random.Generator, max_mode_fraction: float = 0.15) -> np.ndarray:
    """Random Hermitian, mean-zero coefficients supported on ``|m_i| <= fraction * M_i``.

    Amplitudes taper smoothly towards the cutoff so the field is resolved.
    """
    shape = grid.shape
    c = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
    radius2 = np.zeros(shape)
    keep = np.ones(shape, dtype=bool)
    for m, npts in zip(grid.mode_numbers, grid.points):
        cut = max(1, int(max_mode_fraction * npts))
        keep = keep & (np.abs(m) <= cut)
        radius2 = radius2 + (m / cut) ** 2
    c *= keep * np.exp(-4.0 * radius2)
    c = 0.5 * (c + np.conj(reflect(c, grid)))
    c[(0,) * grid.dim] = 0.0
    return c


def random_smooth_field(
    grid: Grid,
    rng: np.random.Generator,
    amplitude: float = 1.0,
    nonnegative: bool = False,
    max_mode_fraction: float = 0.15,
) -> PhysicalField:
    """Band-limited random field with ``max |f| = amplitude``.

    With ``nonnegative`` the field is shifted and scaled into ``[0, amplitude]``.
    """
    values = ifft(random_smooth_coeffs(grid, rng, max_mode_fraction), grid)
    values = values / np.abs(values).max()
    if nonnegative:
        values = 0.5 * (values + 1.0)
    return PhysicalField(grid, amplitude * values)


def constant_field(grid: Grid, value: float) -> PhysicalField:
    return PhysicalField(grid, np.full(grid.shape, float(value)))
