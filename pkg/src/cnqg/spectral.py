"""Periodic grids, FFT transforms and Fourier-multiplier operators.

Coefficients use the mean-normalized convention: ``coeff = fftn(f) / prod(M)``,
so ``coeff[0]`` is the spatial mean and ``sum |f|^2 h^N = V * sum |coeff|^2``.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
import scipy.fft as sfft

from .errors import ArityError, HermitianViolation, InvalidField, InvalidTime, MeanNotZero

HERMITIAN_TOL = 1e-10
MEAN_TOL = 1e-12


def fft_workers() -> int:
    """Worker count for scipy.fft, capped by ``CNQG_THREADS`` when set."""
    value = os.environ.get("CNQG_THREADS")
    if value:
        try:
            return max(1, int(value))
        except ValueError:
            pass
    return 1


@dataclass(frozen=True, eq=True)
class Grid:
    """Uniform periodic box ``[0, L_1) x ... x [0, L_N)`` with ``M_i`` points per axis."""

    points: tuple[int, ...]
    lengths: tuple[float, ...]

    def __post_init__(self) -> None:
        points = tuple(int(m) for m in np.atleast_1d(self.points))
        lengths = tuple(float(x) for x in np.atleast_1d(self.lengths))
        if len(lengths) == 1 and len(points) > 1:
            lengths = lengths * len(points)
        if not 1 <= len(points) <= 3:
            raise InvalidField(f"dimension must be 1, 2 or 3, got {len(points)}")
        if len(lengths) != len(points):
            raise InvalidField("points and lengths must have the same length")
        for m in points:
            if m < 8 or m % 2:
                raise InvalidField(f"points per axis must be even and >= 8, got {m}")
        for length in lengths:
            if not np.isfinite(length) or length <= 0:
                raise InvalidField(f"box length must be positive, got {length}")
        object.__setattr__(self, "points", points)
        object.__setattr__(self, "lengths", lengths)

    @classmethod
    def cube(cls, dim: int, points: int, length: float) -> "Grid":
        return cls((points,) * dim, (length,) * dim)

    @property
    def dim(self) -> int:
        return len(self.points)

    @property
    def shape(self) -> tuple[int, ...]:
        return self.points

    @property
    def size(self) -> int:
        return int(np.prod(self.points))

    @property
    def spacing(self) -> tuple[float, ...]:
        return tuple(length / m for length, m in zip(self.lengths, self.points))

    @property
    def cell_volume(self) -> float:
        return float(np.prod(self.spacing))

    @property
    def volume(self) -> float:
        return float(np.prod(self.lengths))

    @property
    def is_uniform(self) -> bool:
        h = self.spacing
        return bool(np.allclose(h, h[0], rtol=1e-12, atol=0.0))

    def _sparse(self, vectors: list[np.ndarray]) -> tuple[np.ndarray, ...]:
        out = []
        for axis, v in enumerate(vectors):
            shape = [1] * self.dim
            shape[axis] = v.size
            out.append(v.reshape(shape))
        return tuple(out)

    @cached_property
    def mode_numbers(self) -> tuple[np.ndarray, ...]:
        """Signed integer mode index per axis, in ``[-M/2, M/2)``, broadcastable."""
        return self._sparse([np.fft.fftfreq(m, 1.0 / m).astype(np.int64) for m in self.points])

    @cached_property
    def wavenumbers(self) -> tuple[np.ndarray, ...]:
        return tuple(2 * np.pi * m / length for m, length in zip(self.mode_numbers, self.lengths))

    @cached_property
    def odd_wavenumbers(self) -> tuple[np.ndarray, ...]:
        """Wavenumbers with the Nyquist entry zeroed, used by odd symbols.

        The Nyquist mode has no conjugate partner, so an odd symbol there would
        break Hermitian symmetry; zeroing it keeps the output real.
        """
        out = []
        for k, m, npts in zip(self.wavenumbers, self.mode_numbers, self.points):
            out.append(np.where(m == -npts // 2, 0.0, k))
        return tuple(out)

    @cached_property
    def k_squared(self) -> np.ndarray:
        total = np.zeros(self.shape)
        for k in self.wavenumbers:
            total = total + k**2
        return total

    @cached_property
    def k_magnitude(self) -> np.ndarray:
        return np.sqrt(self.k_squared)

    @cached_property
    def coordinates(self) -> tuple[np.ndarray, ...]:
        return self._sparse([np.arange(m) * h for m, h in zip(self.points, self.spacing)])

    @property
    def center(self) -> tuple[float, ...]:
        """Box center; lies on the grid point with index ``M/2``."""
        return tuple(length / 2 for length in self.lengths)

    def mesh(self) -> tuple[np.ndarray, ...]:
        return tuple(np.broadcast_to(x, self.shape) for x in self.coordinates)

    def coarsen(self, stride: int) -> "Grid":
        if stride == 1:
            return self
        return Grid(tuple(m // stride for m in self.points), self.lengths)


def _check_components(grid: Grid, values: np.ndarray) -> int:
    if values.shape == grid.shape:
        return 1
    if values.ndim == grid.dim + 1 and values.shape[1:] == grid.shape and values.shape[0] == grid.dim:
        return grid.dim
    raise InvalidField(f"array shape {values.shape} does not match grid {grid.shape}")


@dataclass(frozen=True, eq=False)
class PhysicalField:
    """Real samples on a grid: shape ``grid.shape`` (scalar) or ``(N, *grid.shape)`` (vector)."""

    grid: Grid
    values: np.ndarray
    components: int = field(init=False)

    def __post_init__(self) -> None:
        values = np.asarray(self.values)
        if np.iscomplexobj(values):
            raise InvalidField("physical field values must be real")
        values = values.astype(np.float64, copy=False)
        components = _check_components(self.grid, values)
        if not np.all(np.isfinite(values)):
            raise InvalidField("field contains non-finite values")
        values.flags.writeable = False
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "components", components)

    @property
    def is_scalar(self) -> bool:
        return self.components == 1 and self.values.shape == self.grid.shape

    def component(self, j: int) -> "PhysicalField":
        return PhysicalField(self.grid, self.values[j])

    def mean(self) -> float:
        return float(self.values.mean())


@dataclass(frozen=True, eq=False)
class SpectralField:
    """Fourier coefficients in the mean-normalized convention."""

    grid: Grid
    coeffs: np.ndarray
    components: int = field(init=False)

    def __post_init__(self) -> None:
        coeffs = np.asarray(self.coeffs, dtype=np.complex128)
        object.__setattr__(self, "coeffs", coeffs)
        object.__setattr__(self, "components", _check_components(self.grid, coeffs))

    @property
    def is_scalar(self) -> bool:
        return self.coeffs.shape == self.grid.shape

    @property
    def mean(self) -> complex:
        return complex(self.coeffs[(0,) * self.grid.dim])

    def component(self, j: int) -> "SpectralField":
        return SpectralField(self.grid, self.coeffs[j])

    def __add__(self, other: "SpectralField") -> "SpectralField":
        return SpectralField(self.grid, self.coeffs + other.coeffs)

    def __sub__(self, other: "SpectralField") -> "SpectralField":
        return SpectralField(self.grid, self.coeffs - other.coeffs)

    def scaled(self, factor: complex) -> "SpectralField":
        return SpectralField(self.grid, factor * self.coeffs)


def _axes(grid: Grid) -> tuple[int, ...]:
    return tuple(range(-grid.dim, 0))


def fft(values: np.ndarray, grid: Grid) -> np.ndarray:
    """Forward transform of raw arrays (last ``N`` axes), mean-normalized."""
    return sfft.fftn(values, axes=_axes(grid), workers=fft_workers()) / grid.size


def ifft(coeffs: np.ndarray, grid: Grid) -> np.ndarray:
    """Inverse of :func:`fft`, real part only."""
    return sfft.ifftn(coeffs * grid.size, axes=_axes(grid), workers=fft_workers()).real


def reflect(coeffs: np.ndarray, grid: Grid) -> np.ndarray:
    """Array indexed by ``-k``: ``out[m] = coeffs[-m mod M]``."""
    axes = _axes(grid)
    return np.roll(np.flip(coeffs, axis=axes), 1, axis=axes)


def hermitian_defect(F: SpectralField) -> float:
    """Largest ``|c(k) - conj(c(-k))|`` relative to the largest coefficient."""
    c = F.coeffs
    scale = np.abs(c).max() if c.size else 0.0
    if scale == 0.0:
        return 0.0
    return float(np.abs(c - np.conj(reflect(c, F.grid))).max() / scale)


def forward_transform(f: PhysicalField) -> SpectralField:
    if not np.all(np.isfinite(f.values)):
        raise InvalidField("field contains non-finite values")
    return SpectralField(f.grid, fft(f.values, f.grid))


def inverse_transform(F: SpectralField, hermitian: str = "check", tol: float = HERMITIAN_TOL) -> PhysicalField:
    """Real field from coefficients.

    ``hermitian`` selects how asymmetric input is handled: ``"check"`` raises
    :class:`HermitianViolation` beyond ``tol``, ``"symmetrize"`` projects onto
    the Hermitian part first, ``"ignore"`` just drops the imaginary part.
    """
    coeffs = F.coeffs
    if hermitian == "check":
        defect = hermitian_defect(F)
        if defect > tol:
            raise HermitianViolation(f"Hermitian defect {defect:.3e} exceeds {tol:.1e}")
    elif hermitian == "symmetrize":
        coeffs = 0.5 * (coeffs + np.conj(reflect(coeffs, F.grid)))
    elif hermitian != "ignore":
        raise ValueError(f"unknown hermitian policy {hermitian!r}")
    return PhysicalField(F.grid, ifft(coeffs, F.grid))


@dataclass(frozen=True, eq=False)
class Multiplier:
    """Diagonal Fourier operator ``out(k) = symbol(k) * in(k)``.

    ``symbol`` has the grid shape (scalar multiplier) or ``(N, *shape)``
    (scalar in, vector out). ``zero_mode`` is ``"zero"``, ``"identity"`` or
    ``"error"``; the latter raises :class:`MeanNotZero` on nonzero-mean input.
    """

    symbol: np.ndarray
    zero_mode: str = "zero"

    def __call__(self, F: SpectralField) -> SpectralField:
        grid = F.grid
        origin = (0,) * grid.dim
        vector_symbol = self.symbol.ndim == grid.dim + 1
        if vector_symbol and not F.is_scalar:
            raise ArityError("vector multiplier needs a scalar input")
        if self.zero_mode == "error":
            means = np.atleast_1d(F.coeffs[(...,) + origin])
            scale = np.abs(F.coeffs).max()
            if np.any(np.abs(means) > MEAN_TOL * max(scale, np.finfo(float).tiny)):
                raise MeanNotZero("operator requires mean-zero input")
        out = self.symbol * F.coeffs
        if self.zero_mode == "identity":
            out[(...,) + origin] = F.coeffs[(...,) + origin]
        else:
            out[(...,) + origin] = 0.0
        return SpectralField(grid, out)


def _require_scalar(F: SpectralField) -> None:
    if not F.is_scalar:
        raise ArityError("operator needs a scalar field")


def power_symbol(grid: Grid, s: float) -> np.ndarray:
    """``|k|^s`` with the zero mode set to 1 for ``s == 0`` and 0 otherwise."""
    kmag = grid.k_magnitude
    if s == 0:
        return np.ones(grid.shape)
    with np.errstate(divide="ignore"):
        sym = kmag**s
    sym[(0,) * grid.dim] = 0.0
    return sym


def fractional_laplacian(F: SpectralField, s: float) -> SpectralField:
    """``Lambda^s``: symbol ``|k|^s``; negative orders require mean-zero input."""
    if s < -F.grid.dim / 2:
        raise ValueError(f"order s={s} below -N/2")
    if s == 0:
        return SpectralField(F.grid, F.coeffs.copy())
    policy = "error" if s < 0 else "zero"
    return Multiplier(power_symbol(F.grid, s), policy)(F)


def riesz_symbol(grid: Grid) -> np.ndarray:
    kmag = grid.k_magnitude.copy()
    kmag[(0,) * grid.dim] = 1.0
    return np.stack([np.broadcast_to(-1j * k / kmag, grid.shape) for k in grid.odd_wavenumbers])


def gradient_symbol(grid: Grid) -> np.ndarray:
    return np.stack([np.broadcast_to(1j * k, grid.shape) for k in grid.odd_wavenumbers])


def riesz_transform(F: SpectralField) -> SpectralField:
    """Vector with components of symbol ``-i k_j / |k|``; zero mode maps to 0."""
    _require_scalar(F)
    return Multiplier(riesz_symbol(F.grid))(F)


def gradient(F: SpectralField) -> SpectralField:
    _require_scalar(F)
    return Multiplier(gradient_symbol(F.grid))(F)


def divergence(F: SpectralField) -> SpectralField:
    if F.is_scalar:
        raise ArityError("divergence needs a vector field")
    sym = gradient_symbol(F.grid)
    return SpectralField(F.grid, np.sum(sym * F.coeffs, axis=0))


def linear_rate(grid: Grid, alpha: float, nu: float, eps: float = 0.0) -> np.ndarray:
    """Per-mode decay rate ``nu |k|^alpha + eps |k|^2`` (``|0|^0 = 1``)."""
    return nu * power_symbol(grid, alpha) + eps * grid.k_squared


def semigroup_apply(F: SpectralField, t: float, alpha: float, nu: float, eps: float = 0.0) -> SpectralField:
    """Exact linear evolution ``exp(-(nu |k|^alpha + eps |k|^2) t)``."""
    if t < 0:
        raise InvalidTime(f"negative time {t}")
    if nu < 0 or eps < 0:
        raise ValueError("nu and eps must be nonnegative")
    if not 0 <= alpha <= 2:
        raise ValueError(f"alpha={alpha} outside [0, 2]")
    factor = np.exp(-linear_rate(F.grid, alpha, nu, eps) * t)
    return SpectralField(F.grid, factor * F.coeffs)


def riesz_potential(F: SpectralField, delta: float) -> SpectralField:
    """``Lambda^{-delta}`` on mean-zero fields, ``0 < delta < N``."""
    if not 0 < delta < F.grid.dim:
        raise ValueError(f"delta={delta} outside (0, N)")
    return Multiplier(power_symbol(F.grid, -delta), "error")(F)


def dealias_mask(grid: Grid, fraction: float) -> np.ndarray:
    """Boolean mask keeping ``|m_i| <= floor(fraction * M_i / 2)`` on every axis."""
    mask = np.ones(grid.shape, dtype=bool)
    for m, npts in zip(grid.mode_numbers, grid.points):
        mask = mask & (np.abs(m) <= int(np.floor(fraction * npts / 2)))
    return mask


def tail_energy_fraction(coeffs: np.ndarray, grid: Grid, fraction: float = 1.0, band: float = 1.0 / 3.0) -> float:
    """Share of fluctuation energy in the top ``band`` of the retained spectrum.

    The retained spectrum is ``|m_i| <= fraction * M_i / 2``; a mode is in the
    tail when ``max_i |m_i| / cutoff_i > 1 - band``.
    """
    ratio = np.zeros(grid.shape)
    for m, npts in zip(grid.mode_numbers, grid.points):
        cutoff = max(np.floor(fraction * npts / 2), 1.0)
        ratio = np.maximum(ratio, np.abs(m) / cutoff)
    energy = np.abs(coeffs) ** 2
    energy[(0,) * grid.dim] = 0.0
    total = energy.sum()
    if total == 0.0:
        return 0.0
    return float(energy[ratio > 1.0 - band].sum() / total)

