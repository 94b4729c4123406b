import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from cnqg.errors import ArityError, HermitianViolation, InvalidField, InvalidTime, MeanNotZero
from cnqg.initial import random_smooth_coeffs
from cnqg.spectral import (
    Grid,
    PhysicalField,
    SpectralField,
    dealias_mask,
    divergence,
    fft,
    forward_transform,
    fractional_laplacian,
    gradient,
    inverse_transform,
    power_symbol,
    riesz_potential,
    riesz_transform,
    semigroup_apply,
    tail_energy_fraction,
)


def grids():
    return st.sampled_from(
        [Grid((32,), (2 * np.pi,)), Grid((64,), (10.0,)), Grid((16, 32), (3.0, 7.0)), Grid((8, 16, 8), (1.0, 2.0, 3.0))]
    )


def test_grid_validation():
    with pytest.raises(ValueError):
        Grid((7,), (1.0,))
    with pytest.raises(ValueError):
        Grid((6,), (1.0,))
    with pytest.raises(ValueError):
        Grid((8, 8), (1.0, 2.0, 3.0))
    assert Grid((8, 8), (2.0,)).lengths == (2.0, 2.0)
    with pytest.raises(ValueError):
        Grid((8,), (-1.0,))


def test_wavenumber_layout():
    g = Grid((8,), (2 * np.pi,))
    assert list(g.mode_numbers[0].ravel()) == [0, 1, 2, 3, -4, -3, -2, -1]
    assert np.allclose(g.wavenumbers[0].ravel(), g.mode_numbers[0].ravel())
    assert g.spacing == (2 * np.pi / 8,)


def test_constant_field_has_only_mean_mode():
    g = Grid.cube(2, 16, 5.0)
    F = forward_transform(PhysicalField(g, np.full(g.shape, 3.5)))
    assert F.mean == pytest.approx(3.5)
    rest = F.coeffs.copy()
    rest[0, 0] = 0
    assert np.abs(rest).max() < 1e-15


def test_cosine_mode_magnitudes():
    g = Grid((64,), (5.0,))
    x = g.coordinates[0]
    c = forward_transform(PhysicalField(g, np.cos(2 * np.pi * x / 5.0))).coeffs
    assert abs(c[1]) == pytest.approx(0.5, abs=1e-15)
    assert abs(c[-1]) == pytest.approx(0.5, abs=1e-15)
    c[[1, -1]] = 0
    assert np.abs(c).max() < 1e-15


def test_inverse_of_single_pair_is_cosine():
    g = Grid((32,), (2 * np.pi,))
    c = np.zeros(32, complex)
    c[3] = c[-3] = 0.5
    f = inverse_transform(SpectralField(g, c)).values
    assert np.abs(f - np.cos(3 * g.coordinates[0])).max() < 1e-14
    assert np.all(inverse_transform(SpectralField(g, np.zeros(32))).values == 0)


def test_matches_direct_dft_sum():
    g = Grid((8,), (1.0,))
    f = np.random.default_rng(0).standard_normal(8)
    n = np.arange(8)
    direct = np.array([np.sum(f * np.exp(-2j * np.pi * k * n / 8)) for k in range(8)]) / 8
    assert np.abs(fft(f, g) - direct).max() < 1e-13


@given(grids(), st.integers(0, 2**31))
def test_round_trip_and_parseval(grid, seed):
    f = np.random.default_rng(seed).standard_normal(grid.shape)
    F = forward_transform(PhysicalField(grid, f))
    back = inverse_transform(F).values
    assert np.abs(back - f).max() <= 1e-12 * np.abs(f).max()
    physical = np.sum(f**2) * grid.cell_volume
    assert grid.volume * np.sum(np.abs(F.coeffs) ** 2) == pytest.approx(physical, rel=1e-12)


def test_hermitian_policies():
    g = Grid((16,), (1.0,))
    c = np.zeros(16, complex)
    c[2] = 1.0
    F = SpectralField(g, c)
    with pytest.raises(HermitianViolation):
        inverse_transform(F)
    sym = inverse_transform(F, hermitian="symmetrize").values
    assert np.allclose(sym, np.cos(2 * np.pi * 2 * g.coordinates[0]) * 1.0)
    inverse_transform(F, hermitian="ignore")


def test_field_validation():
    g = Grid((8,), (1.0,))
    with pytest.raises(InvalidField):
        PhysicalField(g, np.array([np.nan] + [0.0] * 7))
    with pytest.raises(InvalidField):
        PhysicalField(g, np.zeros(9))
    f = PhysicalField(g, np.zeros(8))
    with pytest.raises(ValueError):
        f.values[0] = 1.0


@pytest.mark.parametrize("alpha", [0.0, 0.25, 0.5, 1.0, 1.5, 2.0])
def test_lambda_on_cosine(alpha):
    g = Grid.cube(2, 32, 2 * np.pi)
    x, y = g.mesh()
    f = PhysicalField(g, np.cos(3 * x + 2 * y))
    out = inverse_transform(fractional_laplacian(forward_transform(f), alpha)).values
    assert np.abs(out - 13 ** (alpha / 2) * f.values).max() < 1e-12 * 13 ** (alpha / 2)


def test_lambda_zero_is_identity_on_mean():
    g = Grid((16,), (1.0,))
    F = forward_transform(PhysicalField(g, np.full(16, 2.0)))
    assert fractional_laplacian(F, 0).mean == pytest.approx(2.0)
    assert power_symbol(g, 0)[0] == 1.0


def test_riesz_sine_and_constant():
    g = Grid((64,), (2 * np.pi,))
    x = g.coordinates[0]
    out = inverse_transform(riesz_transform(forward_transform(PhysicalField(g, np.sin(x))))).values
    assert np.abs(out[0] + np.cos(x)).max() < 1e-13
    const = riesz_transform(forward_transform(PhysicalField(g, np.full(64, 4.0))))
    assert np.abs(const.coeffs).max() == 0.0


def test_gradient_and_laplacian_identity(rng):
    g = Grid((16, 32), (3.0, 5.0))
    F = SpectralField(g, random_smooth_coeffs(g, rng))
    lap = divergence(gradient(F)).coeffs
    assert np.abs(lap + fractional_laplacian(F, 2).coeffs).max() < 1e-12 * np.abs(lap).max()
    x, y = g.mesh()
    k = 2 * np.pi * 2 / 3.0
    grad = inverse_transform(gradient(forward_transform(PhysicalField(g, np.cos(k * x))))).values
    assert np.abs(grad[0] + k * np.sin(k * x)).max() < 1e-12 * k
    assert np.abs(grad[1]).max() < 1e-12


def test_arity_errors():
    g = Grid((16,), (1.0,))
    vec = gradient(forward_transform(PhysicalField(g, np.sin(2 * np.pi * g.coordinates[0]))))
    with pytest.raises(ArityError):
        riesz_transform(vec)


def test_negative_order_needs_mean_zero(rng):
    g = Grid.cube(2, 16, 1.0)
    with pytest.raises(MeanNotZero):
        fractional_laplacian(forward_transform(PhysicalField(g, np.ones(g.shape))), -0.5)
    F = SpectralField(g, random_smooth_coeffs(g, rng))
    back = fractional_laplacian(riesz_potential(F, 0.7), 0.7).coeffs
    assert np.abs(back - F.coeffs).max() < 1e-12 * np.abs(F.coeffs).max()


def test_semigroup_identity_law_and_errors(rng):
    g = Grid.cube(2, 16, 4.0)
    F = SpectralField(g, random_smooth_coeffs(g, rng))
    assert np.array_equal(semigroup_apply(F, 0.0, 1.5, 0.3).coeffs, F.coeffs)
    ab = semigroup_apply(semigroup_apply(F, 0.2, 1.5, 0.3), 0.5, 1.5, 0.3).coeffs
    assert np.abs(ab - semigroup_apply(F, 0.7, 1.5, 0.3).coeffs).max() < 1e-12 * np.abs(F.coeffs).max()
    with pytest.raises(InvalidTime):
        semigroup_apply(F, -1.0, 1.5, 0.3)
    decayed = semigroup_apply(F, 1.0, 0.0, 0.5).coeffs
    assert np.allclose(decayed, np.exp(-0.5) * F.coeffs, rtol=1e-14)


def test_dealias_mask_and_tail():
    g = Grid((12,), (1.0,))
    assert list(dealias_mask(g, 2 / 3).ravel()) == [True] * 5 + [False] * 3 + [True] * 4
    c = np.zeros(12, complex)
    c[1] = c[-1] = 1
    assert tail_energy_fraction(c, g) == 0.0
    c[6] = 1
    assert tail_energy_fraction(c, g) == pytest.approx(1 / 3)
