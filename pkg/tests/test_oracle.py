import math

import mpmath
import numpy as np
import pytest

from cnqg.errors import NotLocalized, SignViolation, TooExpensive, UnsupportedOrder
from cnqg.initial import gaussian_bump
from cnqg.oracle import (
    QuadratureSpec,
    epstein_zeta,
    interior_relative_error,
    lambda_alpha_quadrature,
    lambda_constant,
    riesz_constant,
    riesz_quadrature,
    riesz_symmetrization_check,
    virial_rhs,
)
from cnqg.spectral import Grid, PhysicalField, forward_transform, fractional_laplacian, inverse_transform, riesz_transform


def test_kernel_constants_in_one_dimension():
    assert lambda_constant(1, 1.0) == pytest.approx(1 / math.pi, rel=1e-14)
    assert riesz_constant(1) == pytest.approx(1 / math.pi, rel=1e-14)
    # 2-D Riesz kernel constant is 1/(2 pi).
    assert riesz_constant(2) == pytest.approx(1 / (2 * math.pi), rel=1e-14)


def test_lattice_zeta_values():
    assert epstein_zeta(2.0, 1) == pytest.approx(math.pi**2 / 3, rel=1e-12)
    assert epstein_zeta(0.0, 2) == pytest.approx(-1.0, abs=1e-12)
    beta = mpmath.dirichlet(1.5, [0, 1, 0, -1])
    assert epstein_zeta(3.0, 2) == pytest.approx(float(4 * mpmath.zeta(1.5) * beta), rel=1e-10)
    # Analytic continuation below the convergence abscissa: 1-D reduces to 2 zeta(s).
    assert epstein_zeta(0.5, 1) == pytest.approx(float(2 * mpmath.zeta(0.5)), rel=1e-10)


@pytest.mark.parametrize("alpha,budget", [(0.25, 0.05), (0.5, 0.02), (1.0, 0.02), (1.5, 0.02)])
def test_lambda_matches_spectral_1d(alpha, budget):
    g = Grid((256,), (40.0,))
    f = gaussian_bump(g, 1.0, 1.5)
    spectral = inverse_transform(fractional_laplacian(forward_transform(f), alpha)).values
    quad = lambda_alpha_quadrature(f, alpha).values
    assert interior_relative_error(spectral, quad, g, 0.25) <= budget


def test_free_space_variant_converges_with_box_size():
    # The spectral reference is periodic; the free-space sum misses the image
    # contributions, which shrink like 1/L for the Riesz kernel.
    errors = []
    for points, length in ((256, 40.0), (512, 80.0), (1024, 160.0)):
        g = Grid((points,), (length,))
        f = gaussian_bump(g, 1.0, 1.5)
        spectral = inverse_transform(riesz_transform(forward_transform(f))).values
        quad = riesz_quadrature(f, QuadratureSpec(periodic=False)).values
        errors.append(interior_relative_error(spectral, quad, g, 0.25))
    assert errors[0] / errors[1] == pytest.approx(2.0, rel=0.1)
    assert errors[1] / errors[2] == pytest.approx(2.0, rel=0.1)


def test_free_space_variant_rejects_unlocalized_data():
    g = Grid((64,), (10.0,))
    f = PhysicalField(g, 1 + np.sin(2 * np.pi * g.coordinates[0] / 10))
    with pytest.raises(NotLocalized):
        lambda_alpha_quadrature(f, 1.0, QuadratureSpec(periodic=False))


def test_constant_field_gives_zero():
    g = Grid.cube(2, 32, 8.0)
    f = PhysicalField(g, np.full(g.shape, 2.3))
    for alpha in (0.25, 1.0, 1.9):
        assert np.abs(lambda_alpha_quadrature(f, alpha).values).max() == 0.0
    assert np.abs(riesz_quadrature(f).values).max() < 1e-12


def test_order_and_budget_errors():
    g = Grid.cube(2, 256, 8.0)
    f = PhysicalField(g, np.zeros(g.shape))
    with pytest.raises(TooExpensive):
        lambda_alpha_quadrature(f, 1.0)
    assert lambda_alpha_quadrature(f, 1.0, QuadratureSpec(subsample=2)).grid.points == (128, 128)
    with pytest.raises(UnsupportedOrder):
        lambda_alpha_quadrature(f, 2.0, QuadratureSpec(subsample=4))
    with pytest.raises(UnsupportedOrder):
        lambda_alpha_quadrature(f, 0.0, QuadratureSpec(subsample=4))


def test_symmetrization_constant_phi_vanishes():
    g = Grid.cube(2, 48, 12.0)
    f = gaussian_bump(g, 1.0, 0.8, (5.0, 6.5))
    res = riesz_symmetrization_check(f, PhysicalField(g, np.full(g.shape, 3.0)))
    norm2 = float(np.sum(f.values**2) * g.cell_volume)
    assert np.abs(res.lhs).max() <= 1e-3 * norm2
    assert np.abs(res.rhs).max() <= 1e-3 * norm2


def test_virial_rhs_gaussian_closed_form():
    g = Grid.cube(2, 64, 16.0)
    x, y = g.mesh()
    theta = PhysicalField(g, np.exp(-((x - 8) ** 2 + (y - 8) ** 2) / 2))
    # x - y of two standard 2-D Gaussians is N(0, 2I); E|Z|^{-1} = sqrt(pi/2)/sqrt(2).
    exact = (2 * np.pi) ** 2 * np.sqrt(np.pi / 2) / np.sqrt(2)
    assert virial_rhs(theta) == pytest.approx(exact, rel=1e-3)
    with pytest.raises(SignViolation):
        virial_rhs(PhysicalField(g, np.sin(x)))


def test_virial_rhs_one_dimension_is_mass_squared():
    g = Grid((128,), (20.0,))
    x = g.coordinates[0]
    theta = np.exp(-((x - 10) ** 2) / 2)
    mass = theta.sum() * g.cell_volume
    assert virial_rhs(PhysicalField(g, theta)) == pytest.approx(mass**2, rel=1e-12)
