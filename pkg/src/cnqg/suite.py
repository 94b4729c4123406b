"""Randomized invariant checks behind the ``property-suite`` subcommand.

Every check takes a generator and a trial count and returns a
:class:`CheckResult`.  Cheap algebraic checks run ``trials`` random cases;
quadrature-based ones run a fraction of that so the default stays fast.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .diagnostics import lp_norm, pointwise_lemma_check
from .initial import gaussian_bump, random_smooth_coeffs, random_smooth_field
from .oracle import lambda_alpha_quadrature, riesz_quadrature, riesz_symmetrization_check
from .solver import SolverConfig, advective_term, nonlinear_term
from .spectral import (
    Grid,
    PhysicalField,
    SpectralField,
    divergence,
    fft,
    forward_transform,
    fractional_laplacian,
    gradient,
    ifft,
    inverse_transform,
    riesz_transform,
    semigroup_apply,
)

EXACT = 1e-12


@dataclass(frozen=True)
class CheckResult:
    name: str
    cases: int
    worst: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return bool(self.worst <= self.tolerance)


def _rel(a: np.ndarray, b: np.ndarray) -> float:
    scale = max(float(np.abs(b).max()), float(np.abs(a).max()), 1e-300)
    return float(np.abs(a - b).max()) / scale


def _random_grid(rng: np.random.Generator) -> Grid:
    dim = int(rng.integers(1, 4))
    points = {1: (32, 64, 128), 2: (16, 32, 64), 3: (8, 16)}[dim]
    return Grid(
        tuple(int(rng.choice(points)) for _ in range(dim)),
        tuple(float(rng.uniform(1.0, 20.0)) for _ in range(dim)),
    )


def _random_spectral(rng: np.random.Generator, grid: Grid | None = None) -> SpectralField:
    grid = _random_grid(rng) if grid is None else grid
    return SpectralField(grid, random_smooth_coeffs(grid, rng))


def _apply(F: SpectralField) -> np.ndarray:
    return inverse_transform(F, hermitian="symmetrize").values


def check_round_trip(rng: np.random.Generator, trials: int) -> CheckResult:
    worst = 0.0
    for _ in range(trials):
        grid = _random_grid(rng)
        f = PhysicalField(grid, rng.standard_normal(grid.shape))
        worst = max(worst, _rel(inverse_transform(forward_transform(f)).values, f.values))
    return CheckResult("round-trip", trials, worst, EXACT)


def check_parseval(rng: np.random.Generator, trials: int) -> CheckResult:
    worst = 0.0
    for _ in range(trials):
        grid = _random_grid(rng)
        values = rng.standard_normal(grid.shape)
        physical = float(np.sum(values**2) * grid.cell_volume)
        spectral = float(grid.volume * np.sum(np.abs(fft(values, grid)) ** 2))
        worst = max(worst, abs(physical - spectral) / physical)
    return CheckResult("parseval", trials, worst, EXACT)


def check_operator_symbols(rng: np.random.Generator, trials: int) -> CheckResult:
    """Pure cosine modes against closed-form actions of Lambda^a, R_j, grad and the semigroup."""
    worst = 0.0
    for _ in range(trials):
        grid = _random_grid(rng)
        modes = [int(rng.integers(-m // 4, m // 4 + 1)) for m in grid.points]
        if not any(modes):
            modes[0] = 1
        k = np.array([2 * np.pi * m / length for m, length in zip(modes, grid.lengths)])
        kmag = float(np.linalg.norm(k))
        phase = sum(kj * x for kj, x in zip(k, grid.mesh()))
        f = PhysicalField(grid, np.cos(phase))
        F = forward_transform(f)
        alpha = float(rng.choice([0.25, 0.5, 1.0, 1.5, 2.0]))
        nu, t = float(rng.uniform(0.1, 1.0)), float(rng.uniform(0.0, 1.0))
        worst = max(worst, _rel(_apply(fractional_laplacian(F, alpha)), kmag**alpha * np.cos(phase)))
        riesz = _apply(riesz_transform(F))
        grad = _apply(gradient(F))
        for j in range(grid.dim):
            worst = max(worst, _rel(riesz[j], k[j] / kmag * np.sin(phase)))
            worst = max(worst, _rel(grad[j], -k[j] * np.sin(phase)))
        # Semigroup: amplitude ratio at the excited mode (decay can reach roundoff in physical space).
        index = tuple(m % n for m, n in zip(modes, grid.points))
        ratio = semigroup_apply(F, t, alpha, nu).coeffs[index] / F.coeffs[index]
        expected = np.exp(-nu * kmag**alpha * t)
        worst = max(worst, abs(ratio - expected) / expected)
    return CheckResult("operator-symbols", trials, worst, EXACT)


def check_commutation(rng: np.random.Generator, trials: int) -> CheckResult:
    worst = 0.0
    for _ in range(trials):
        F = _random_spectral(rng)
        s = float(rng.uniform(0.0, 2.0))
        a = gradient(fractional_laplacian(F, s)).coeffs
        b = np.stack([fractional_laplacian(gradient(F).component(j), s).coeffs for j in range(F.grid.dim)])
        worst = max(worst, _rel(a, b))
    return CheckResult("plam-commutation", trials, worst, EXACT)


def check_composition(rng: np.random.Generator, trials: int) -> CheckResult:
    worst = 0.0
    for _ in range(trials):
        F = _random_spectral(rng)
        a, b = float(rng.uniform(0.0, 2.0)), float(rng.uniform(-0.4, 1.0))
        composed = fractional_laplacian(fractional_laplacian(F, a), b).coeffs
        worst = max(worst, _rel(composed, fractional_laplacian(F, a + b).coeffs))
    return CheckResult("plam-composition", trials, worst, EXACT)


def check_gradient_norm(rng: np.random.Generator, trials: int) -> CheckResult:
    """``||grad f||_2 = ||Lambda f||_2`` on the torus."""
    worst = 0.0
    for _ in range(trials):
        F = _random_spectral(rng)
        g = lp_norm(PhysicalField(F.grid, _apply(gradient(F))), 2)
        lam = lp_norm(PhysicalField(F.grid, _apply(fractional_laplacian(F, 1.0))), 2)
        worst = max(worst, abs(g - lam) / lam)
    return CheckResult("plam-gradient-norm", trials, worst, EXACT)


def check_riesz_bound(rng: np.random.Generator, trials: int) -> CheckResult:
    """Violation of ``||R f||_2 <= ||f||_2`` (relative, positive means broken)."""
    worst = 0.0
    for _ in range(trials):
        grid = _random_grid(rng)
        f = PhysicalField(grid, rng.standard_normal(grid.shape))
        r = lp_norm(PhysicalField(grid, _apply(riesz_transform(forward_transform(f)))), 2)
        worst = max(worst, r / lp_norm(f, 2) - 1.0)
    return CheckResult("plam-riesz-bound", trials, worst, EXACT)


def check_riesz_divergence(rng: np.random.Generator, trials: int) -> CheckResult:
    """``div R f = Lambda f``."""
    worst = 0.0
    for _ in range(trials):
        F = _random_spectral(rng)
        worst = max(worst, _rel(divergence(riesz_transform(F)).coeffs, fractional_laplacian(F, 1.0).coeffs))
    return CheckResult("riesz-divergence", trials, worst, EXACT)


def check_semigroup_law(rng: np.random.Generator, trials: int) -> CheckResult:
    worst = 0.0
    for _ in range(trials):
        F = _random_spectral(rng)
        alpha, nu, eps = float(rng.uniform(0, 2)), float(rng.uniform(0, 1)), float(rng.uniform(0, 0.1))
        t1, t2 = (float(x) for x in rng.uniform(0, 1, 2))
        two = semigroup_apply(semigroup_apply(F, t1, alpha, nu, eps), t2, alpha, nu, eps).coeffs
        worst = max(worst, _rel(two, semigroup_apply(F, t1 + t2, alpha, nu, eps).coeffs))
    return CheckResult("semigroup-law", trials, worst, EXACT)


def check_pointwise_lemma(rng: np.random.Generator, trials: int) -> CheckResult:
    """Worst ``violation / tolerance`` over s in {0.5, 1, 1.5, 2} and p in {2, 3, 4}."""
    grid = Grid.cube(2, 64, 2 * np.pi)
    worst = -np.inf
    for _ in range(trials):
        f = random_smooth_field(grid, rng, max_mode_fraction=0.1)
        for s in (0.5, 1.0, 1.5, 2.0):
            for p in (2.0, 3.0, 4.0):
                rep = pointwise_lemma_check(f, s, p)
                worst = max(worst, rep.worst_violation / rep.tolerance)
    return CheckResult("pointwise-lemma", trials, float(worst), 1.0)


def _bump_pair(rng: np.random.Generator, grid: Grid) -> tuple[PhysicalField, PhysicalField]:
    lo, hi = grid.lengths[0] / 3, 2 * grid.lengths[0] / 3
    c1, c2 = rng.uniform(lo, hi, (2, grid.dim))
    f = gaussian_bump(grid, 1.0, 0.8, tuple(c1)).values + 0.7 * gaussian_bump(grid, 1.0, 0.6, tuple(c2)).values
    x = grid.mesh()
    phi = np.sin(2 * np.pi * x[0] / grid.lengths[0]) + gaussian_bump(grid, 1.0, 2.0, tuple(c2)).values
    return PhysicalField(grid, f), PhysicalField(grid, phi)


def check_riesz_symmetrization(rng: np.random.Generator, trials: int) -> CheckResult:
    """Relative gap between the spectral and symmetrized-kernel forms; budget 5%."""
    grid = Grid.cube(2, 48, 12.0)
    cases = max(1, trials // 25)
    worst = 0.0
    for _ in range(cases):
        f, phi = _bump_pair(rng, grid)
        worst = max(worst, riesz_symmetrization_check(f, phi).rel_err)
    return CheckResult("riesz-symmetrization", cases, worst, 0.05)


def check_quadrature_linearity(rng: np.random.Generator, trials: int) -> CheckResult:
    grid = Grid.cube(2, 32, 8.0)
    cases = max(1, trials // 25)
    worst = 0.0
    for _ in range(cases):
        f, g = (random_smooth_field(grid, rng) for _ in range(2))
        a, b = (float(x) for x in rng.uniform(-2, 2, 2))
        combo = PhysicalField(grid, a * f.values + b * g.values)
        alpha = float(rng.uniform(0.25, 1.75))
        lhs = lambda_alpha_quadrature(combo, alpha).values
        rhs = a * lambda_alpha_quadrature(f, alpha).values + b * lambda_alpha_quadrature(g, alpha).values
        worst = max(worst, _rel(lhs, rhs))
        lhs = riesz_quadrature(combo).values
        rhs = a * riesz_quadrature(f).values + b * riesz_quadrature(g).values
        worst = max(worst, _rel(lhs, rhs))
    return CheckResult("quadrature-linearity", cases, worst, 1e-10)


def check_quadrature_constants(rng: np.random.Generator, trials: int) -> CheckResult:
    """Quadrature of a constant field is zero for every order and for the Riesz kernel."""
    grid = Grid.cube(2, 32, 8.0)
    cases = max(1, trials // 25)
    worst = 0.0
    for _ in range(cases):
        c = float(rng.uniform(-5, 5))
        f = PhysicalField(grid, np.full(grid.shape, c))
        for alpha in (0.25, 0.5, 1.0, 1.5):
            worst = max(worst, float(np.abs(lambda_alpha_quadrature(f, alpha).values).max()) / abs(c))
        worst = max(worst, float(np.abs(riesz_quadrature(f).values).max()) / abs(c))
    return CheckResult("quadrature-constants", cases, worst, 1e-12)


def check_holder_interpolation(rng: np.random.Generator, trials: int) -> CheckResult:
    """``||f||_r <= ||f||_p^t ||f||_q^{1-t}`` with ``1/r = t/p + (1-t)/q``; worst relative excess."""
    worst = -np.inf
    for _ in range(trials):
        grid = _random_grid(rng)
        f = PhysicalField(grid, ifft(random_smooth_coeffs(grid, rng), grid))
        p, q = sorted(float(x) for x in rng.uniform(1.0, 8.0, 2))
        t = float(rng.uniform(0, 1))
        r = 1 / (t / p + (1 - t) / q)
        bound = lp_norm(f, p) ** t * lp_norm(f, q) ** (1 - t)
        worst = max(worst, lp_norm(f, r) / bound - 1.0)
    return CheckResult("holder-interpolation", trials, float(worst), EXACT)


def check_nonlinear_forms(rng: np.random.Generator, trials: int) -> CheckResult:
    """``div(u f)`` equals ``u . grad f + f Lambda f`` for band-limited ``f``."""
    cfg = SolverConfig(alpha=1.0, nu=0.0, t_end=1.0)
    worst = 0.0
    for _ in range(trials):
        F = _random_spectral(rng)
        worst = max(worst, _rel(nonlinear_term(F, cfg).coeffs, advective_term(F, cfg).coeffs))
    return CheckResult("nonlinear-forms", trials, worst, 1e-10)


CHECKS: dict[str, Callable[[np.random.Generator, int], CheckResult]] = {
    "round-trip": check_round_trip,
    "parseval": check_parseval,
    "operator-symbols": check_operator_symbols,
    "plam-commutation": check_commutation,
    "plam-composition": check_composition,
    "plam-gradient-norm": check_gradient_norm,
    "plam-riesz-bound": check_riesz_bound,
    "riesz-divergence": check_riesz_divergence,
    "semigroup-law": check_semigroup_law,
    "pointwise-lemma": check_pointwise_lemma,
    "riesz-symmetrization": check_riesz_symmetrization,
    "quadrature-linearity": check_quadrature_linearity,
    "quadrature-constants": check_quadrature_constants,
    "holder-interpolation": check_holder_interpolation,
    "nonlinear-forms": check_nonlinear_forms,
}


def run_suite(seed: int = 0, trials: int = 25, only: str | None = None) -> list[CheckResult]:
    """Run every registered check (or just ``only``) with independent child generators."""
    if only is not None and only not in CHECKS:
        raise KeyError(f"unknown check {only!r}; choose from {sorted(CHECKS)}")
    names = [only] if only else list(CHECKS)
    children = np.random.SeedSequence(seed).spawn(len(CHECKS))
    seeds = dict(zip(CHECKS, children))
    return [CHECKS[name](np.random.default_rng(seeds[name]), trials) for name in names]
