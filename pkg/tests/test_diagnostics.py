import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from cnqg.diagnostics import (
    BASE_COLUMNS,
    DiagnosticsSeries,
    SeriesRecorder,
    commutator_ratio,
    decay_fit,
    energy_inequality_check,
    expected_l2_exponent,
    expected_lp_exponent,
    hs_norm,
    level_set_energy_check,
    lp_norm,
    maximum_principle_check,
    pointwise_lemma_check,
    riesz_potential_ratio,
    semigroup_decay_exponent,
    spectral_apriori_check,
    uniqueness_class_monitor,
    uniqueness_time_exponent,
    virial_lower_bound,
)
from cnqg.errors import InsufficientData, InvalidExponent, InvalidExponents, UnderResolved
from cnqg.initial import gaussian_bump, random_smooth_field
from cnqg.solver import SolverConfig, run
from cnqg.spectral import Grid, PhysicalField, forward_transform


def test_lp_norms_of_constant():
    g = Grid.cube(2, 16, 2.0)
    f = PhysicalField(g, np.full(g.shape, 3.0))
    assert lp_norm(f, 2) == pytest.approx(3.0 * 2.0)
    assert lp_norm(f, 1) == pytest.approx(12.0)
    assert lp_norm(f, math.inf) == 3.0
    with pytest.raises(InvalidExponent):
        lp_norm(f, 0.5)


def test_hs_norm_of_cosine():
    g = Grid((64,), (2 * np.pi,))
    f = PhysicalField(g, 5.0 + np.cos(3 * g.coordinates[0]))
    # ||Lambda^s cos(3x)||^2 = 9^s * pi; the mean is excluded.
    assert hs_norm(forward_transform(f), 1.0) == pytest.approx(3 * math.sqrt(math.pi), rel=1e-12)
    assert hs_norm(forward_transform(f), 0.0) == pytest.approx(math.sqrt(math.pi), rel=1e-12)


@given(st.integers(0, 2**31), st.sampled_from([0.5, 1.0, 1.5, 2.0]), st.sampled_from([2.0, 3.0, 4.0]))
def test_pointwise_lemma_random_fields(seed, s, p):
    g = Grid.cube(2, 32, 2 * np.pi)
    f = random_smooth_field(g, np.random.default_rng(seed), max_mode_fraction=0.1)
    assert pointwise_lemma_check(f, s, p).passed


def test_pointwise_lemma_p2_equality_for_nonnegative(rng):
    g = Grid.cube(2, 64, 2 * np.pi)
    f = random_smooth_field(g, rng, nonnegative=True, max_mode_fraction=0.1)
    rep = pointwise_lemma_check(f, 1.0, 2.0)
    assert abs(rep.details["lhs"] - rep.details["rhs"]) <= 1e-12 * rep.details["scale"]


def test_pointwise_lemma_requires_resolution(rng):
    g = Grid.cube(2, 16, 2 * np.pi)
    with pytest.raises(UnderResolved):
        pointwise_lemma_check(PhysicalField(g, rng.standard_normal(g.shape)), 1.0, 2.0)
    with pytest.raises(InvalidExponent):
        pointwise_lemma_check(gaussian_bump(g, 1.0, 1.0), 1.0, 1.5)


def _series(t, values, column="l2_fluct"):
    s = DiagnosticsSeries(["t", column], meta={"dim": 3, "alpha": 2.0})
    for ti, v in zip(t, values):
        s.append({"t": ti, column: v})
    return s


def test_decay_fit_recovers_power_law():
    t = np.linspace(1.0, 50.0, 60)
    fit = decay_fit(_series(t, 3.0 * (1 + t) ** -0.37), (1.0, 50.0))
    assert fit.exponent == pytest.approx(0.37, abs=1e-6)
    assert fit.expected == pytest.approx(0.25)
    assert not fit.outside_hypotheses
    assert not fit.exponential_like


def test_decay_fit_flags_exponential_and_needs_samples():
    t = np.linspace(0.0, 10.0, 40)
    fit = decay_fit(_series(t, np.exp(-0.8 * t)), (0.0, 10.0), dim=2, alpha=1.5)
    assert fit.exponential_like and fit.outside_hypotheses
    with pytest.raises(InsufficientData):
        decay_fit(_series(t[:10], np.exp(-t[:10])), (0.0, 10.0))


def test_expected_exponents():
    assert expected_l2_exponent(3, 2.0) == pytest.approx(0.25)
    assert expected_l2_exponent(3, 2.0, eps=0.1) == pytest.approx(0.2)
    assert expected_lp_exponent(2, 1.5, 4.0) == pytest.approx(1 / 3)


def test_uniqueness_exponent_and_monitor(rng):
    assert uniqueness_time_exponent(8.0, 1.5, 2) == pytest.approx(6.0)
    with pytest.raises(InvalidExponents):
        uniqueness_time_exponent(2.0, 1.5, 2)
    g = Grid.cube(2, 32, 2 * np.pi)
    traj = run(random_smooth_field(g, rng, nonnegative=True), SolverConfig(alpha=1.5, nu=0.2, t_end=0.2, dt_max=0.02))
    mon = uniqueness_class_monitor(traj, 6.0, 8.0, 1.5)
    assert mon.running_integral[0] == 0.0 and np.all(np.diff(mon.running_integral) > 0)
    with pytest.raises(InvalidExponents):
        uniqueness_class_monitor(traj, 5.0, 8.0, 1.5)


def test_virial_lower_bound_formula():
    assert virial_lower_bound(1, 2.0, 3.0) == pytest.approx(4.0)
    assert virial_lower_bound(3, 1.0, 4.0) == pytest.approx(0.125)


def test_series_csv_round_trip(tmp_path):
    s = DiagnosticsSeries(["t", "l2"], [[0.1, 1 / 3], [0.2, math.pi]])
    s.to_csv(tmp_path / "s.csv")
    back = DiagnosticsSeries.from_csv(tmp_path / "s.csv")
    assert back.rows == s.rows
    assert (tmp_path / "s.csv").read_text().splitlines()[1] == "0.10000000000000001,0.33333333333333331"


def test_recorder_columns_and_flat_constant_run():
    g = Grid.cube(2, 16, 4.0)
    cfg = SolverConfig(alpha=1.0, nu=0.1, t_end=0.2, dt_max=0.02)
    rec = SeriesRecorder(g, cfg, hs_orders=(0.5, 1.0), lp_extra=(3.0,))
    run(PhysicalField(g, np.full(g.shape, 2.0)), cfg, hooks=[rec])
    names = rec.series.names
    assert names[: len(BASE_COLUMNS)] == list(BASE_COLUMNS)
    assert names[len(BASE_COLUMNS): len(BASE_COLUMNS) + 3] == ["hs_0.5", "hs_1", "energy_residual"]
    assert names[-2:] == ["l3", "l3_fluct"]
    for col in ("l2", "l4", "linf", "mass"):
        assert np.ptp(rec.series.column(col)) == 0.0


def test_inequality_checks_on_short_run(rng):
    g = Grid.cube(2, 64, 2 * np.pi)
    theta0 = random_smooth_field(g, rng, nonnegative=True, max_mode_fraction=0.06)
    cfg = SolverConfig(alpha=1.5, nu=0.1, t_end=0.2, dt_max=2e-3, record_every=5)
    traj = run(theta0, cfg)
    assert energy_inequality_check(traj).passed
    assert maximum_principle_check(traj).passed
    lambdas = np.quantile(theta0.values, [0.25, 0.5, 0.75])
    assert all(r.passed for r in level_set_energy_check(traj, lambdas))
    spec = spectral_apriori_check(traj)
    assert spec.passed
    assert abs(spec.details["initial_violation"]) <= 1e-14


def test_empirical_surveys(rng):
    g = Grid.cube(2, 128, 40.0)
    beta = semigroup_decay_exponent(g, 1.5, 1.0, 2.0, [0.5, 1.0, 2.0, 4.0], 0.3)
    # Heat-type kernel decay (N/alpha)(1/p - 1/q) = 2/3.
    assert beta == pytest.approx(2 / 3, rel=0.1)
    f = random_smooth_field(Grid.cube(2, 64, 2 * np.pi), rng)
    assert 0 < riesz_potential_ratio(f, 0.5, 4.0) < 10
    g2 = Grid.cube(2, 64, 2 * np.pi)
    assert 0 < commutator_ratio(random_smooth_field(g2, rng), random_smooth_field(g2, rng), 1.0) < 10
