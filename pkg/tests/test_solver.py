import numpy as np
import pytest

from cnqg.errors import ConfigError, NoContraction, NumericalBlowup, StepTooLarge, UnderResolvedMollifier
from cnqg.initial import gaussian_bump, negative_bump, random_smooth_field
from cnqg.solver import (
    SolverConfig,
    advective_term,
    existence_time_scan,
    mollify,
    nonlinear_term,
    picard_iterate,
    run,
    step,
)
from cnqg.spectral import Grid, PhysicalField, SpectralField, forward_transform


@pytest.mark.parametrize(
    "key,value",
    [("alpha", 2.5), ("alpha", -0.1), ("nu", -1.0), ("eps", -1.0), ("t_end", 0.0), ("dt_max", 0.0),
     ("scheme", "RK4"), ("dealias_fraction", 0.5), ("dealias_fraction", 1.2), ("record_every", 0)],
)
def test_config_validation_names_the_key(key, value):
    kwargs = {"alpha": 1.0, "nu": 0.1, "t_end": 1.0, key: value}
    with pytest.raises(ConfigError) as info:
        SolverConfig(**kwargs)
    assert info.value.key == key


def test_records_start_end_and_increase(rng):
    g = Grid.cube(2, 32, 2 * np.pi)
    cfg = SolverConfig(alpha=1.5, nu=0.1, t_end=0.35, dt_max=0.01, record_every=7)
    traj = run(random_smooth_field(g, rng, nonnegative=True), cfg)
    t = traj.times
    assert t[0] == 0.0 and t[-1] == pytest.approx(0.35, abs=1e-15)
    assert np.all(np.diff(t) > 0)
    assert [r.step for r in traj.records][:3] == [0, 7, 14]
    assert traj.status == "completed"


def test_store_fields_off_keeps_first_and_last(rng):
    g = Grid.cube(2, 32, 2 * np.pi)
    cfg = SolverConfig(alpha=1.5, nu=0.1, t_end=0.1, dt_max=0.01, store_fields=False)
    seen = []
    traj = run(random_smooth_field(g, rng), cfg, hooks=[lambda rec: seen.append(rec.theta is not None)])
    assert all(seen)
    kept = [r.theta is not None for r in traj.records]
    assert kept[0] and kept[-1] and not any(kept[1:-1])


def test_alpha_zero_decays_uniformly(rng):
    g = Grid.cube(2, 16, 3.0)
    theta0 = random_smooth_field(g, rng)
    cfg = SolverConfig(alpha=0.0, nu=0.7, t_end=0.5, dt_max=0.05, nonlinear=False)
    traj = run(theta0, cfg)
    assert np.allclose(traj.final.theta.values, np.exp(-0.35) * theta0.values, rtol=1e-13, atol=1e-15)


def test_step_rejects_oversized_dt(rng):
    g = Grid.cube(2, 32, 2 * np.pi)
    cfg = SolverConfig(alpha=1.0, nu=0.1, t_end=1.0, dt_max=0.01)
    F = forward_transform(random_smooth_field(g, rng))
    with pytest.raises(StepTooLarge) as info:
        step(F, 0.02, cfg)
    assert info.value.dt_allowed == pytest.approx(0.01)
    with pytest.raises(StepTooLarge):
        run(random_smooth_field(g, rng), cfg, dt=0.05)


def test_cfl_limit_applies():
    g = Grid.cube(2, 32, 2 * np.pi)
    theta0 = PhysicalField(g, 30 * gaussian_bump(g, 1.0, 0.8).values)
    cfg = SolverConfig(alpha=1.0, nu=0.5, t_end=0.05, dt_max=1.0, cfl=0.3, record_every=1)
    traj = run(theta0, cfg)
    h = min(g.spacing)
    for prev, rec in zip(traj.records, traj.records[1:]):
        assert rec.dt <= 0.3 * h / prev.umax * (1 + 1e-12)


def test_numerical_blowup_carries_last_good_record(rng):
    g = Grid.cube(2, 32, 2 * np.pi)
    theta0 = random_smooth_field(g, rng, amplitude=50)
    cfg = SolverConfig(alpha=1, nu=0.0, t_end=100, dt_max=0.5, cfl=1e6, grad_growth_limit=1e300,
                       tail_limit=1.0, record_every=20)
    with np.errstate(all="ignore"), pytest.raises(NumericalBlowup) as info:
        run(theta0, cfg)
    assert info.value.last_good is not None
    assert info.value.trajectory.records[0].t == 0.0


def test_blowup_monitor_stops_inviscid_negative_bump():
    g = Grid.cube(2, 64, 16.0)
    cfg = SolverConfig(alpha=1.0, nu=0.0, t_end=2.0, dt_max=0.005, record_every=5)
    traj = run(negative_bump(g, 4.0, 3.0), cfg)
    assert traj.status == "blowup_suspected"
    assert traj.final.t < 2.0


def test_nonlinear_term_conservative_equals_advective(rng):
    g = Grid.cube(2, 32, 5.0)
    cfg = SolverConfig(alpha=1.0, nu=0.0, t_end=1.0)
    F = forward_transform(random_smooth_field(g, rng))
    a, b = nonlinear_term(F, cfg).coeffs, advective_term(F, cfg).coeffs
    assert np.abs(a - b).max() < 1e-12 * np.abs(a).max()
    assert abs(a[0, 0]) < 1e-15


def test_clip_negative_keeps_sign():
    g = Grid.cube(2, 32, 8.0)
    cfg = SolverConfig(alpha=1.0, nu=0.0, t_end=0.2, dt_max=0.01, clip_negative=True, tail_limit=1.0)
    traj = run(negative_bump(g, 1.0, 2.0), cfg)
    assert max(r.theta.values.max() for r in traj.records) <= 1e-15


def test_mollify_properties():
    g = Grid.cube(2, 64, 8.0)
    theta0 = PhysicalField(g, (np.abs(g.mesh()[0] - 4.0) < 1.0).astype(float))
    out = mollify(theta0, 0.5)
    assert out.mean() == pytest.approx(theta0.mean(), rel=1e-13)
    assert out.values.min() >= -1e-12
    assert out.values.max() <= 1 + 1e-12
    with pytest.raises(UnderResolvedMollifier):
        mollify(theta0, 0.2)


def test_picard_agrees_with_time_stepping():
    g = Grid.cube(2, 32, 2 * np.pi)
    theta0 = PhysicalField(g, 0.5 * gaussian_bump(g, 1.0, 0.8).values)
    cfg = SolverConfig(alpha=1.5, nu=0.5, t_end=1.0, dt_max=1.0)
    T, n = 0.5, 16
    res = picard_iterate(theta0, T, n, 50, cfg)
    assert res.converged and all(r < 1 for r in res.contraction_ratios)
    stepped = run(theta0, SolverConfig(alpha=1.5, nu=0.5, t_end=T, dt_max=T / n), dt=T / n).final.theta
    diff = np.sqrt(np.sum((stepped.values - res.state_at(n).values) ** 2) * g.cell_volume)
    assert diff < 1e-3


def test_picard_errors():
    g = Grid.cube(2, 32, 2 * np.pi)
    shape = gaussian_bump(g, 1.0, 0.8)
    cfg = SolverConfig(alpha=1.5, nu=0.5, t_end=1.0)
    with pytest.raises(ConfigError):
        picard_iterate(shape, 0.5, 8, 10, cfg)
    with pytest.raises(ConfigError):
        picard_iterate(shape, 0.5, 16, 10, SolverConfig(alpha=1.5, nu=0.0, t_end=1.0))
    with pytest.raises(NoContraction):
        picard_iterate(PhysicalField(g, 8 * shape.values), 0.5, 16, 50, cfg)


def test_existence_scan_shrinks_with_amplitude():
    g = Grid.cube(2, 32, 2 * np.pi)
    cfg = SolverConfig(alpha=1.5, nu=0.5, t_end=1.0)
    points = existence_time_scan(gaussian_bump(g, 1.0, 0.8), [0.5, 4.0, 8.0], [0.125, 0.5, 2.0], cfg)
    horizons = [p.horizon for p in points]
    assert horizons == sorted(horizons, reverse=True)
    assert horizons[0] > horizons[-1]
