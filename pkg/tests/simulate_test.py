"""
    To run all tests: pytest -s
    To run this module: pytest -s tests/simulate_test.py
"""
import numpy as np
import pytest

from app.framework.errors import InsufficientData, InvalidParams, NonDecayingCorrelation
from app.services.simulate import (
    SimulationPlan,
    SimulationSeries,
    calibrate,
    gillespie_run,
    initial_profile,
    net_flow_scores,
    relaxation_estimate,
    stationary_tv_distance,
)
from app.services.state_space import EnsembleParams


def plan(q=0.5, L=1, H=2, N=1, **kwargs):
    kwargs.setdefault("seed", 7)
    kwargs.setdefault("t_run", 100.0)
    return SimulationPlan.create(params=EnsembleParams.create(q=q, L=L, H=H, N=N), **kwargs)


def test_invalid_plans_are_rejected():
    with pytest.raises(InvalidParams):
        plan(t_burn=50.0, t_run=10.0)
    with pytest.raises(InvalidParams):
        plan(seed=-1)
    with pytest.raises(InvalidParams):
        plan(sample_dt=0.0)
    with pytest.raises(InvalidParams):
        gillespie_run(plan(L=3, H=1, N=1))
    with pytest.raises(InvalidParams):
        gillespie_run(plan(L=2, H=2, N=4))


def test_initial_profile_fills_from_the_bottom():
    params = EnsembleParams.create(q=0.5, L=3, H=3, N=4)
    assert initial_profile(params).tolist() == [3, 1, 0]


def test_particles_are_conserved():
    for mode in ("profile", "lattice"):
        series = gillespie_run(plan(L=3, H=3, N=4, mode=mode, t_run=50.0))
        assert series.particle_count == 4
        assert all(sum(profile) == 4 for profile in series.occupancy)
        assert series.events > 0


def test_same_seed_gives_the_same_trajectory():
    first = gillespie_run(plan(L=2, H=3, N=3, seed=11, t_run=200.0))
    second = gillespie_run(plan(L=2, H=3, N=3, seed=11, t_run=200.0))
    other = gillespie_run(plan(L=2, H=3, N=3, seed=12, t_run=200.0))
    assert first.events == second.events
    assert np.array_equal(first.values, second.values)
    assert not np.array_equal(first.values, other.values)


def test_sampling_grid():
    series = gillespie_run(plan(t_burn=5.0, t_run=15.0, sample_dt=0.5))
    assert series.n_samples == 20
    assert series.times[0] == pytest.approx(5.0)
    assert series.times[-1] < 15.0


def test_two_state_occupation():
    q = 0.5
    series = gillespie_run(plan(q=q, t_run=4000.0))
    total = sum(series.occupancy.values())
    assert total == pytest.approx(4000.0)
    assert series.occupancy[(1, 0)] / total == pytest.approx(1.0 / (1.0 + q * q), abs=0.03)


def test_two_state_relaxation_rate():
    series = gillespie_run(plan(q=0.5, t_run=4000.0, sample_dt=0.05))
    estimate = relaxation_estimate(series, resamples=20)
    assert estimate.rate == pytest.approx(2.5, rel=0.15)
    assert estimate.stderr > 0.0
    assert estimate.n_samples == series.n_samples
    assert estimate.r_squared >= 0.9


def test_white_noise_has_no_decay_window():
    base = gillespie_run(plan(t_run=10.0))
    values = np.random.default_rng(3).standard_normal(5000)
    noise = SimulationSeries(
        plan=base.plan,
        times=np.arange(values.size) * base.plan.sample_dt,
        values=values,
        events=0,
        occupancy={},
        particle_count=1,
    )
    with pytest.raises(NonDecayingCorrelation):
        relaxation_estimate(noise, resamples=5)


def test_short_runs_are_insufficient():
    with pytest.raises(InsufficientData):
        relaxation_estimate(gillespie_run(plan(t_run=10.0)))


def test_stationary_distance():
    series = gillespie_run(plan(q=0.5, L=2, H=3, N=3, t_run=30000.0, t_burn=10.0))
    assert stationary_tv_distance(series) < 0.03


def test_net_flow_is_balanced():
    series = gillespie_run(plan(t_run=500.0, record_transitions=True))
    scores = net_flow_scores(series)
    assert set(scores) <= {((1, 0), (0, 1)), ((0, 1), (1, 0))}
    assert all(score <= 1.0 for score in scores.values())


def test_calibration_rows():
    report = calibrate(plan(q=0.5, t_run=2000.0, sample_dt=0.05), seeds=[1, 2, 3], exact_gap=2.5)
    assert [row["seed"] for row in report.rows] == [1, 2, 3]
    assert 0.0 <= report.coverage <= 1.0
