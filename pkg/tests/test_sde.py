import numpy as np
import pytest

from levylab.errors import ParameterError
from levylab.objectives import ObjectiveSpec, double_well, quadratic
from levylab.rng import RngStream
from levylab.sde import (
    SdeConfig,
    first_exit,
    first_exit_ensemble,
    first_transition_ensemble,
    noise_increments,
    occupancy,
    occupancy_ensemble,
    simulate,
    transition_trace,
)


def _cfg(**kw):
    base = dict(eta=0.01, epsilon=0.1, alpha=1.5, w0=(0.0,), max_steps=200)
    base.update(kw)
    return SdeConfig(**base)


@pytest.mark.parametrize(
    "bad",
    [
        dict(eta=0.0),
        dict(eta=-0.1),
        dict(epsilon=-1.0),
        dict(alpha=0.0),
        dict(alpha=2.5),
        dict(sigma_brownian=-0.1),
        dict(max_steps=0),
    ],
)
def test_config_validation(bad):
    with pytest.raises(ParameterError):
        _cfg(**bad)


def test_noiseless_descent_is_geometric():
    config = _cfg(eta=0.1, epsilon=0.0, w0=(1.0,), max_steps=50)
    traj = simulate(config, quadratic(1), RngStream(90))
    expected = 0.9 ** np.arange(51)
    assert np.allclose(traj.points[:, 0], expected, rtol=1e-12)
    assert not traj.diverged


def test_simulate_deterministic():
    config = _cfg(max_steps=500)
    a = simulate(config, quadratic(1), RngStream(91))
    b = simulate(config, quadratic(1), RngStream(91))
    assert np.array_equal(a.points, b.points)


def test_simulate_dim_mismatch():
    with pytest.raises(ParameterError):
        simulate(_cfg(w0=(0.0, 0.0)), quadratic(1), RngStream(0))


def test_trajectory_includes_initial_point():
    config = _cfg(w0=(0.7,), max_steps=10)
    traj = simulate(config, quadratic(1), RngStream(92))
    assert traj.points.shape == (11, 1)
    assert traj.points[0, 0] == 0.7
    assert traj.times()[1] == pytest.approx(config.eta)


def test_single_step_matches_update_formula():
    # one Euler step recomputed by hand from the same noise draws
    config = _cfg(eta=0.05, epsilon=0.3, alpha=2.0, sigma_brownian=1.5,
                  w0=(0.4,), max_steps=1)
    spec = quadratic(1)
    traj = simulate(config, spec, RngStream(93))
    inc = noise_increments(config, 1, RngStream(93).generator())
    w0 = np.asarray(config.w0)
    expected = w0 - config.eta * spec.grad(w0) + inc[0]
    assert np.allclose(traj.points[1], expected, rtol=0, atol=0)


def test_noise_increments_amplitudes():
    # stable block scales as eps eta^(1/alpha); at alpha=2 each unit draw has
    # variance 2 under the characteristic-function convention
    config = _cfg(eta=0.04, epsilon=0.5, alpha=2.0, sigma_brownian=0.0)
    inc = noise_increments(config, 200_000, RngStream(94).generator())
    amp = config.epsilon * config.eta ** 0.5
    assert inc.var() == pytest.approx(2.0 * amp**2, rel=0.02)


def test_ornstein_uhlenbeck_stationary_variance():
    eta, eps = 0.1, 0.5
    config = _cfg(eta=eta, epsilon=eps, alpha=2.0, w0=(0.0,), max_steps=100_000)
    traj = simulate(config, quadratic(1), RngStream(95))
    tail = traj.points[1000:, 0]
    predicted = eps**2 * 2.0 * eta / (1.0 - (1.0 - eta) ** 2)
    assert tail.var() == pytest.approx(predicted, rel=0.05)


def test_divergence_marked_and_truncated():
    # quartic drift with a long step blows up from a far start
    config = _cfg(eta=0.9, epsilon=0.0, w0=(40.0,), max_steps=500)
    traj = simulate(config, double_well(-1.0, 2.0), RngStream(96))
    assert traj.diverged
    assert traj.diverged_step is not None
    assert traj.points.shape[0] == traj.diverged_step
    assert np.isfinite(traj.points).all()


def test_stationary_start_never_exits():
    config = _cfg(epsilon=0.0, w0=(0.0,), max_steps=100)
    rec = first_exit(config, quadratic(1), 0.0, 1.0, 0.0, RngStream(97))
    assert not rec.exited
    assert rec.exit_step is None
    assert not rec.diverged


def test_start_outside_ball_rejected():
    config = _cfg(w0=(3.0,))
    with pytest.raises(ParameterError):
        first_exit(config, quadratic(1), 0.0, 1.0, 0.0, RngStream(0))


def test_exit_record_consistent_with_replayed_path():
    config = _cfg(eta=0.01, epsilon=0.3, alpha=1.5, w0=(0.0,), max_steps=2000)
    spec = quadratic(1)
    records = first_exit_ensemble(config, spec, 0.0, 0.8, 0.0, RngStream(98), 6)
    replayed = 0
    for rec in records:
        if not rec.exited:
            continue
        traj = simulate(config, spec, RngStream(98).substream(rec.replicate))
        dist = np.abs(traj.points[:, 0])
        assert np.all(dist[: rec.exit_step] <= 0.8)
        assert dist[rec.exit_step] > 0.8
        replayed += 1
    assert replayed > 0


def test_exit_step_monotone_in_radius():
    config = _cfg(eta=0.01, epsilon=0.3, alpha=1.2, w0=(0.0,), max_steps=4000)
    spec = quadratic(1)
    by_radius = {}
    for a in (0.5, 1.0, 2.0):
        by_radius[a] = first_exit_ensemble(config, spec, 0.0, a, 0.0, RngStream(99), 40)
    for r in range(40):
        steps = []
        for a in (0.5, 1.0, 2.0):
            rec = by_radius[a][r]
            steps.append(rec.exit_step if rec.exit_step is not None else config.max_steps + 1)
        assert steps[0] <= steps[1] <= steps[2]


def test_linear_fast_path_matches_generic_scan():
    config = _cfg(eta=0.003, epsilon=0.2, alpha=1.5, w0=(0.0,), max_steps=3000)
    spec = quadratic(1)
    generic = first_exit_ensemble(config, spec, 0.0, 1.0, 0.0, RngStream(100), 20)
    fast = first_exit_ensemble(
        config, spec, 0.0, 1.0, 0.0, RngStream(100), 20, linear_rate=1.0
    )
    assert [r.exit_step for r in generic] == [r.exit_step for r in fast]
    assert [r.exited for r in generic] == [r.exited for r in fast]


def test_unstable_linear_rate_falls_back():
    # eta * rate >= 1 leaves the contraction band; the run must still work
    config = _cfg(eta=0.01, epsilon=0.3, w0=(0.0,), max_steps=1000)
    recs = first_exit_ensemble(
        config, quadratic(1), 0.0, 0.8, 0.0, RngStream(101), 4, linear_rate=150.0
    )
    ref = first_exit_ensemble(config, quadratic(1), 0.0, 0.8, 0.0, RngStream(101), 4)
    assert [r.exit_step for r in recs] == [r.exit_step for r in ref]


def test_diverged_lane_not_counted_as_exit():
    # long steps on the quartic overflow; with this ball radius some lanes
    # hit non-finite values while still inside and others leave first
    config = SdeConfig(eta=0.4, epsilon=5.0, alpha=1.2, w0=(-1.0,), max_steps=800)
    spec = double_well(-1.0, 2.0)
    records = first_exit_ensemble(config, spec, -1.0, 1e200, 0.0, RngStream(102), 30)
    n_div = sum(r.diverged for r in records)
    n_exit = sum(r.exited for r in records)
    assert n_div > 0 and n_exit > 0
    for rec in records:
        if rec.diverged:
            assert not rec.exited


def test_transition_trace_quiet_path_is_empty():
    config = _cfg(epsilon=0.0, w0=(-1.0,), max_steps=300)
    recs = transition_trace(config, double_well(-1.0, 2.0), 0.2, RngStream(103))
    assert recs == []


def test_transition_requires_geometry():
    bare = ObjectiveSpec(dim=1, f=lambda w: 0.5 * w**2, grad=lambda w: w)
    with pytest.raises(ParameterError):
        transition_trace(_cfg(), bare, 0.1, RngStream(0))


def test_oversized_delta_rejected():
    with pytest.raises(ParameterError):
        transition_trace(_cfg(w0=(-1.0,)), double_well(-1.0, 2.0), 1.5, RngStream(0))


def test_two_basin_transitions_all_land_in_other_basin():
    config = SdeConfig(eta=1e-3, epsilon=0.1, alpha=1.2, w0=(-1.0,), max_steps=250_000)
    spec = double_well(-1.0, 2.0)
    records, diverged = first_transition_ensemble(config, spec, 0.2, RngStream(104), 25)
    assert len(records) >= 20
    assert all(r.start_basin == 0 and r.end_basin == 1 for r in records)
    assert all(r.transition_time == pytest.approx(r.transition_step * config.eta)
               for r in records)


def test_occupancy_of_single_valley_path():
    config = _cfg(epsilon=0.0, w0=(-1.0,), max_steps=100)
    spec = double_well(-1.0, 2.0)
    traj = simulate(config, spec, RngStream(105))
    fractions = occupancy(traj, spec)
    assert fractions == pytest.approx([1.0, 0.0])


def test_occupancy_symmetric_well_balances():
    spec = double_well(-1.0, 1.0)
    config = SdeConfig(eta=1e-3, epsilon=0.15, alpha=1.2, w0=(-1.0,), max_steps=150_000)
    fractions, n_div = occupancy_ensemble(config, spec, RngStream(106), 8, burn_in=15_000)
    assert fractions.sum() == pytest.approx(1.0)
    assert abs(fractions[0] - 0.5) < 0.05
    assert n_div < 8


def test_occupancy_requires_geometry():
    bare = ObjectiveSpec(dim=1, f=lambda w: 0.5 * w**2, grad=lambda w: w)
    config = _cfg(max_steps=10)
    traj = simulate(config, bare, RngStream(107))
    with pytest.raises(ParameterError):
        occupancy(traj, bare)
