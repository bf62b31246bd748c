import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from levylab.convergence import (
    ConvergenceConfig,
    GradientNoise,
    a_gamma_bound,
    constant_step_bound,
    default_gamma,
    estimate_sigma_gamma,
    fitted_rate_slope,
    optimal_c_gamma,
    run_convergence,
)
from levylab.errors import ParameterError
from levylab.objectives import quadratic
from levylab.rng import RngStream


def test_optimal_c_gamma_plugins():
    assert optimal_c_gamma(1.0, 1.0, 1.0, 1.0) == pytest.approx(math.sqrt(2.0), abs=1e-12)
    assert optimal_c_gamma(1.0, 2.0, 1.0, 1.0) == pytest.approx(
        math.sqrt(2.0) / 2.0, abs=1e-12
    )
    assert optimal_c_gamma(0.5, 1.0, 2.0, 3.0) == pytest.approx(
        4.5 ** (2.0 / 3.0), abs=1e-12
    )


def test_a_gamma_plugins():
    assert a_gamma_bound(1.0, 1.0, 1.0, 1.0) == pytest.approx(math.sqrt(2.0), abs=1e-12)
    assert a_gamma_bound(1.0, 1.0, 1.0, 0.0) == 0.0
    assert a_gamma_bound(0.5, 1.0, 1.0, 1.0) == pytest.approx(3.0 ** (2.0 / 3.0), abs=1e-12)


def test_gamma_zero_rejected():
    with pytest.raises(ParameterError):
        optimal_c_gamma(0.0, 1.0, 1.0, 1.0)
    with pytest.raises(ParameterError):
        a_gamma_bound(0.0, 1.0, 1.0, 1.0)


def test_constant_step_bound_plugins():
    assert constant_step_bound(1, 1.0, 1.0, 1.0, 2.0, 1.0) == pytest.approx(2.0)
    with pytest.raises(ParameterError):
        constant_step_bound(1, 1.0, 1.0, 0.0, 1.0, 0.0)
    tiny = constant_step_bound(1, 1.0, 1.0, 1e-6, 1.0, 0.0)
    assert tiny == pytest.approx(0.5e-12, rel=1e-9)


@given(
    gamma=st.floats(0.1, 1.0),
    sigma=st.floats(0.2, 5.0),
    M=st.floats(0.2, 5.0),
    gap=st.floats(0.1, 5.0),
    K=st.integers(10, 100_000),
)
def test_optimal_stepsize_minimizes_bound(gamma, sigma, M, gap, K):
    c = optimal_c_gamma(gamma, sigma, M, gap)
    eta_star = c / K ** (1.0 / (1.0 + gamma))
    best = constant_step_bound(K, eta_star, gamma, sigma, M, gap)
    for f in np.geomspace(0.2, 5.0, 21):
        if abs(f - 1.0) < 1e-9:
            continue
        assert constant_step_bound(K, f * eta_star, gamma, sigma, M, gap) >= best * 0.99


def test_optimal_stepsize_grid_search_within_one_percent():
    gamma, sigma, M, gap, K = 0.4, 2.0, 1.0, 3.0, 1000
    eta_star = optimal_c_gamma(gamma, sigma, M, gap) / K ** (1.0 / (1.0 + gamma))
    grid = np.geomspace(eta_star / 10.0, eta_star * 10.0, 4001)
    vals = [constant_step_bound(K, e, gamma, sigma, M, gap) for e in grid]
    eta_grid = grid[int(np.argmin(vals))]
    assert abs(eta_grid - eta_star) / eta_star < 0.01


def test_default_gamma_inside_interval():
    for alpha in (1.1, 1.5, 1.9, 2.0):
        g = default_gamma(alpha)
        assert 0.0 < g < alpha - 1.0 or (alpha == 2.0 and g <= 1.0)


def test_gradient_noise_validation():
    with pytest.raises(ParameterError):
        GradientNoise("gaussian", 1.5)
    with pytest.raises(ParameterError):
        GradientNoise("sas", 2.5)
    with pytest.raises(ParameterError):
        GradientNoise("uniform", 1.5)


def test_near_noiseless_run_beats_bound_easily():
    spec = quadratic(4)
    noise = GradientNoise("gaussian", 2.0, 1e-8)
    w0 = np.full(4, 1.0)
    cfg = ConvergenceConfig(
        gamma=1.0, sigma_gamma=1.0, M=1.0, gap=float(spec.f(w0)),
        ks=(200,), replicates=4,
    )
    rows = run_convergence(spec, noise, cfg, w0, RngStream(80))
    assert rows[0].min_grad_sq_mean < 1e-6
    assert rows[0].min_grad_sq_mean < rows[0].bound
    assert rows[0].diverged_fraction == 0.0


def test_bound_holds_within_monte_carlo_error():
    spec = quadratic(10)
    noise = GradientNoise("sas", 1.5, 1.0)
    w0 = np.full(10, 1.0)
    gamma = 0.4
    sigma = estimate_sigma_gamma(spec, noise, w0, gamma, RngStream(81), 5000)
    cfg = ConvergenceConfig(
        gamma=gamma, sigma_gamma=sigma, M=1.0, gap=float(spec.f(w0)),
        ks=(100, 1000), replicates=50,
    )
    rows = run_convergence(spec, noise, cfg, w0, RngStream(82))
    for row in rows:
        assert row.min_grad_sq_mean <= row.bound + 3.0 * row.min_grad_sq_stderr


def test_heavier_tails_converge_slower():
    spec = quadratic(6)
    w0 = np.full(6, 2.0)
    ks = (100, 2000)

    def slope(noise, gamma, seed):
        sigma = estimate_sigma_gamma(spec, noise, w0, gamma, RngStream(seed), 4000)
        cfg = ConvergenceConfig(
            gamma=gamma, sigma_gamma=sigma, M=1.0, gap=float(spec.f(w0)),
            ks=ks, replicates=60,
        )
        return fitted_rate_slope(run_convergence(spec, noise, cfg, w0, RngStream(seed + 1)))

    heavy = slope(GradientNoise("sas", 1.2, 1.0), default_gamma(1.2), 83)
    light = slope(GradientNoise("gaussian", 2.0, 1.0), 1.0, 85)
    assert heavy > light


def test_explicit_eta_overrides_schedule():
    cfg = ConvergenceConfig(
        gamma=0.5, sigma_gamma=1.0, M=1.0, gap=1.0, ks=(10, 100), eta=0.01
    )
    assert cfg.eta_for(10) == 0.01
    assert cfg.eta_for(100) == 0.01
    sched = ConvergenceConfig(
        gamma=0.5, sigma_gamma=1.0, M=1.0, gap=1.0, ks=(10, 100), stepsize_c=2.0
    )
    assert sched.eta_for(100) == pytest.approx(2.0 / 100 ** (1.0 / 1.5))


def test_rows_are_deterministic():
    spec = quadratic(3)
    noise = GradientNoise("sas", 1.5, 1.0)
    w0 = np.full(3, 1.0)
    cfg = ConvergenceConfig(
        gamma=0.4, sigma_gamma=2.0, M=1.0, gap=float(spec.f(w0)), ks=(50,), replicates=8
    )
    a = run_convergence(spec, noise, cfg, w0, RngStream(86))
    b = run_convergence(spec, noise, cfg, w0, RngStream(86))
    assert a == b
