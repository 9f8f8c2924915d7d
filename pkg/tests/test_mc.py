import math

import numpy as np
import pytest

from srdsim import (
    FailureSpec,
    Grid,
    GridFunction,
    SolverConfig,
    SystemState,
    Trajectory,
    clip_interval,
    confidence_halfwidth,
    constant_kernel,
    discretize_kernel,
    equilibrium_state,
    estimate_failure_probability,
    failure_indicator,
    fhn_model,
    pulse_functional,
    pulse_state,
)

FHN = fhn_model()


def fake_trajectory(min_phi, t_end=10.0):
    times = np.array([0.0, t_end])
    return Trajectory(
        times=times,
        phi_series=np.array([min_phi, min_phi]),
        min_phi_after_t0=min_phi,
        energy=np.zeros((2, 4)),
    )


# ---------------------------------------------------------------------------
# pulse functional
# ---------------------------------------------------------------------------

def test_pulse_functional_zero_at_rest():
    v_star = FHN.rest_state[0]
    grid = Grid(16, 20.0)
    v = GridFunction(grid, np.full(17, v_star))
    assert pulse_functional(v, v_star) == pytest.approx(0.0, abs=1e-12)


def test_pulse_functional_constant_offset():
    v_star = FHN.rest_state[0]
    grid = Grid(10, 20.0)
    v = GridFunction(grid, np.full(11, v_star + 1.0))
    assert pulse_functional(v, v_star) == pytest.approx(20.0, rel=1e-13)


def test_pulse_functional_trapezoid_hand_value():
    v = GridFunction(Grid(2, 1.0), np.array([0.0, 2.0, 0.0]))
    assert pulse_functional(v, 0.0) == pytest.approx(1.0, rel=1e-14)


def test_pulse_functional_linearity_in_shift():
    rng = np.random.default_rng(0)
    grid = Grid(12, 5.0)
    vals = rng.standard_normal(13)
    base = pulse_functional(GridFunction(grid, vals), 0.3)
    shifted = pulse_functional(GridFunction(grid, vals + 2.0), 0.3)
    assert shifted == pytest.approx(base + 2.0 * 5.0, rel=1e-12)


def test_pulse_functional_matches_interpolant_integral():
    from scipy.integrate import quad

    from srdsim import interpolate

    rng = np.random.default_rng(1)
    grid = Grid(8, 2.0)
    v = GridFunction(grid, rng.standard_normal(9))
    oracle = sum(
        quad(lambda x: interpolate(v, x), k * grid.h, (k + 1) * grid.h)[0]
        for k in range(8)
    )
    assert pulse_functional(v, 0.0) == pytest.approx(oracle, rel=1e-10)


# ---------------------------------------------------------------------------
# failure indicator
# ---------------------------------------------------------------------------

def test_indicator_fires_on_collapsed_pulse():
    spec = FailureSpec(kappa=1.0, epsilon=0.1, T0=0.0, m=1)
    assert failure_indicator(fake_trajectory(0.0), spec) is True


def test_indicator_quiet_on_healthy_pulse():
    spec = FailureSpec(kappa=5.0, epsilon=0.1, T0=0.0, m=1)
    assert failure_indicator(fake_trajectory(25.0), spec) is False


def test_indicator_threshold_is_inclusive():
    spec = FailureSpec(kappa=1.0, epsilon=0.1, T0=0.0, m=1)
    assert failure_indicator(fake_trajectory(0.9), spec) is True
    assert failure_indicator(fake_trajectory(0.9 + 1e-12), spec) is False


def test_indicator_rejects_uncovered_window():
    spec = FailureSpec(kappa=1.0, epsilon=0.1, T0=20.0, m=1)
    with pytest.raises(ValueError):
        failure_indicator(fake_trajectory(0.0, t_end=10.0), spec)


def test_indicator_monotone_in_kappa():
    trajs = [fake_trajectory(p) for p in (0.5, 2.0, 7.0, 30.0)]
    counts = []
    for kappa in (1.0, 5.0, 10.0):
        spec = FailureSpec(kappa=kappa, epsilon=0.1, T0=0.0, m=1)
        counts.append(sum(failure_indicator(t, spec) for t in trajs))
    assert counts == sorted(counts)


def test_failure_spec_validation():
    with pytest.raises(ValueError):
        FailureSpec(kappa=-1.0)
    with pytest.raises(ValueError):
        FailureSpec(kappa=1.0, epsilon=1.0)
    with pytest.raises(ValueError):
        FailureSpec(kappa=1.0, m=0)
    with pytest.raises(ValueError):
        FailureSpec(kappa=1.0, confidence_alpha=1.5)
    # the raw-threshold variant is allowed
    FailureSpec(kappa=1.0, epsilon=0.0, c_hat=0.0)


# ---------------------------------------------------------------------------
# estimator
# ---------------------------------------------------------------------------

def short_config(n=48, T=8.0, T0=2.0):
    return SolverConfig(n=n, L=20.0, dt=0.01, T=T, T0=T0, record_stride=5)


def test_deterministic_pulse_never_fails():
    config = short_config()
    noise = discretize_kernel(constant_kernel(0.0), config.grid)
    spec = FailureSpec(kappa=5.0, epsilon=0.1, T0=config.T0, m=3)
    est = estimate_failure_probability(config, FHN, noise, spec, base_seed=0)
    assert est.p_hat == 0.0
    assert est.failures == 0
    assert est.m_effective == 3
    assert est.overflows == 0


def test_equilibrium_start_always_fails():
    config = short_config(n=16, T=2.0, T0=0.5)
    noise = discretize_kernel(constant_kernel(0.0), config.grid)
    spec = FailureSpec(kappa=5.0, epsilon=0.1, T0=config.T0, m=4)
    est = estimate_failure_probability(
        config,
        FHN,
        noise,
        spec,
        base_seed=0,
        initial_state=equilibrium_state(FHN, config.grid),
    )
    assert est.p_hat == 1.0
    assert est.failures == 4


def test_estimator_deterministic_given_seed():
    config = short_config(n=24, T=3.0, T0=1.0)
    noise = discretize_kernel(constant_kernel(0.3), config.grid)
    spec = FailureSpec(kappa=5.0, epsilon=0.1, T0=config.T0, m=10)
    a = estimate_failure_probability(config, FHN, noise, spec, base_seed=42)
    b = estimate_failure_probability(config, FHN, noise, spec, base_seed=42)
    c = estimate_failure_probability(config, FHN, noise, spec, base_seed=42, threads=2)
    assert a.indicators == b.indicators == c.indicators
    assert a.p_hat == b.p_hat == c.p_hat


def test_overflows_excluded_with_warning():
    # explicit scheme from a wild state overflows every sample
    config = SolverConfig(n=2, L=1.0, dt=0.1, T=1.0, scheme="explicit")
    noise = discretize_kernel(constant_kernel(0.0), config.grid)
    grid = config.grid
    wild = SystemState(
        GridFunction(grid, np.full(3, 50.0)), GridFunction(grid, np.zeros(3))
    )
    spec = FailureSpec(kappa=1.0, epsilon=0.1, T0=0.0, m=3)
    with pytest.warns(UserWarning):
        est = estimate_failure_probability(
            config, FHN, noise, spec, base_seed=1, initial_state=wild
        )
    assert est.overflows == 3
    assert est.m_effective == 0
    assert math.isnan(est.p_hat)
    assert est.indicators == [-1, -1, -1]


def test_counts_are_consistent():
    config = short_config(n=24, T=3.0, T0=1.0)
    noise = discretize_kernel(constant_kernel(0.5), config.grid)
    spec = FailureSpec(kappa=5.0, epsilon=0.1, T0=config.T0, m=12)
    est = estimate_failure_probability(config, FHN, noise, spec, base_seed=3)
    successes = sum(1 for x in est.indicators if x == 0)
    assert est.failures + successes == est.m_effective
    assert 0.0 <= est.p_hat <= 1.0


# ---------------------------------------------------------------------------
# confidence half-width
# ---------------------------------------------------------------------------

def test_halfwidth_pure_monte_carlo_limit():
    spec = FailureSpec(kappa=1.0, epsilon=0.1, confidence_alpha=0.05, c_hat=0.0, m=1000)
    assert confidence_halfwidth(spec, 100) == pytest.approx(
        1.0 / math.sqrt(0.05 * 1000), rel=1e-14
    )


def test_halfwidth_closed_form_value():
    spec = FailureSpec(kappa=1.0, epsilon=0.1, confidence_alpha=0.05, c_hat=1.0, m=1000)
    assert confidence_halfwidth(spec, 100) == pytest.approx(0.31623, abs=1e-5)


def test_halfwidth_monotone_in_n_and_m():
    widths_n = [
        confidence_halfwidth(
            FailureSpec(kappa=1.0, epsilon=0.1, c_hat=1.0, m=100), n
        )
        for n in (10, 40, 160, 640)
    ]
    assert widths_n == sorted(widths_n, reverse=True)
    widths_m = [
        confidence_halfwidth(
            FailureSpec(kappa=1.0, epsilon=0.1, c_hat=1.0, m=m), 64
        )
        for m in (10, 100, 1000)
    ]
    assert widths_m == sorted(widths_m, reverse=True)


def test_halfwidth_epsilon_zero_needs_zero_c_hat():
    spec = FailureSpec(kappa=1.0, epsilon=0.0, c_hat=1.0, m=10)
    with pytest.raises(ValueError):
        confidence_halfwidth(spec, 8)
    assert confidence_halfwidth(
        FailureSpec(kappa=1.0, epsilon=0.0, c_hat=0.0, m=10), 8
    ) > 0


def test_clip_interval():
    assert clip_interval(0.1, 0.3) == (0.0, pytest.approx(0.4))
    assert clip_interval(0.9, 0.3) == (pytest.approx(0.6), 1.0)


def test_chebyshev_coverage_on_synthetic_bernoulli():
    # quick version; the acceptance suite runs 1000 repetitions
    p, m, alpha, reps = 0.3, 400, 0.05, 200
    spec = FailureSpec(kappa=1.0, epsilon=0.1, confidence_alpha=alpha, c_hat=0.0, m=m)
    gamma = confidence_halfwidth(spec, 64)
    rng = np.random.default_rng(11)
    hits = 0
    for _ in range(reps):
        p_hat = rng.binomial(m, p) / m
        hits += abs(p_hat - p) <= gamma
    assert hits / reps >= 1.0 - alpha
