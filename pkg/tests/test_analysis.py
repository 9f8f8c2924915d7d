import numpy as np
import pytest

from srdsim import (
    Grid,
    GridFunction,
    SolverConfig,
    SystemState,
    constant_kernel,
    convergence_study,
    equilibrium_state,
    fhn_model,
    fit_order,
    gaussian_kernel,
    i_n_functional,
    refine_interpolant,
    state_error,
    v_seminorm,
)

FHN = fhn_model()


def as_state(v_vals, w_vals, L=1.0):
    n = len(v_vals) - 1
    g = Grid(n, L)
    return SystemState(
        GridFunction(g, np.asarray(v_vals, float)),
        GridFunction(g, np.asarray(w_vals, float)),
    )


# ---------------------------------------------------------------------------
# state_error
# ---------------------------------------------------------------------------

def test_error_vanishes_for_lifted_state():
    rng = np.random.default_rng(1)
    coarse = as_state(rng.standard_normal(9), rng.standard_normal(9), L=2.0)
    fine = SystemState(
        refine_interpolant(coarse.v, 4), refine_interpolant(coarse.w, 4)
    )
    assert state_error(coarse, fine) < 1e-13


def test_error_hand_value():
    coarse = as_state([0.0, 2.0], [0.0, 0.0])
    fine = as_state([0.0, 0.0, 2.0], [0.0, 0.0, 0.0])
    assert state_error(coarse, fine) == pytest.approx(np.sqrt(1.0 / 3.0), rel=1e-12)


def test_error_content_symmetric():
    # swapping which field holds the data leaves the norm unchanged
    a = as_state([0.0, 2.0], [0.0, 0.0])
    b = as_state([0.0, 0.0, 2.0], [0.0, 0.0, 0.0])
    c = as_state([0.0, 0.0], [0.0, 2.0])
    d = as_state([0.0, 0.0, 0.0], [0.0, 0.0, 2.0])
    assert state_error(a, b) == pytest.approx(state_error(c, d), rel=1e-14)


def test_error_requires_compatible_grids():
    with pytest.raises(ValueError):
        state_error(as_state([0, 1, 2], [0, 0, 0]), as_state([0, 1, 2, 3], [0, 0, 0, 0]))
    with pytest.raises(ValueError):
        state_error(
            as_state([0, 1], [0, 0], L=1.0), as_state([0, 1, 2], [0, 0, 0], L=2.0)
        )


# ---------------------------------------------------------------------------
# shift functional
# ---------------------------------------------------------------------------

def test_affine_profile_gives_zero():
    assert i_n_functional(lambda x: np.full_like(np.asarray(x), 2.0), 16, 1.0) < 1e-14


def test_cosine_decays_at_first_order():
    dphi = lambda x: -np.pi * np.sin(np.pi * np.asarray(x))  # noqa: E731
    i32 = i_n_functional(dphi, 32, 1.0)
    i64 = i_n_functional(dphi, 64, 1.0)
    assert 0.4 <= i64 / i32 <= 0.6


def piecewise_linear_derivative(knot_values, L):
    knots = np.asarray(knot_values, float)
    cells = len(knots) - 1
    slopes = np.diff(knots) / (L / cells)

    def dphi(x):
        idx = np.clip((np.asarray(x) * cells / L).astype(int), 0, cells - 1)
        return slopes[idx]

    return dphi


@pytest.mark.parametrize("n", [16, 32, 64])
def test_uniform_bound_on_random_piecewise_linear(n):
    # n multiple of the 16 knot cells keeps the integrand piecewise
    # constant per quadrature cell, so the rule is exact
    rng = np.random.default_rng(100 + n)
    for _ in range(40):
        knots = rng.standard_normal(17)
        gf = GridFunction(Grid(16, 1.0), knots)
        bound = 4.0 * v_seminorm(gf)
        value = i_n_functional(piecewise_linear_derivative(knots, 1.0), n, 1.0)
        assert value <= bound + 1e-12


def test_functional_matches_dense_riemann_oracle():
    # independent check including the boundary handling: mirror the
    # shifted points by hand on a dense midpoint lattice and Riemann-sum
    dphi = lambda x: -np.pi * np.sin(np.pi * np.asarray(x))  # noqa: E731
    n, L = 8, 1.0
    h = L / n
    z = np.linspace(0, L, 20_001)[:-1] + L / 40_000.0
    center = dphi(z)
    minus = dphi(np.abs(z - h))
    plus = dphi(np.where(z + h > L, 2 * L - (z + h), z + h))
    oracle = np.sqrt(np.mean((center - minus) ** 2 + (center - plus) ** 2) * L)
    assert i_n_functional(dphi, n, L) == pytest.approx(oracle, rel=1e-3)


# ---------------------------------------------------------------------------
# fit_order
# ---------------------------------------------------------------------------

def test_fit_exact_first_order():
    table = [(n, 3.0 / n) for n in (8, 16, 32, 64)]
    fit = fit_order(table)
    assert fit.order == pytest.approx(1.0, abs=1e-12)
    assert fit.r2 == pytest.approx(1.0, abs=1e-12)


def test_fit_exact_half_order():
    table = [(n, 2.0 * n ** -0.5) for n in (8, 16, 32, 64)]
    assert fit_order(table).order == pytest.approx(0.5, abs=1e-12)


def test_fit_two_point_log2_ratio():
    fit = fit_order([(32, 8e-3), (64, 4e-3)])
    assert fit.order == pytest.approx(1.0, abs=1e-12)


def test_fit_filters_bad_rows_with_warning():
    with pytest.warns(UserWarning):
        fit = fit_order([(8, 1.0), (16, 0.5), (32, 0.0)])
    assert fit.points_used == 2
    with pytest.raises(ValueError):
        with pytest.warns(UserWarning):
            fit_order([(8, 0.0), (16, -1.0)])


def test_fit_needs_two_rows():
    with pytest.raises(ValueError):
        fit_order([(8, 1.0)])


# ---------------------------------------------------------------------------
# convergence study
# ---------------------------------------------------------------------------

def test_study_zero_noise_from_equilibrium_is_exact():
    config = SolverConfig(n=8, L=20.0, dt=0.01, T=0.2, record_stride=5)
    study = convergence_study(
        config,
        FHN,
        constant_kernel(0.0),
        ladder=[8, 16],
        ref_factor=4,
        samples=2,
        seed=0,
        initial_state=lambda grid: equilibrium_state(FHN, grid),
    )
    for row in study.rows:
        assert row.error < 1e-10
        assert row.failures == 0


def test_study_deterministic_pulse_errors_decrease():
    config = SolverConfig(n=16, L=20.0, dt=1e-3, T=0.5, record_stride=50)
    study = convergence_study(
        config,
        FHN,
        constant_kernel(0.0),
        ladder=[16, 32, 64],
        ref_factor=4,
        samples=1,
        seed=0,
    )
    errs = [row.error for row in study.rows]
    assert errs[0] > errs[1] > errs[2] > 0


def test_study_rejects_bad_ladders():
    config = SolverConfig(n=8, L=20.0, dt=0.01, T=0.1)
    kern = constant_kernel(0.0)
    with pytest.raises(ValueError):
        convergence_study(config, FHN, kern, ladder=[])
    with pytest.raises(ValueError):
        convergence_study(config, FHN, kern, ladder=[8, 8])
    with pytest.raises(ValueError):
        convergence_study(config, FHN, kern, ladder=[12, 32], ref_factor=2)
    with pytest.raises(ValueError):
        convergence_study(config, FHN, kern, ladder=[8, 16], p=3)


def test_study_seeded_reproducibility_and_threads():
    config = SolverConfig(n=8, L=20.0, dt=0.01, T=0.2, record_stride=4)
    kern = gaussian_kernel(0.1, 1.0)
    a = convergence_study(config, FHN, kern, ladder=[8, 16], samples=3, seed=5)
    b = convergence_study(config, FHN, kern, ladder=[8, 16], samples=3, seed=5)
    c = convergence_study(config, FHN, kern, ladder=[8, 16], samples=3, seed=5, threads=2)
    for ra, rb, rc in zip(a.rows, b.rows, c.rows):
        assert ra.error == rb.error == rc.error


def test_study_counts_overflowed_samples():
    # explicit scheme (CFL holds at the reference n=8) + huge noise blows up
    config = SolverConfig(n=2, L=1.0, dt=0.005, T=0.25, scheme="explicit")
    study = convergence_study(
        config,
        FHN,
        constant_kernel(1e8),
        ladder=[2, 4],
        ref_factor=2,
        samples=2,
        seed=1,
        initial_state=lambda grid: equilibrium_state(FHN, grid),
    )
    assert all(row.failures == 2 for row in study.rows)
    assert all(np.isnan(row.error) for row in study.rows)
