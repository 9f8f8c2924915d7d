"""srdsim: finite-difference simulation of stochastic reaction-diffusion
systems with one-sided-Lipschitz drift.

The package discretizes

    dv = [v_xx + phi1(xi, v, w)] dt + b(xi, v) dW_Q
    dw = phi2(xi, v, w) dt

on [0, L] with homogeneous Neumann boundaries: second-order central
differences in space (with an exact summation-by-parts identity), tamed
Euler-type stepping in time, and colored noise synthesized from a
cell-averaged covariance kernel.  On top of the solver it provides an
empirical strong-convergence study with noise coupled across resolutions,
a pathwise energy diagnostic, and a propagation-failure estimator with
Chebyshev confidence intervals for FitzHugh-Nagumo traveling pulses.
"""

from .errors import ConfigError, TrajectoryOverflowError
from .grid import (
    Grid,
    GridFunction,
    SystemState,
    grid_function_from_csv,
    grid_function_to_csv,
    h_norm_interpolant,
    interpolate,
    lp_norm,
    refine_interpolant,
    restrict,
    v_seminorm,
)
from .operators import apply_laplacian, sbp_defect, solve_shifted_tridiagonal
from .model import (
    AssumptionReport,
    CheckSpec,
    MODEL_REGISTRY,
    ReactionModel,
    check_assumptions,
    equilibrium,
    fhn_equilibrium,
    fhn_model,
    polynomial_model,
)
from .noise import (
    ArrayStream,
    CovarianceKernel,
    DiscreteNoise,
    KERNEL_REGISTRY,
    constant_kernel,
    derive_substream,
    discretize_kernel,
    dump_qn_csv,
    exponential_kernel,
    gaussian_kernel,
    project_increments,
    sample_increments,
)
from .sim import (
    EnergyReport,
    SCHEMES,
    SolverConfig,
    Trajectory,
    energy_check,
    equilibrium_state,
    pulse_state,
    run_ensemble,
    run_trajectory,
    step,
    zero_state,
)
from .analysis import (
    ConvergenceStudy,
    OrderFit,
    StudyRow,
    convergence_study,
    fit_order,
    i_n_functional,
    state_error,
)
from .mc import (
    FailureEstimate,
    FailureSpec,
    clip_interval,
    confidence_halfwidth,
    estimate_failure_probability,
    failure_indicator,
    pulse_functional,
)

__version__ = "0.1.0"

__all__ = [
    "ConfigError",
    "TrajectoryOverflowError",
    "Grid",
    "GridFunction",
    "SystemState",
    "lp_norm",
    "v_seminorm",
    "h_norm_interpolant",
    "interpolate",
    "restrict",
    "refine_interpolant",
    "grid_function_to_csv",
    "grid_function_from_csv",
    "apply_laplacian",
    "sbp_defect",
    "solve_shifted_tridiagonal",
    "ReactionModel",
    "fhn_model",
    "fhn_equilibrium",
    "equilibrium",
    "polynomial_model",
    "CheckSpec",
    "AssumptionReport",
    "check_assumptions",
    "MODEL_REGISTRY",
    "CovarianceKernel",
    "DiscreteNoise",
    "constant_kernel",
    "gaussian_kernel",
    "exponential_kernel",
    "KERNEL_REGISTRY",
    "discretize_kernel",
    "sample_increments",
    "project_increments",
    "derive_substream",
    "ArrayStream",
    "dump_qn_csv",
    "SCHEMES",
    "SolverConfig",
    "Trajectory",
    "step",
    "run_trajectory",
    "run_ensemble",
    "EnergyReport",
    "energy_check",
    "equilibrium_state",
    "pulse_state",
    "zero_state",
    "state_error",
    "i_n_functional",
    "StudyRow",
    "ConvergenceStudy",
    "convergence_study",
    "OrderFit",
    "fit_order",
    "FailureSpec",
    "FailureEstimate",
    "pulse_functional",
    "failure_indicator",
    "estimate_failure_probability",
    "confidence_halfwidth",
    "clip_interval",
    "__version__",
]
