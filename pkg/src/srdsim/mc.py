"""Propagation-failure statistics: the pulse functional, the failure
indicator, the Bernoulli estimator over independent trajectories, and the
Chebyshev confidence half-width that also budgets the discretization bias.

A healthy traveling pulse keeps the integral of ``v - v_star`` large;
when noise kills the pulse the field relaxes to rest and the integral
collapses.  Failure of a path means this functional dips to ``kappa``
or below at some observed time in ``[T0, T]``.  The estimator counts
failures at the tightened threshold ``kappa - epsilon``; the epsilon
margin is what lets the confidence interval absorb the spatial
approximation error through the calibration constant ``c_hat``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

from .errors import TrajectoryOverflowError
from .grid import Grid, GridFunction, SystemState
from .model import ReactionModel
from .noise import DiscreteNoise, derive_substream
from .sim import SolverConfig, Trajectory, parallel_map, pulse_state, run_trajectory

__all__ = [
    "FailureSpec",
    "pulse_functional",
    "failure_indicator",
    "FailureEstimate",
    "estimate_failure_probability",
    "confidence_halfwidth",
    "clip_interval",
]


@dataclass(frozen=True)
class FailureSpec:
    """Failure threshold, estimator margin, and confidence parameters.

    ``epsilon = 0`` selects the raw-threshold variant of the indicator;
    it then requires ``c_hat = 0`` in the half-width formula.
    """

    kappa: float
    epsilon: float = 0.1
    T0: float = 0.0
    confidence_alpha: float = 0.05
    c_hat: float = 1.0
    m: int = 100

    def __post_init__(self):
        if not self.kappa > 0:
            raise ValueError(f"threshold kappa must be positive, got {self.kappa}")
        if not 0.0 <= self.epsilon < self.kappa:
            raise ValueError(
                f"margin epsilon must lie in [0, kappa), got {self.epsilon}"
            )
        if not 0.0 < self.confidence_alpha < 1.0:
            raise ValueError("confidence_alpha must lie in (0, 1)")
        if self.c_hat < 0:
            raise ValueError("c_hat must be >= 0")
        if self.m < 1:
            raise ValueError("need at least one sample")


def pulse_functional(v: GridFunction, v_star: float) -> float:
    """Integral of ``v - v_star`` over the domain (exact for the interpolant).

    The trapezoid rule is exact for piecewise-linear integrands:
    ``h * (sum_{k=1..n-1} v_k + (v_0 + v_n)/2) - L * v_star``.
    Shifting ``v`` by a constant ``c`` shifts the value by ``c * L``.
    """
    vals = v.values
    h = v.grid.h
    inner = float(vals[1:-1].sum()) if vals.size > 2 else 0.0
    return h * (inner + 0.5 * (vals[0] + vals[-1])) - v.grid.L * v_star


def failure_indicator(traj: Trajectory, spec: FailureSpec) -> bool:
    """True when the recorded pulse functional dipped to ``kappa - epsilon``
    or below at some recorded instant in ``[T0, T]`` (inclusive threshold)."""
    if traj.times[-1] < spec.T0 - 1e-9 * max(1.0, abs(spec.T0)):
        raise ValueError(
            f"records end at t={traj.times[-1]:.6g}, before T0={spec.T0:.6g}"
        )
    return traj.min_phi_after_t0 <= spec.kappa - spec.epsilon


@dataclass
class FailureEstimate:
    """Failure count statistics of one estimator run.

    ``indicators[k]`` is 1/0 for sample ``k``, or -1 when that sample's
    trajectory overflowed and was excluded from ``m_effective``.
    """

    p_hat: float
    failures: int
    m_effective: int
    m_requested: int
    overflows: int
    indicators: list[int]
    base_seed: int


def _failure_sample(args):
    config, model, noise, state0, spec, base_seed, index = args
    rng = derive_substream(base_seed, index)
    try:
        traj = run_trajectory(config, model, noise, state0.v, state0.w, rng)
    except TrajectoryOverflowError:
        return index, -1
    return index, int(failure_indicator(traj, spec))


def estimate_failure_probability(
    config: SolverConfig,
    model: ReactionModel,
    noise: DiscreteNoise,
    spec: FailureSpec,
    base_seed: int,
    initial_state: SystemState | None = None,
    threads: int = 1,
) -> FailureEstimate:
    """Bernoulli estimate of the failure probability over ``spec.m`` paths.

    Sample ``k`` runs on the substream ``derive_substream(base_seed, k)``,
    so the estimate is reproducible and independent of the thread count.
    Overflowed trajectories are excluded from the effective sample count
    with a warning, never imputed as failures or successes.
    """
    if initial_state is None:
        initial_state = pulse_state(model, Grid(config.n, config.L))
    args = [
        (config, model, noise, initial_state, spec, base_seed, k)
        for k in range(spec.m)
    ]
    results = parallel_map(_failure_sample, args, threads)
    indicators = [outcome for _, outcome in results]
    overflows = sum(1 for x in indicators if x < 0)
    failures = sum(1 for x in indicators if x == 1)
    m_eff = spec.m - overflows
    if overflows:
        warnings.warn(
            f"{overflows}/{spec.m} trajectories overflowed and were excluded",
            stacklevel=2,
        )
    p_hat = failures / m_eff if m_eff > 0 else math.nan
    return FailureEstimate(
        p_hat=p_hat,
        failures=failures,
        m_effective=m_eff,
        m_requested=spec.m,
        overflows=overflows,
        indicators=indicators,
        base_seed=base_seed,
    )


def confidence_halfwidth(spec: FailureSpec, n: int) -> float:
    """Half-width of the Chebyshev confidence interval at level alpha:

        gamma = (alpha * m)^(-1/2) * sqrt(1 + 4 * c_hat / (epsilon^2 * n)).

    ``c_hat`` surrogates the (unknown) constant of the mean-square spatial
    error; with ``c_hat = 0`` the width reduces to the pure Monte-Carlo
    Chebyshev term.  The level is conservative, not exact.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if spec.c_hat == 0.0:
        bias = 0.0
    else:
        if spec.epsilon <= 0.0:
            raise ValueError("epsilon must be positive when c_hat > 0")
        bias = 4.0 * spec.c_hat / (spec.epsilon ** 2 * n)
    return math.sqrt((1.0 + bias) / (spec.confidence_alpha * spec.m))


def clip_interval(p_hat: float, gamma: float) -> tuple[float, float]:
    """Confidence interval clipped to [0, 1] for reporting."""
    return max(0.0, p_hat - gamma), min(1.0, p_hat + gamma)
