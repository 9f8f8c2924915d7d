"""Time steppers for the spatially discretized system, the trajectory
runner, and the pathwise energy diagnostic.

The semidiscrete system on a grid with ``n`` cells is

    dv = [A v + phi1(xi, v, w)] dt + b(xi, v) * dDelta
    dw = phi2(xi, v, w) dt

with ``A`` the discrete Neumann Laplacian and ``dDelta`` the correlated
nodal noise increment from :mod:`srdsim.noise`.  Three one-step maps are
provided:

``explicit``
    Plain Euler-Maruyama.  Diverges under the cubic drift for moderate
    data; included to demonstrate why taming exists.
``tamed_explicit``
    The full drift ``F = A v + phi1`` is damped by the factor
    ``1/(1 + dt * ||F||)`` with the h-weighted Euclidean norm over nodes
    1..n (vector-level taming), so one step moves ``v`` by at most one
    unit plus noise regardless of ``|v|``.
``semi_implicit`` (default)
    The diffusion is folded into a linear solve ``(I - dt A) v+ = rhs``
    (unconditionally stable) and only the reaction is tamed, nodewise:
    ``rhs = v + dt * phi1/(1 + dt |phi1|) + b * dDelta``.

The recovery variable is always stepped explicitly with the old state;
its drift is globally Lipschitz so it needs neither taming nor
implicitness.  Both explicit schemes require the diffusion CFL bound
``dt <= h^2 / 2``, enforced at configuration time.

Energy bookkeeping: along every run the left-endpoint Riemann sums of
the squared V-seminorm and of the ``l_{m+1}`` functional of ``v`` are
accumulated (this biases the diagnostic by O(dt), consistently with the
Ito integral), and at each recorded instant the tuple
``(l2(v), l2(w), int ||v||^2, int l_{m+1}(v))`` is stored.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy.linalg import cho_solve_banded

from .errors import ConfigError, TrajectoryOverflowError
from .grid import Grid, GridFunction, SystemState
from .model import ReactionModel
from .noise import DiscreteNoise, derive_substream
from .operators import _laplacian_values, _shift_cholesky

__all__ = [
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
]

SCHEMES = ("tamed_explicit", "semi_implicit", "explicit")

_NOISE_BLOCK = 512  # steps of increments drawn per batch in the hot loop


@dataclass(frozen=True)
class SolverConfig:
    """Time-stepping configuration for one grid resolution.

    ``record_stride`` controls how often scalar diagnostics (pulse
    functional, energies) are stored; ``snapshot_stride = 0`` disables
    full-field snapshots.  The final step is always recorded.
    """

    n: int
    L: float
    dt: float
    T: float
    T0: float = 0.0
    scheme: str = "semi_implicit"
    record_stride: int = 1
    snapshot_stride: int = 0

    def validate(self) -> None:
        if self.n < 1:
            raise ConfigError(f"grid needs at least one cell, got n={self.n}")
        if not (self.L > 0 and np.isfinite(self.L)):
            raise ConfigError(f"domain length must be positive, got L={self.L}")
        if not (self.dt > 0 and np.isfinite(self.dt)):
            raise ConfigError(f"time step must be positive, got dt={self.dt}")
        if not (self.T >= 0 and np.isfinite(self.T)):
            raise ConfigError(f"horizon must be >= 0, got T={self.T}")
        if not 0.0 <= self.T0 <= self.T:
            raise ConfigError(f"observation start T0={self.T0} outside [0, T={self.T}]")
        if self.scheme not in SCHEMES:
            raise ConfigError(f"unknown scheme '{self.scheme}', pick one of {SCHEMES}")
        if self.record_stride < 1:
            raise ConfigError("record_stride must be >= 1")
        if self.snapshot_stride < 0:
            raise ConfigError("snapshot_stride must be >= 0")
        if self.scheme in ("explicit", "tamed_explicit"):
            h = self.L / self.n
            cfl = h * h / 2.0
            if self.dt > cfl * (1.0 + 1e-12):
                raise ConfigError(
                    f"scheme '{self.scheme}' needs dt <= h^2/2 = {cfl:.6g} "
                    f"(n={self.n}, L={self.L}), got dt={self.dt}"
                )

    @property
    def grid(self) -> Grid:
        return Grid(self.n, self.L)

    @property
    def steps(self) -> int:
        # guard against 1/dt landing one ulp above an integer
        return int(math.ceil(self.T / self.dt - 1e-9)) if self.T > 0 else 0


@dataclass
class Trajectory:
    """Recorded time series of one sample path.

    ``energy`` has one row per record: ``(l2(v), l2(w), int ||v||^2 ds,
    int l_{m+1}(v) ds)`` with the integrals accumulated from t = 0.
    ``min_phi_after_t0`` is the minimum of the pulse functional over the
    recorded instants with ``t >= T0``; +inf when no record falls there.
    """

    times: np.ndarray
    phi_series: np.ndarray
    min_phi_after_t0: float
    energy: np.ndarray
    snapshots: list[SystemState] | None = None
    snapshot_times: np.ndarray | None = None


@np.errstate(over="ignore", invalid="ignore")  # blow-up is detected, not warned
def _step_arrays(v, w, xi, model, incr, dt, scheme, h, chol):
    phi1 = model.phi1(xi, v, w)
    phi2 = model.phi2(xi, v, w)
    noise_term = model.b(xi, v) * incr
    if scheme == "semi_implicit":
        tamed = phi1 / (1.0 + dt * np.abs(phi1))
        rhs = v + dt * tamed + noise_term
        v_new = cho_solve_banded((chol, False), rhs)
    elif scheme == "tamed_explicit":
        F = _laplacian_values(v, h) + phi1
        denom = 1.0 + dt * math.sqrt(h * float(np.dot(F[1:], F[1:])))
        v_new = v + (dt / denom) * F + noise_term
    elif scheme == "explicit":
        F = _laplacian_values(v, h) + phi1
        v_new = v + dt * F + noise_term
    else:
        raise ConfigError(f"unknown scheme '{scheme}'")
    w_new = w + dt * phi2
    return v_new, w_new


def step(
    state: SystemState,
    model: ReactionModel,
    noise_increment: np.ndarray,
    dt: float,
    scheme: str = "semi_implicit",
) -> SystemState:
    """Advance one step and return the new state.

    ``noise_increment`` is a nodal increment vector as produced by
    :func:`srdsim.noise.sample_increments` on the same grid.  The caller
    is responsible for the CFL bound when using an explicit scheme.
    """
    grid = state.grid
    incr = np.asarray(noise_increment, dtype=float)
    if incr.shape != (grid.n + 1,):
        raise ValueError(f"noise increment must have shape ({grid.n + 1},)")
    if scheme not in SCHEMES:
        raise ConfigError(f"unknown scheme '{scheme}', pick one of {SCHEMES}")
    chol = _shift_cholesky(dt, grid.n, grid.h) if scheme == "semi_implicit" else None
    xi = grid.nodes()
    v_new, w_new = _step_arrays(
        state.v.values, state.w.values, xi, model, incr, dt, scheme, grid.h, chol
    )
    return SystemState(GridFunction(grid, v_new), GridFunction(grid, w_new))


def _lm_sum(v: np.ndarray, h: float, mp1: float) -> float:
    body = v[1:]
    if mp1 == 4.0:
        sq = body * body
        return h * float(np.dot(sq, sq))
    return h * float(np.sum(np.abs(body) ** mp1))


def run_trajectory(
    config: SolverConfig,
    model: ReactionModel,
    noise: DiscreteNoise,
    v0: GridFunction,
    w0: GridFunction,
    rng,
) -> Trajectory:
    """March one sample path and record its diagnostics.

    Consumes exactly ``n`` standard normals per step from ``rng`` in cell
    order (drawn in blocks; a run aborted by overflow may have advanced
    the stream past the failing step).  Identical (config, model, noise,
    seed) reproduce bit-identical trajectories on one installation.

    Raises :class:`TrajectoryOverflowError` as soon as a step produces a
    non-finite value, carrying the step index and scheme.
    """
    config.validate()
    grid = config.grid
    if v0.grid != grid or w0.grid != grid:
        raise ValueError("initial data must live on the configured grid")
    if noise.grid != grid:
        raise ValueError("discretized noise must live on the configured grid")

    h = grid.h
    xi = grid.nodes()
    dt = config.dt
    nsteps = config.steps
    scheme = config.scheme
    chol = _shift_cholesky(dt, grid.n, h) if scheme == "semi_implicit" else None

    v = v0.values.copy()
    w = w0.values.copy()

    v_star = model.rest_state[0]
    trap = np.full(grid.n + 1, h)
    trap[0] = trap[-1] = h / 2.0
    phi_offset = grid.L * v_star
    mp1 = model.m + 1.0

    # sqrt(h*dt) * Z @ qn.T gives increments for a block of steps at once
    scale = math.sqrt(h * dt)
    qn_t = noise.qn.T

    times, phis, energy = [], [], []
    snaps: list[SystemState] = []
    snap_times: list[float] = []
    int_vsem = 0.0
    int_lm = 0.0
    min_phi = math.inf
    t0_cut = config.T0 - 1e-9 * max(1.0, abs(config.T0))

    def record(i: int) -> None:
        nonlocal min_phi
        t = i * dt
        phi = float(np.dot(trap, v)) - phi_offset
        times.append(t)
        phis.append(phi)
        energy.append(
            (
                h * float(np.dot(v[1:], v[1:])),
                h * float(np.dot(w[1:], w[1:])),
                int_vsem,
                int_lm,
            )
        )
        if t >= t0_cut and phi < min_phi:
            min_phi = phi

    def snapshot(i: int) -> None:
        snaps.append(SystemState(GridFunction(grid, v.copy()), GridFunction(grid, w.copy())))
        snap_times.append(i * dt)

    block_incr = None
    block_pos = 0
    drawn = 0
    with np.errstate(over="ignore", invalid="ignore"):
        for i in range(nsteps):
            if i % config.record_stride == 0:
                record(i)
            if config.snapshot_stride > 0 and i % config.snapshot_stride == 0:
                snapshot(i)
            d = np.diff(v)
            int_vsem += dt * float(np.dot(d, d)) / h
            int_lm += dt * _lm_sum(v, h, mp1)
            if block_incr is None or block_pos >= block_incr.shape[0]:
                block = min(_NOISE_BLOCK, nsteps - drawn)
                z = rng.standard_normal((block, grid.n))
                block_incr = scale * (z @ qn_t)
                block_incr[:, 0] = 0.0
                block_pos = 0
                drawn += block
            v, w = _step_arrays(v, w, xi, model, block_incr[block_pos], dt, scheme, h, chol)
            block_pos += 1
            if not (np.all(np.isfinite(v)) and np.all(np.isfinite(w))):
                raise TrajectoryOverflowError(i + 1, (i + 1) * dt, scheme)
    # the loop records indices 0..nsteps-1, so the final state is always new
    record(nsteps)
    if config.snapshot_stride > 0:
        snapshot(nsteps)

    return Trajectory(
        times=np.asarray(times),
        phi_series=np.asarray(phis),
        min_phi_after_t0=min_phi,
        energy=np.asarray(energy),
        snapshots=snaps if config.snapshot_stride > 0 else None,
        snapshot_times=np.asarray(snap_times) if config.snapshot_stride > 0 else None,
    )


# ---------------------------------------------------------------------------
# initial conditions
# ---------------------------------------------------------------------------

def equilibrium_state(model: ReactionModel, grid: Grid) -> SystemState:
    """Spatially constant state at the model's rest point."""
    v_star, w_star = model.rest_state
    return SystemState(
        GridFunction(grid, np.full(grid.n + 1, v_star)),
        GridFunction(grid, np.full(grid.n + 1, w_star)),
    )


def pulse_state(
    model: ReactionModel, grid: Grid, amplitude: float = 2.0, width: float = 2.0
) -> SystemState:
    """Rest state plus a supra-threshold Gaussian bump at the left boundary.

    ``v0 = v_star + amplitude * exp(-(xi/width)^2)``, ``w0 = w_star``.
    With the FitzHugh-Nagumo preset on L = 20 the defaults launch a
    right-traveling pulse.
    """
    v_star, w_star = model.rest_state
    xi = grid.nodes()
    v = v_star + amplitude * np.exp(-((xi / width) ** 2))
    return SystemState(
        GridFunction(grid, v), GridFunction(grid, np.full(grid.n + 1, w_star))
    )


def zero_state(grid: Grid) -> SystemState:
    """Identically zero fields."""
    z = np.zeros(grid.n + 1)
    return SystemState(GridFunction(grid, z), GridFunction(grid, z.copy()))


# ---------------------------------------------------------------------------
# ensembles
# ---------------------------------------------------------------------------

def _ensemble_sample(args):
    config, model, noise, state0, base_seed, index = args
    rng = derive_substream(base_seed, index)
    try:
        traj = run_trajectory(config, model, noise, state0.v, state0.w, rng)
        return index, traj, None
    except TrajectoryOverflowError as exc:
        return index, None, exc


def parallel_map(fn: Callable, items: Sequence, threads: int) -> list:
    """Order-preserving map, optionally over a process pool.

    Results are reduced in ascending item order regardless of worker
    scheduling, so the thread count never changes outputs.
    """
    items = list(items)
    if threads <= 1 or len(items) <= 1:
        return [fn(it) for it in items]
    with ProcessPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items, chunksize=max(1, len(items) // (4 * threads))))


def run_ensemble(
    config: SolverConfig,
    model: ReactionModel,
    noise: DiscreteNoise,
    initial_state: SystemState,
    base_seed: int,
    samples: int,
    threads: int = 1,
) -> tuple[list[Trajectory], list[TrajectoryOverflowError]]:
    """Run ``samples`` independent paths from one initial state.

    Each sample uses the substream ``derive_substream(base_seed, index)``.
    Returns the completed trajectories (ascending sample order) and the
    overflow errors of any samples that blew up.
    """
    args = [
        (config, model, noise, initial_state, base_seed, k) for k in range(samples)
    ]
    results = parallel_map(_ensemble_sample, args, threads)
    trajectories = [t for _, t, e in results if e is None]
    failures = [e for _, t, e in results if e is not None]
    return trajectories, failures


# ---------------------------------------------------------------------------
# pathwise energy diagnostic
# ---------------------------------------------------------------------------

@dataclass
class EnergyReport:
    """Sample-mean energy balance versus its a priori bound."""

    lhs_mean: float
    rhs_bound: float
    mc_stderr: float
    margin: float
    samples: int

    @property
    def passed(self) -> bool:
        return self.lhs_mean <= self.rhs_bound + 3.0 * self.mc_stderr


def energy_check(
    trajectories: Sequence[Trajectory],
    model: ReactionModel,
    noise: DiscreteNoise,
    T: float,
) -> EnergyReport:
    """Check the pathwise energy balance of an ensemble.

    For each trajectory the left-hand side is

        l2(v(T)) + l2(w(T)) + 2 * int_0^T ||v||^2 ds + 2*gamma * int_0^T l_{m+1}(v) ds

    taken from the final record; the bound is

        exp(2 max(L_lip, beta) T) * ( mean[l2(v0) + l2(w0)] + T * trace_q ).

    Passes when the sample mean does not exceed the bound by more than
    three Monte-Carlo standard errors.
    """
    if len(trajectories) == 0:
        raise ValueError("need at least one trajectory")
    final_t = trajectories[0].times[-1]
    for traj in trajectories:
        if abs(traj.times[-1] - final_t) > 1e-9 * max(1.0, abs(final_t)):
            raise ValueError("trajectories come from differing configurations")
    lhs = np.array(
        [
            tr.energy[-1, 0]
            + tr.energy[-1, 1]
            + 2.0 * tr.energy[-1, 2]
            + 2.0 * model.gamma * tr.energy[-1, 3]
            for tr in trajectories
        ]
    )
    init = np.array([tr.energy[0, 0] + tr.energy[0, 1] for tr in trajectories])
    rhs = math.exp(2.0 * max(model.L_lip, model.beta) * T) * (
        float(init.mean()) + T * noise.trace_q
    )
    lhs_mean = float(lhs.mean())
    stderr = float(lhs.std(ddof=1) / math.sqrt(len(lhs))) if len(lhs) > 1 else 0.0
    return EnergyReport(
        lhs_mean=lhs_mean,
        rhs_bound=rhs,
        mc_stderr=stderr,
        margin=rhs - lhs_mean,
        samples=len(lhs),
    )
