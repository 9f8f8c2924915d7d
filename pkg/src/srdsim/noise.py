"""Covariance kernels, their cell-averaged discretization, and seedable
Gaussian increment sampling for the driving noise.

The covariance operator is the square of the integral operator with
kernel ``q(xi, zeta)``, so its trace equals the squared L^2 norm of the
kernel.  On a grid with ``n`` cells the kernel is replaced by its cell
averages

    qn[k, l] = (1/h^2) * int_{cell k} int_{cell l} q(xi, zeta) dzeta dxi

for node rows ``k = 1..n`` and cell columns ``l = 1..n``; row 0 is
identically zero (node 0 receives no noise, node n does).  The matrix is
stored dense with shape ``(n + 1, n)``; column ``j`` holds cell
``l = j + 1``.

Over a time step ``dt`` the correlated nodal increment is

    delta_k = sqrt(h * dt) * sum_l qn[k, l] * z_l,     z_l iid N(0, 1),

which consumes exactly ``n`` standard normals in the order ``l = 1..n``.
Cell-indicator projections make increments exactly compatible across an
``r``-fold grid refinement: the coarse normal for a cell is the block sum
of the ``r`` fine normals divided by ``sqrt(r)``.  This identity is what
the convergence harness uses to couple runs at different resolutions to
one underlying noise realization.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import partial
from typing import Callable

import numpy as np

from .grid import Grid

__all__ = [
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
]


@dataclass(frozen=True)
class CovarianceKernel:
    """Kernel ``q(xi, zeta)`` with metadata.

    ``eval`` must be vectorized over numpy arrays and finite on the square
    domain.  Symmetry is not assumed.  ``theta_hint`` tags the kernel's
    smoothness class for reporting only; it has no runtime effect.
    """

    eval: Callable
    name: str
    params: dict = field(default_factory=dict)
    theta_hint: float = 0.75


def _constant_eval(xi, zeta, sigma):
    return np.full(np.broadcast(np.asarray(xi), np.asarray(zeta)).shape, sigma)


def _gaussian_eval(xi, zeta, sigma, ell):
    d = np.asarray(xi) - np.asarray(zeta)
    return sigma * np.exp(-(d * d) / (2.0 * ell * ell))


def _exponential_eval(xi, zeta, sigma, ell):
    d = np.abs(np.asarray(xi) - np.asarray(zeta))
    return sigma * np.exp(-d / ell)


def constant_kernel(sigma: float) -> CovarianceKernel:
    """Spatially uniform kernel ``q = sigma`` (perfectly correlated noise)."""
    return CovarianceKernel(
        eval=partial(_constant_eval, sigma=float(sigma)),
        name="constant",
        params={"sigma": float(sigma)},
        theta_hint=0.99,
    )


def gaussian_kernel(sigma: float, corr_length: float = 1.0) -> CovarianceKernel:
    """Smooth kernel ``sigma * exp(-(xi - zeta)^2 / (2 l^2))``."""
    if not corr_length > 0:
        raise ValueError("correlation length must be positive")
    return CovarianceKernel(
        eval=partial(_gaussian_eval, sigma=float(sigma), ell=float(corr_length)),
        name="gaussian",
        params={"sigma": float(sigma), "corr_length": float(corr_length)},
        theta_hint=0.99,
    )


def exponential_kernel(sigma: float, corr_length: float = 1.0) -> CovarianceKernel:
    """Kernel ``sigma * exp(-|xi - zeta| / l)`` with a ridge kink."""
    if not corr_length > 0:
        raise ValueError("correlation length must be positive")
    return CovarianceKernel(
        eval=partial(_exponential_eval, sigma=float(sigma), ell=float(corr_length)),
        name="exponential",
        params={"sigma": float(sigma), "corr_length": float(corr_length)},
        theta_hint=0.75,
    )


KERNEL_REGISTRY: dict[str, Callable[..., CovarianceKernel]] = {
    "constant": constant_kernel,
    "gaussian": gaussian_kernel,
    "exponential": exponential_kernel,
}


@dataclass(frozen=True)
class DiscreteNoise:
    """Cell-averaged covariance matrix and kernel trace on one grid."""

    grid: Grid
    qn: np.ndarray  # shape (n + 1, n); row 0 zero; column j is cell l = j + 1
    trace_q: float

    def __post_init__(self):
        n = self.grid.n
        if self.qn.shape != (n + 1, n):
            raise ValueError(f"qn must have shape ({n + 1}, {n}), got {self.qn.shape}")


def _cell_quadrature(grid: Grid, order: int):
    gx, gw = np.polynomial.legendre.leggauss(order)
    h = grid.h
    left = np.arange(grid.n) * h
    pts = left[:, None] + (gx[None, :] + 1.0) * (h / 2.0)
    wts = np.broadcast_to(gw * (h / 2.0), (grid.n, order)).copy()
    return pts.ravel(), wts.ravel()


def discretize_kernel(kernel: CovarianceKernel, grid: Grid, quad_order: int = 4) -> DiscreteNoise:
    """Cell-average a kernel with tensor Gauss-Legendre quadrature.

    ``quad_order`` points per cell and per direction; exact for kernels
    polynomial up to degree ``2*quad_order - 1`` on each cell.  Also
    computes ``trace_q = int int q^2`` (the covariance trace) with the
    same rule.

    Memory scales as ``(n * quad_order)^2`` for the pointwise kernel
    evaluation; n = 512 at order 4 needs ~35 MB.
    """
    if quad_order < 1:
        raise ValueError(f"quadrature order must be >= 1, got {quad_order}")
    X, W = _cell_quadrature(grid, quad_order)
    K = np.asarray(kernel.eval(X[:, None], X[None, :]), dtype=float)
    if K.shape != (X.size, X.size):
        raise ValueError("kernel eval must broadcast to a full matrix of points")
    if not np.all(np.isfinite(K)):
        raise ValueError(f"kernel '{kernel.name}' produced non-finite values")
    WW = W[:, None] * W[None, :]
    n, q = grid.n, quad_order
    cell_ints = (WW * K).reshape(n, q, n, q).sum(axis=(1, 3))
    trace = float((WW * K * K).sum())
    qn = np.zeros((n + 1, n))
    qn[1:, :] = cell_ints / (grid.h * grid.h)
    if not np.all(np.isfinite(qn)):
        raise ValueError(f"kernel '{kernel.name}' produced non-finite cell averages")
    return DiscreteNoise(grid=grid, qn=qn, trace_q=trace)


def sample_increments(noise: DiscreteNoise, dt: float, rng) -> np.ndarray:
    """One correlated nodal increment vector over a step of length ``dt``.

    Draws exactly ``n`` standard normals from ``rng`` (in cell order) and
    returns ``sqrt(h*dt) * qn @ z`` with entry 0 exactly zero.  Linear in
    the underlying normals, so stubbed streams scale exactly.
    """
    if not dt > 0:
        raise ValueError(f"dt must be positive, got {dt}")
    z = rng.standard_normal(noise.grid.n)
    out = np.sqrt(noise.grid.h * dt) * (noise.qn @ z)
    out[0] = 0.0
    return out


def project_increments(fine: np.ndarray, r: int) -> np.ndarray:
    """Project fine-grid standard normals onto an ``r``-fold coarser grid.

    The last axis is the cell axis; each coarse entry is the sum of its
    ``r`` fine entries divided by ``sqrt(r)``, which preserves the standard
    normal law exactly and is deterministic and linear.  ``r = 1`` is the
    identity.
    """
    if r < 1:
        raise ValueError(f"projection factor must be >= 1, got {r}")
    arr = np.asarray(fine, dtype=float)
    if arr.shape[-1] % r != 0:
        raise ValueError(f"fine cell count {arr.shape[-1]} not divisible by r={r}")
    if r == 1:
        return arr.copy()
    new_shape = arr.shape[:-1] + (arr.shape[-1] // r, r)
    return arr.reshape(new_shape).sum(axis=-1) / np.sqrt(r)


# ---------------------------------------------------------------------------
# reproducible per-trajectory streams
# ---------------------------------------------------------------------------

_MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15


def _mix64(z: int) -> int:
    """SplitMix64 avalanche finalizer."""
    z &= _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


def derive_substream(base_seed: int, index: int) -> np.random.Generator:
    """Independent, reproducible stream number ``index`` under ``base_seed``.

    The pair is mixed with a SplitMix64 finalizer (distinct indices map to
    distinct mixed seeds) and fed to a PCG64 generator.  Normal variates
    come from numpy's ziggurat ``standard_normal``, whose stream is frozen
    by numpy's generator-compatibility policy, so the same
    ``(base_seed, index)`` always reproduces the same draws on a given
    installation.
    """
    if index < 0:
        raise ValueError(f"stream index must be >= 0, got {index}")
    state = (int(base_seed) + (int(index) + 1) * _GOLDEN) & _MASK64
    return np.random.Generator(np.random.PCG64(_mix64(state)))


class ArrayStream:
    """Replay a fixed array through the ``standard_normal`` interface.

    Used to stub noise in tests and to feed pre-drawn (or projected)
    normals to trajectory runs; values are consumed in C order.
    """

    def __init__(self, values):
        self._values = np.asarray(values, dtype=float).ravel()
        self._pos = 0

    def standard_normal(self, size=None):
        if size is None:
            count, shape = 1, ()
        elif np.isscalar(size):
            count, shape = int(size), (int(size),)
        else:
            shape = tuple(int(s) for s in size)
            count = int(np.prod(shape)) if shape else 1
        end = self._pos + count
        if end > self._values.size:
            raise ValueError(
                f"stream exhausted: need {count} values, {self._values.size - self._pos} left"
            )
        out = self._values[self._pos:end].reshape(shape)
        self._pos = end
        return float(out) if size is None else out.copy()

    @property
    def remaining(self) -> int:
        return self._values.size - self._pos


def dump_qn_csv(noise: DiscreteNoise, path, comments: tuple[str, ...] = ()) -> None:
    """Write the discretized covariance matrix as ``k,l,value`` rows."""
    lines = [f"# {c}" for c in comments]
    lines.append("k,l,value")
    n = noise.grid.n
    for k in range(n + 1):
        for j in range(n):
            lines.append(f"{k},{j + 1},{noise.qn[k, j]:.17g}")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")
