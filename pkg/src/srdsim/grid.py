"""Uniform 1-D grids, nodal grid functions, and exact norms of their
piecewise-linear interpolants.

Conventions
-----------
A grid with ``n`` cells on ``[0, L]`` has ``n + 1`` nodes ``xi_k = k*h``,
``h = L/n``.  Cell ``k`` is the interval ``[(k-1)*h, k*h]`` for
``k = 1..n``.

Discrete norms follow the cell convention: sums run over ``k = 1..n``
with weight ``h``, so NODE 0 IS EXCLUDED from ``lp_norm``.  This is easy
to get wrong; it is deliberate and matches the seminorm/Laplacian
pairing used by :mod:`srdsim.operators`.

The ``V`` seminorm weights squared nodal differences by ``1/h`` and is
exactly the ``H^1`` seminorm of the piecewise-linear interpolant, whose
derivative on cell ``k`` is the constant ``(v_k - v_{k-1})/h``.  Norms of
interpolants are computed from closed-form cell formulas, never by
quadrature, so they are exact up to rounding.

All operations here are pure functions over immutable inputs; values may
be shared freely across threads.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
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
]


@dataclass(frozen=True)
class Grid:
    """Uniform grid with ``n`` cells on the interval ``[0, L]``."""

    n: int
    L: float = 1.0

    def __post_init__(self):
        if self.n < 1:
            raise ValueError(f"grid needs at least one cell, got n={self.n}")
        if not (self.L > 0 and np.isfinite(self.L)):
            raise ValueError(f"domain length must be positive and finite, got L={self.L}")

    @property
    def h(self) -> float:
        """Grid spacing ``L/n``."""
        return self.L / self.n

    def nodes(self) -> np.ndarray:
        """Node coordinates ``0, h, 2h, ..., L`` (length ``n + 1``)."""
        return np.linspace(0.0, self.L, self.n + 1)


@dataclass
class GridFunction:
    """Nodal values of a scalar field on a :class:`Grid`.

    ``values`` has length ``grid.n + 1`` (nodes ``0..n``) and is stored as
    a float64 array.  Instances are treated as immutable by every public
    operation in this package.
    """

    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        if vals.shape != (self.grid.n + 1,):
            raise ValueError(
                f"values must have shape ({self.grid.n + 1},), got {vals.shape}"
            )
        self.values = vals

    def copy(self) -> "GridFunction":
        return GridFunction(self.grid, self.values.copy())


@dataclass
class SystemState:
    """Paired activator/recovery fields ``(v, w)`` on a common grid."""

    v: GridFunction
    w: GridFunction

    def __post_init__(self):
        if self.v.grid != self.w.grid:
            raise ValueError("v and w must live on the same grid")

    @property
    def grid(self) -> Grid:
        return self.v.grid

    def copy(self) -> "SystemState":
        return SystemState(self.v.copy(), self.w.copy())


def lp_norm(v: GridFunction, p: float) -> float:
    """Discrete l_p functional ``h * sum_{k=1..n} |v_k|^p``.

    Node 0 is excluded from the sum.  On ``L = 1`` a constant field ``c``
    gives exactly ``|c|**p`` for every ``n`` (the weights sum to 1).

    Note this is the p-th power sum, not its p-th root.
    """
    if not p >= 1:
        raise ValueError(f"p must be >= 1, got {p}")
    vals = v.values[1:]
    if p == 2.0:
        return float(v.grid.h * np.dot(vals, vals))
    return float(v.grid.h * np.sum(np.abs(vals) ** p))


def v_seminorm(v: GridFunction) -> float:
    """H^1 seminorm of the piecewise-linear interpolant.

    Equals ``sqrt((1/h) * sum_{k=1..n} (v_k - v_{k-1})^2)``; exact because
    the interpolant's derivative is constant on each cell.
    """
    d = np.diff(v.values)
    return float(np.sqrt(np.dot(d, d) / v.grid.h))


def _h_norm_sq(values: np.ndarray, h: float) -> float:
    # exact L^2 norm squared of the piecewise-linear interpolant:
    # int over cell k of (linear)^2 = (h/3)(a^2 + a b + b^2)
    a = values[:-1]
    b = values[1:]
    return float((h / 3.0) * np.sum(a * a + a * b + b * b))


def h_norm_interpolant(v: GridFunction) -> float:
    """Exact L^2(0, L) norm of the piecewise-linear interpolant of ``v``."""
    return float(np.sqrt(_h_norm_sq(v.values, v.grid.h)))


def interpolate(v: GridFunction, xi) -> float | np.ndarray:
    """Evaluate the piecewise-linear interpolant at ``xi`` (scalar or array).

    Nodal points reproduce nodal values exactly: ``interpolate(v, k*h) == v_k``.
    Points outside ``[0, L]`` raise ``ValueError``.
    """
    grid = v.grid
    x = np.asarray(xi, dtype=float)
    if np.any(x < 0.0) or np.any(x > grid.L):
        raise ValueError(f"evaluation point outside [0, {grid.L}]")
    pos = x * (grid.n / grid.L)
    k = np.clip(np.floor(pos).astype(int), 0, grid.n - 1)
    frac = pos - k
    # snap to the node when xi is a rounding-unit away from k*h, so nodal
    # reproduction is exact rather than exact-up-to-one-ulp
    near = np.rint(pos)
    snap = np.abs(pos - near) < 1e-12 * np.maximum(1.0, np.abs(pos))
    k = np.where(snap, np.clip(near.astype(int), 0, grid.n - 1), k)
    frac = np.where(snap & (near <= grid.n - 1), 0.0, np.where(snap, 1.0, frac))
    out = (1.0 - frac) * v.values[k] + frac * v.values[k + 1]
    if np.isscalar(xi):
        return float(out)
    return out


def restrict(f, grid: Grid) -> GridFunction:
    """Sample a function defined on ``[0, L]`` at the grid nodes.

    ``f`` may be vectorized over numpy arrays or scalar-only.  Non-finite
    samples raise ``ValueError``.
    """
    x = grid.nodes()
    try:
        vals = np.asarray(f(x), dtype=float)
        if vals.shape != x.shape:
            raise TypeError
    except (TypeError, ValueError):
        vals = np.array([float(f(xk)) for xk in x])
    if not np.all(np.isfinite(vals)):
        raise ValueError("function returned non-finite values at grid nodes")
    return GridFunction(grid, vals)


def refine_interpolant(v: GridFunction, r: int) -> GridFunction:
    """Nodal samples of the interpolant of ``v`` on the ``r``-fold refined grid.

    The coarse interpolant is linear on every fine cell, so both
    :func:`h_norm_interpolant` and :func:`v_seminorm` are preserved exactly.
    ``r = 1`` returns an identical copy.
    """
    if r < 1:
        raise ValueError(f"refinement factor must be >= 1, got {r}")
    if r == 1:
        return v.copy()
    vals = v.values
    w = np.arange(r) / r
    cells = vals[:-1, None] * (1.0 - w[None, :]) + vals[1:, None] * w[None, :]
    fine_vals = np.append(cells.ravel(), vals[-1])
    return GridFunction(Grid(r * v.grid.n, v.grid.L), fine_vals)


def grid_function_to_csv(v: GridFunction, path, comments: tuple[str, ...] = ()) -> None:
    """Write ``xi,value`` rows with 17 significant digits.

    Optional ``comments`` are emitted first as ``#``-prefixed lines.
    """
    x = v.grid.nodes()
    lines = [f"# {c}" for c in comments]
    lines.append("xi,value")
    lines.extend(f"{xk:.17g},{vk:.17g}" for xk, vk in zip(x, v.values))
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def grid_function_from_csv(path) -> GridFunction:
    """Read a grid function written by :func:`grid_function_to_csv`."""
    xs, vals = [], []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#") or line == "xi,value":
                continue
            sx, sv = line.split(",")
            xs.append(float(sx))
            vals.append(float(sv))
    if len(xs) < 2:
        raise ValueError(f"{path}: need at least two nodes")
    x = np.asarray(xs)
    h = x[1] - x[0]
    if not np.allclose(np.diff(x), h, rtol=1e-9, atol=1e-12 * max(1.0, abs(h))):
        raise ValueError(f"{path}: nodes are not uniformly spaced")
    vals = np.asarray(vals)
    if not np.all(np.isfinite(vals)):
        raise ValueError(f"{path}: non-finite values")
    return GridFunction(Grid(len(xs) - 1, float(x[-1])), vals)
