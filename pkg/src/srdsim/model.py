"""Reaction models: nonlinearities, their structural constants, the
FitzHugh-Nagumo preset, and numerical spot-checks of the structural
inequalities the solver relies on.

A :class:`ReactionModel` bundles three vectorized callables

    phi1(xi, v, w) -> drift of the diffusing component
    phi2(xi, v, w) -> drift of the recovery component
    b(xi, v)       -> scalar noise intensity, |b| <= 1

together with the constants of the one-sided Lipschitz / dissipativity /
growth inequalities (``L_lip``, ``beta``, ``gamma``, ``m``, ``M_growth``)
and a ``rest_state`` about which dissipativity is measured.

The checks are sampling-based, not symbolic: models are opaque callables,
so :func:`check_assumptions` draws random points in a box and reports the
worst margin of each inequality.  A negative margin is data in the report,
never an exception.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import partial
from typing import Callable

import numpy as np

__all__ = [
    "ReactionModel",
    "fhn_model",
    "fhn_equilibrium",
    "equilibrium",
    "polynomial_model",
    "CheckSpec",
    "AssumptionReport",
    "check_assumptions",
    "MODEL_REGISTRY",
]


@dataclass(frozen=True)
class ReactionModel:
    """Reaction nonlinearities with their structural constants.

    ``m`` is the superlinear growth exponent of ``phi1`` and must lie in
    ``(1, 3]``; ``L_lip``, ``gamma`` and ``M_growth`` must be positive.
    ``rest_state`` is the (v, w) point about which the dissipativity
    inequality is evaluated; for models whose drift vanishes at the origin
    keep the default ``(0, 0)``.
    """

    phi1: Callable
    phi2: Callable
    b: Callable
    L_lip: float
    beta: float
    gamma: float
    m: float
    M_growth: float
    rest_state: tuple[float, float] = (0.0, 0.0)
    name: str = "custom"

    def __post_init__(self):
        if not (1.0 < self.m <= 3.0):
            raise ValueError(f"growth exponent m must lie in (1, 3], got {self.m}")
        for key in ("L_lip", "gamma", "M_growth"):
            if not getattr(self, key) > 0:
                raise ValueError(f"{key} must be positive")


# ---------------------------------------------------------------------------
# FitzHugh-Nagumo preset
# ---------------------------------------------------------------------------

def _fhn_phi1(xi, v, w):
    return v - v ** 3 / 3.0 - w


def _fhn_phi2(xi, v, w):
    return 0.08 * (v - 0.8 * w + 0.7)


def _unit_intensity(xi, v):
    return np.ones_like(np.asarray(v, dtype=float))


def fhn_equilibrium() -> tuple[float, float]:
    """Rest point of the FitzHugh-Nagumo drift.

    Eliminating w via ``phi2 = 0`` (w = (v + 0.7)/0.8) leaves the strictly
    decreasing cubic ``v - v^3/3 - (v + 0.7)/0.8``, whose unique real root
    is bracketed in [-2, 0] and bisected to machine precision.
    Returns ``(v_star, w_star)`` with ``v_star ~ -1.19941``.
    """

    def poly(v):
        return v - v ** 3 / 3.0 - (v + 0.7) / 0.8

    lo, hi = -2.0, 0.0
    flo = poly(lo)
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if mid == lo or mid == hi:
            break
        fmid = poly(mid)
        if flo * fmid <= 0.0:
            hi = mid
        else:
            lo, flo = mid, fmid
    v_star = 0.5 * (lo + hi)
    return v_star, (v_star + 0.7) / 0.8


def equilibrium(model: "ReactionModel | None" = None) -> tuple[float, float]:
    """Rest point of a model (the FitzHugh-Nagumo preset by default)."""
    if model is None or model.name == "fhn":
        return fhn_equilibrium()
    return model.rest_state


def fhn_model() -> ReactionModel:
    """FitzHugh-Nagumo nonlinearities with the classic parameter set.

        phi1 = v - v^3/3 - w
        phi2 = 0.08 (v - 0.8 w + 0.7)
        b = 1   (noise amplitude lives in the covariance kernel)

    The structural constants are one admissible choice, verified by the
    sampling checker on |v|, |w| <= 5 about the rest state: L_lip = 2.5,
    beta = 1, gamma = 1/6, m = 3, M_growth = 2.  Dissipativity cannot hold
    about the origin for this drift (phi2 has the affine offset 0.056), so
    the rest state is the unique equilibrium.
    """
    v_star, w_star = fhn_equilibrium()
    return ReactionModel(
        phi1=_fhn_phi1,
        phi2=_fhn_phi2,
        b=_unit_intensity,
        L_lip=2.5,
        beta=1.0,
        gamma=1.0 / 6.0,
        m=3.0,
        M_growth=2.0,
        rest_state=(v_star, w_star),
        name="fhn",
    )


# ---------------------------------------------------------------------------
# user-definable polynomial models
# ---------------------------------------------------------------------------

def _poly_phi1(xi, v, w, v_coeffs, w_coeff):
    return np.polynomial.polynomial.polyval(v, v_coeffs) + w_coeff * w


def _poly_phi2(xi, v, w, v_coeff, w_coeff, const):
    return v_coeff * v + w_coeff * w + const


def _const_intensity(xi, v, value):
    return np.full_like(np.asarray(v, dtype=float), value)


def polynomial_model(
    phi1_v_coeffs,
    phi1_w_coeff: float,
    phi2_v_coeff: float,
    phi2_w_coeff: float,
    phi2_const: float = 0.0,
    b_const: float = 1.0,
    L_lip: float = 2.5,
    beta: float = 1.0,
    gamma: float = 1.0 / 6.0,
    m: float = 3.0,
    M_growth: float = 2.0,
    rest_state: tuple[float, float] = (0.0, 0.0),
    name: str = "poly",
) -> ReactionModel:
    """Build a model with polynomial-in-v drift:

        phi1 = sum_i c_i v^i + phi1_w_coeff * w     (c = phi1_v_coeffs, ascending)
        phi2 = phi2_v_coeff * v + phi2_w_coeff * w + phi2_const
        b    = b_const

    The constants default to the FitzHugh-Nagumo choices; pass model-specific
    values when the drift differs materially, and validate them with
    :func:`check_assumptions`.
    """
    coeffs = tuple(float(c) for c in phi1_v_coeffs)
    return ReactionModel(
        phi1=partial(_poly_phi1, v_coeffs=coeffs, w_coeff=float(phi1_w_coeff)),
        phi2=partial(
            _poly_phi2,
            v_coeff=float(phi2_v_coeff),
            w_coeff=float(phi2_w_coeff),
            const=float(phi2_const),
        ),
        b=partial(_const_intensity, value=float(b_const)),
        L_lip=L_lip,
        beta=beta,
        gamma=gamma,
        m=m,
        M_growth=M_growth,
        rest_state=rest_state,
        name=name,
    )


MODEL_REGISTRY: dict[str, Callable[[], ReactionModel]] = {
    "fhn": fhn_model,
}


# ---------------------------------------------------------------------------
# sampling-based assumption checks
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CheckSpec:
    """Sampling box and budget for :func:`check_assumptions`."""

    box_v: float = 5.0
    box_w: float = 5.0
    xi_max: float = 1.0
    samples: int = 100_000
    seed: int = 0

    def __post_init__(self):
        if not (self.box_v > 0 and self.box_w > 0 and self.xi_max > 0):
            raise ValueError("sampling box must have positive extent")
        if self.samples < 1:
            raise ValueError("need at least one sample")


@dataclass
class AssumptionReport:
    """Worst margin per inequality; a negative margin means a failed check."""

    margins: dict[str, float]
    worst_points: dict[str, tuple]
    samples: int

    @property
    def passed(self) -> bool:
        return all(m >= 0.0 for m in self.margins.values())

    def failed_items(self) -> list[str]:
        return [k for k, m in self.margins.items() if m < 0.0]


def _record(margins, points, key, margin_arr, *coords):
    i = int(np.argmin(margin_arr))
    margins[key] = float(margin_arr[i])
    points[key] = tuple(float(np.asarray(c).ravel()[i]) for c in coords)


def check_assumptions(model: ReactionModel, spec: CheckSpec = CheckSpec()) -> AssumptionReport:
    """Spot-check the structural inequalities on random points.

    Draws ``spec.samples`` tuples with ``xi in [0, xi_max]`` and
    ``|v|, |w|`` within the box, evaluates each inequality with the model's
    constants, and reports the worst margin (inequality slack) per item:

    * A1  one-sided Lipschitz bound on drift differences,
    * A2  dissipativity about ``model.rest_state``,
    * A3/A4  growth bounds on phi1 / phi2,
    * A5/A6  local Lipschitz bounds on phi1 / phi2,
    * A8  boundedness (|b| <= 1) and Lipschitz continuity of b.

    The drift is evaluated at ``rest_state + (v, w)`` throughout, so for
    models at rest at the origin this is the plain inequality set.  This is
    a randomized check on a bounded box, not a proof.
    """
    rng = np.random.default_rng(spec.seed)
    N = int(spec.samples)
    vr, wr = model.rest_state
    xi1 = rng.uniform(0.0, spec.xi_max, N)
    xi2 = rng.uniform(0.0, spec.xi_max, N)
    v1 = rng.uniform(-spec.box_v, spec.box_v, N)
    v2 = rng.uniform(-spec.box_v, spec.box_v, N)
    w1 = rng.uniform(-spec.box_w, spec.box_w, N)
    w2 = rng.uniform(-spec.box_w, spec.box_w, N)

    p1_1 = model.phi1(xi1, vr + v1, wr + w1)
    p1_2 = model.phi1(xi2, vr + v2, wr + w2)
    p2_1 = model.phi2(xi1, vr + v1, wr + w1)
    p2_2 = model.phi2(xi2, vr + v2, wr + w2)

    margins: dict[str, float] = {}
    points: dict[str, tuple] = {}
    L, M = model.L_lip, model.M_growth

    dv, dw, dxi = v1 - v2, w1 - w2, np.abs(xi1 - xi2)
    m1 = L * (dv ** 2 + dw ** 2) - ((p1_1 - p1_2) * dv + (p2_1 - p2_2) * dw)
    _record(margins, points, "A1", m1, v1, w1, v2, w2)

    m2 = (
        model.beta * w1 ** 2
        + L * v1 ** 2
        - model.gamma * np.abs(v1) ** (model.m + 1.0)
        - (p1_1 * v1 + p2_1 * w1)
    )
    _record(margins, points, "A2", m2, v1, w1)

    m3 = M * (1.0 + np.abs(v1) ** model.m + np.abs(w1)) - np.abs(p1_1)
    _record(margins, points, "A3", m3, v1, w1)

    m4 = M * (1.0 + np.abs(v1) + np.abs(w1)) - np.abs(p2_1)
    _record(margins, points, "A4", m4, v1, w1)

    grow = 1.0 + np.abs(v1) ** (model.m - 1.0) + np.abs(v2) ** (model.m - 1.0)
    sep = dxi + np.abs(dv) + np.abs(dw)
    m5 = L * grow * sep - np.abs(p1_1 - p1_2)
    _record(margins, points, "A5", m5, v1, w1, v2, w2)

    m6 = L * sep - np.abs(p2_1 - p2_2)
    _record(margins, points, "A6", m6, v1, w1, v2, w2)

    b1 = model.b(xi1, vr + v1)
    b2 = model.b(xi2, vr + v2)
    bound = 1.0 - np.abs(b1)
    lip = (dxi + np.abs(dv)) - np.abs(b1 - b2)
    m8 = np.minimum(bound, lip)
    _record(margins, points, "A8", m8, xi1, v1)

    return AssumptionReport(margins=margins, worst_points=points, samples=N)
