import numpy as np
import pytest

from srdsim import (
    CheckSpec,
    MODEL_REGISTRY,
    ReactionModel,
    check_assumptions,
    equilibrium,
    fhn_equilibrium,
    fhn_model,
    polynomial_model,
)


def test_fhn_drift_values():
    m = fhn_model()
    assert m.phi1(0.0, 0.0, 0.0) == 0.0
    assert m.phi2(0.0, 0.0, 0.0) == pytest.approx(0.056, rel=1e-15)
    assert np.all(m.b(np.zeros(3), np.ones(3)) == 1.0)


def test_equilibrium_location():
    v_star, w_star = fhn_equilibrium()
    assert v_star == pytest.approx(-1.1994, abs=5e-5)
    assert w_star == pytest.approx((v_star + 0.7) / 0.8, rel=1e-14)


def test_equilibrium_is_a_root():
    m = fhn_model()
    v_star, w_star = m.rest_state
    assert abs(m.phi1(0.0, v_star, w_star)) < 1e-10
    assert abs(m.phi2(0.0, v_star, w_star)) < 1e-10


def test_equilibrium_unique_on_scan():
    # the reduced cubic changes sign exactly once on [-4, 4]
    v = np.arange(-4.0, 4.0, 1e-3)
    f = v - v**3 / 3.0 - (v + 0.7) / 0.8
    assert int(np.sum(np.diff(np.sign(f)) != 0)) == 1


def test_equilibrium_helper_dispatch():
    assert equilibrium() == fhn_equilibrium()
    m = polynomial_model([0.0, -1.0], 0.0, 0.0, -1.0)
    assert equilibrium(m) == (0.0, 0.0)


def test_model_registry():
    assert "fhn" in MODEL_REGISTRY
    assert MODEL_REGISTRY["fhn"]().name == "fhn"


def test_model_constant_validation():
    with pytest.raises(ValueError):
        polynomial_model([0.0, 1.0], 0.0, 0.0, 0.0, m=1.0)
    with pytest.raises(ValueError):
        polynomial_model([0.0, 1.0], 0.0, 0.0, 0.0, m=3.5)
    with pytest.raises(ValueError):
        polynomial_model([0.0, 1.0], 0.0, 0.0, 0.0, gamma=-1.0)


# ---------------------------------------------------------------------------
# assumption spot checks
# ---------------------------------------------------------------------------

def test_fhn_passes_all_margins():
    report = check_assumptions(fhn_model(), CheckSpec(samples=100_000, seed=0))
    assert report.passed, report.margins
    for key in ("A1", "A2", "A3", "A4", "A5", "A6", "A8"):
        assert report.margins[key] >= 0.0


def test_wrong_sign_cubic_fails_dissipativity():
    bad = polynomial_model([0.0, 0.0, 0.0, 1.0], 0.0, 0.08, -0.064, name="anti-fhn")
    report = check_assumptions(bad, CheckSpec(samples=20_000, seed=1))
    assert report.margins["A2"] < 0.0
    assert "A2" in report.failed_items()


def test_overloud_intensity_fails_bound():
    loud = polynomial_model([0.0, -1.0], 0.0, 0.0, -1.0, b_const=2.0)
    report = check_assumptions(loud, CheckSpec(samples=1_000, seed=2))
    assert report.margins["A8"] < 0.0


def test_fhn_growth_bound_sampled():
    # |phi1| <= M (1 + |v|^3 + |w|) about the rest state
    m = fhn_model()
    rng = np.random.default_rng(5)
    v = rng.uniform(-5, 5, 50_000)
    w = rng.uniform(-5, 5, 50_000)
    vr, wr = m.rest_state
    lhs = np.abs(m.phi1(0.0, vr + v, wr + w))
    rhs = m.M_growth * (1.0 + np.abs(v) ** 3 + np.abs(w))
    assert np.all(lhs <= rhs)


def test_fhn_one_sided_lipschitz_sampled():
    m = fhn_model()
    rng = np.random.default_rng(6)
    v1, w1, v2, w2 = rng.uniform(-5, 5, (4, 50_000))
    lhs = (m.phi1(0.0, v1, w1) - m.phi1(0.0, v2, w2)) * (v1 - v2) + (
        m.phi2(0.0, v1, w1) - m.phi2(0.0, v2, w2)
    ) * (w1 - w2)
    rhs = m.L_lip * ((v1 - v2) ** 2 + (w1 - w2) ** 2)
    assert np.all(lhs <= rhs)


def test_check_reports_worst_points():
    report = check_assumptions(fhn_model(), CheckSpec(samples=1_000, seed=3))
    assert set(report.margins) == {"A1", "A2", "A3", "A4", "A5", "A6", "A8"}
    assert all(len(pt) >= 2 for pt in report.worst_points.values())
    assert report.samples == 1_000


def test_check_spec_validation():
    with pytest.raises(ValueError):
        CheckSpec(samples=0)
    with pytest.raises(ValueError):
        CheckSpec(box_v=-1.0)


def test_check_is_deterministic():
    a = check_assumptions(fhn_model(), CheckSpec(samples=5_000, seed=9))
    b = check_assumptions(fhn_model(), CheckSpec(samples=5_000, seed=9))
    assert a.margins == b.margins


def test_custom_model_invariant_b_bound():
    # a state-dependent intensity staying within [-1, 1] passes A8
    def soft_b(xi, v):
        return np.tanh(np.asarray(v))

    m = ReactionModel(
        phi1=lambda xi, v, w: -v,
        phi2=lambda xi, v, w: -w,
        b=soft_b,
        L_lip=1.0,
        beta=0.0,
        gamma=1.0,
        m=2.0,
        M_growth=2.0,
    )
    report = check_assumptions(m, CheckSpec(samples=20_000, seed=4))
    assert report.margins["A8"] >= 0.0
