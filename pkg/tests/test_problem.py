import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fraclab.kernels import KernelSpec
from fraclab.problem import (
    GSpec,
    HSpec,
    ProblemSpec,
    build_power_solution,
    classify_regime,
    eval_dG,
    eval_dH,
    eval_G,
    eval_H,
    eval_rhs,
    eval_rhs_radial,
    residual_scan,
    subcritical_beta,
    weight,
)
from oracles import riesz_constant


def power_problem(s=0.9, p=0.5, gamma=-0.6, n=1):
    return ProblemSpec(KernelSpec(n, s, normalization="fractional"), HSpec("polynomial", 0, 1.0), GSpec.single(p), gamma)


def test_H_examples():
    assert eval_H(HSpec("polynomial", 2, 1.0), 3.0) == 10.0
    assert eval_H(HSpec("exponential"), 0.0) == 1.0
    assert eval_H(HSpec("logarithmic", 0, 2.0), math.e - 1) == pytest.approx(3.0)


def test_H_polynomial_without_power_is_constant():
    assert np.all(eval_H(HSpec("polynomial", 0, 1.0), np.array([0.0, 0.5, 7.0])) == 1.0)
    assert eval_dH(HSpec("polynomial", 0, 1.0), 2.0) == 0.0


def test_H_singular_rejects_zero():
    with pytest.raises(ValueError):
        eval_H(HSpec("singular", 1.0), 0.0)


def test_H_rejects_negative_argument():
    with pytest.raises(ValueError):
        eval_H(HSpec(), -1.0)


def test_H_lower_growth_defaults():
    assert HSpec("singular", 2.0).theta == -2.0
    assert HSpec().theta == 0.0
    assert not HSpec("singular", 2.0).nondecreasing


@given(m=st.floats(0.1, 4.0), u=st.floats(0.01, 10.0))
@settings(max_examples=40, deadline=None)
def test_dH_matches_finite_difference(m, u):
    h = HSpec("polynomial", m, 1.0)
    fd = (eval_H(h, u + 1e-6) - eval_H(h, u - 1e-6)) / 2e-6
    assert eval_dH(h, u) == pytest.approx(fd, rel=1e-5, abs=1e-6)


def test_G_examples():
    assert eval_G(GSpec.single(0.5), np.array([4.0])) == 2.0
    assert eval_G(GSpec.single(0.5), np.zeros(3)) == 0.0
    assert eval_G(GSpec(((1.0, 0.5), (2.0, 2.0))), np.array([0.6, 0.8])) == pytest.approx(3.0)


def test_G_uses_vector_norm():
    assert eval_G(GSpec.single(1.0), np.array([3.0, 4.0])) == pytest.approx(5.0)


def test_G_rejects_nonpositive_terms():
    with pytest.raises(ValueError):
        GSpec(((1.0, 0.0),))
    with pytest.raises(ValueError):
        GSpec(((-1.0, 1.0),))


def test_dG_infinite_at_zero_for_small_exponent():
    assert math.isinf(eval_dG(GSpec.single(0.5), 0.0))
    assert eval_dG(GSpec.single(2.0), 0.0) == 0.0


def test_rhs_examples():
    p = ProblemSpec(G=GSpec.single(1.0), gamma=2.0)
    assert eval_rhs(p, np.array([3.0, 0.0]), 0.7, np.array([2.0, 0.0])) == pytest.approx(18.0)
    p0 = ProblemSpec(H=HSpec("polynomial", 2, 1.0), G=GSpec.single(0.5))
    assert eval_rhs(p0, np.array([5.0]), 2.0, np.array([9.0])) == pytest.approx(5.0 * 3.0)


def test_rhs_singular_weight_at_origin():
    with pytest.raises(ValueError):
        eval_rhs(ProblemSpec(gamma=-1.0), np.array([0.0]), 1.0, np.array([1.0]))


def test_regularized_weight_is_finite():
    p = ProblemSpec(gamma=-1.0, eps=0.5)
    assert weight(p, 0.0) == pytest.approx(2.0)


def test_rhs_radial_matches_vector_form():
    p = ProblemSpec(H=HSpec("logarithmic", 0, 1.0), G=GSpec.single(1.5), gamma=0.4)
    r = np.array([0.5, 2.0])
    v = eval_rhs_radial(p, r, np.array([0.1, 0.3]), np.array([0.2, 0.05]))
    w = [eval_rhs(p, np.array([ri, 0.0]), ui, np.array([0.0, gi])) for ri, ui, gi in zip(r, [0.1, 0.3], [0.2, 0.05])]
    assert np.allclose(v, w, rtol=1e-14)


def test_classify_examples():
    sub = classify_regime(power_problem(0.5, 0.5, 0.2))
    assert sub.regime == "Subcritical" and sub.beta == pytest.approx(1.4, abs=1e-12)
    ref = classify_regime(power_problem())
    assert ref.regime == "Subcritical" and ref.beta == pytest.approx(1.4, abs=1e-12)
    assert classify_regime(power_problem(0.5, 0.5, 0.5)).regime == "Critical"
    assert classify_regime(power_problem(0.25, 0.4, 0.3)).regime == "Supercritical"


def test_classify_ambiguous_for_mixed_terms():
    p = ProblemSpec(KernelSpec(1, 0.5), G=GSpec(((1.0, 0.5), (1.0, 1.5))), gamma=0.0)
    assert classify_regime(p).regime == "Ambiguous"


def test_classify_needs_terms():
    with pytest.raises(ValueError):
        classify_regime(ProblemSpec(G=GSpec(())))


@given(s=st.floats(0.05, 0.95), gamma=st.floats(-1.0, 1.0), p=st.floats(0.05, 2.0))
@settings(max_examples=100, deadline=None)
def test_regime_follows_balance_sign(s, gamma, p):
    rep = classify_regime(ProblemSpec(KernelSpec(1, s), G=GSpec.single(p), gamma=gamma))
    bal = gamma + p - 2 * s
    expected = "Supercritical" if bal > 0 else "Subcritical" if bal < 0 else "Critical"
    assert rep.regime == expected
    if expected == "Subcritical" and p != 1.0:
        # beta solves beta (1 - p) = 2s + gamma - p
        assert rep.beta * (1 - p) == pytest.approx(2 * s + gamma - p, abs=1e-12)


def test_subcritical_beta_p_one():
    with pytest.raises(ZeroDivisionError, match="1-p vanishes"):
        subcritical_beta(0.5, 0.0, 1.0)


def test_power_solution_amplitude_identity():
    sol = build_power_solution(power_problem())
    C = riesz_constant(1, 0.9, 1.4)
    assert sol.beta == pytest.approx(1.4)
    assert sol.C == pytest.approx(C, rel=1e-5)
    assert sol.A == pytest.approx((1.4**0.5 / abs(C)) ** 2, rel=1e-5)
    assert sol.amplitude_identity_residual() <= 1e-12
    # the constant is negative here, so the profile solves the generator form
    assert sol.convention == "generator"


def test_power_solution_residual_in_its_own_convention():
    prob = power_problem()
    sol = build_power_solution(prob)
    assert residual_scan(prob, sol, convention=sol.convention)["residual"] <= 1e-6
    assert residual_scan(prob, sol, convention=sol.convention, amplitude=2 * sol.A)["residual"] >= 0.1


def test_power_solution_positive_constant_case():
    # n + beta < 2s is needed for C > 0; n = 1, s = 0.9, beta = 0.5 gives C > 0
    prob = ProblemSpec(KernelSpec(1, 0.9, normalization="fractional"), HSpec(), GSpec.single(0.5), gamma=-1.05)
    sol = build_power_solution(prob)
    assert sol.beta == pytest.approx(0.5)
    assert sol.C > 0 and sol.convention == "fractional"
    assert residual_scan(prob, sol)["residual"] <= 1e-6


def test_power_solution_preconditions():
    with pytest.raises(ValueError, match="1-p vanishes"):
        build_power_solution(power_problem(p=1.0))
    with pytest.raises(ValueError, match="H must be identically 1"):
        build_power_solution(ProblemSpec(KernelSpec(1, 0.9, normalization="fractional"), HSpec("exponential"), GSpec.single(0.5)))
    with pytest.raises(ValueError, match="fractional Laplacian"):
        build_power_solution(ProblemSpec(KernelSpec(1, 0.9), HSpec(), GSpec.single(0.5)))
    with pytest.raises(ValueError, match="outside"):
        build_power_solution(power_problem(gamma=0.0))


def test_problem_roundtrip_dict():
    p = ProblemSpec(KernelSpec(2, 0.3), HSpec("logarithmic", 0, 2.0), GSpec(((1.0, 0.5), (2.0, 1.5))), 0.3, 0.1)
    assert ProblemSpec.from_dict(p.to_dict()) == p


def test_problem_rejects_bad_convention():
    with pytest.raises(ValueError):
        ProblemSpec(convention="other")
