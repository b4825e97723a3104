import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fraclab.kernels import KernelSpec
from fraclab.problem import GSpec, HSpec, ProblemSpec
from fraclab.solver import (
    ExteriorData,
    GridSpec,
    IterationOptions,
    assemble_operator,
    build_grid,
    comparison_suite,
    core_asymmetry,
    exhaust,
    gradient_on_grid,
    linear_solve,
    monotone_iterate,
    random_ordered_pair,
)
from oracles import generator_of_bracket

FRAC = dict(normalization="fractional")


def manufactured_error(n, s, M, R=8.0):
    k = KernelSpec(n, s, **FRAC)
    nodes = build_grid(GridSpec("radial", R, M))
    op = assemble_operator(k, nodes, "radial")
    x = nodes[op.unknown]
    f = np.array([generator_of_bracket(n, s, 1.0, r) for r in x])
    u = linear_solve(op, f, ExteriorData(c=1.0, beta=1.0))
    exact = 1.0 / (1.0 + x * x)
    return float(np.max(np.abs(u - exact)) / np.max(exact))


def linear_problem(s=0.5):
    return ProblemSpec(KernelSpec(1, s, **FRAC), HSpec(), GSpec(()), 0.0)


def quadratic_problem(s=0.5):
    return ProblemSpec(KernelSpec(1, s, **FRAC), HSpec(), GSpec.single(2.0), 0.0)


# grids


def test_radial_grid_example():
    nodes = build_grid(GridSpec("radial", 8.0, 64))
    assert nodes.size == 64 and nodes[0] == 0.0 and nodes[-1] == 8.0


def test_grading_toward_origin_shrinks_inner_spacing():
    d = np.diff(build_grid(GridSpec("radial", 8.0, 64, grade_center=0.8)))
    assert d[:2].mean() / d[-2:].mean() < 1


def test_line_grid_is_mirror_symmetric():
    nodes = build_grid(GridSpec("line", 8.0, 65, grade_boundary=0.7))
    assert np.max(np.abs(nodes + nodes[::-1])) <= 1e-12


def test_origin_offset_grid_avoids_zero():
    nodes = build_grid(GridSpec("radial", 4.0, 32, origin_offset=True))
    assert nodes[0] > 0 and nodes[-1] == 4.0


@pytest.mark.parametrize("bad", [dict(M=8), dict(R=0.0), dict(mode="box"), dict(grade_center=0.0)])
def test_grid_spec_validation(bad):
    with pytest.raises(ValueError):
        GridSpec(**bad)


# discrete operator


@pytest.mark.parametrize("n,s", [(1, 0.3), (1, 0.75), (2, 0.5), (3, 0.6)])
def test_operator_invariants_radial(n, s):
    op = assemble_operator(KernelSpec(n, s), build_grid(GridSpec("radial", 4.0, 32)), "radial")
    assert op.constant_residual() <= 1e-8
    sig = op.sign_structure()
    assert sig["min_offdiag"] >= -1e-10 and sig["max_diag"] <= 1e-10


def test_operator_invariants_line():
    op = assemble_operator(KernelSpec(1, 0.4), build_grid(GridSpec("line", 4.0, 33)), "line")
    assert op.constant_residual() <= 1e-8
    assert op.sign_structure()["min_offdiag"] >= -1e-10


def test_operator_is_deterministic():
    nodes = build_grid(GridSpec("radial", 4.0, 32))
    a = assemble_operator(KernelSpec(1, 0.6), nodes, "radial")
    b = assemble_operator(KernelSpec(1, 0.6), nodes, "radial")
    assert np.array_equal(a.matrix, b.matrix)


# linear solve


def test_constant_exterior_gives_constant_solution():
    op = assemble_operator(KernelSpec(1, 0.5), build_grid(GridSpec("radial", 6.0, 48)), "radial")
    u = linear_solve(op, np.zeros(op.unknown.size), ExteriorData(c=2.5, beta=0.0))
    assert np.max(np.abs(u - 2.5)) <= 1e-8


def test_linear_solve_rejects_wrong_length():
    op = assemble_operator(KernelSpec(1, 0.5), build_grid(GridSpec("radial", 6.0, 32)), "radial")
    with pytest.raises(ValueError):
        linear_solve(op, np.zeros(3), ExteriorData())


@pytest.mark.parametrize("s", [0.3, 0.5, 0.75])
def test_manufactured_solution_recovery(s):
    coarse, fine = manufactured_error(1, s, 64), manufactured_error(1, s, 128)
    assert fine <= 5e-3
    assert coarse / fine >= 1.5


def test_manufactured_solution_in_two_dimensions():
    assert manufactured_error(2, 0.5, 128) <= 5e-3


def test_fractional_convention_flips_the_source_sign():
    op = assemble_operator(KernelSpec(1, 0.5), build_grid(GridSpec("radial", 6.0, 32)), "radial")
    f = np.full(op.unknown.size, 0.1)
    ext = ExteriorData(c=1.0, beta=1.0)
    u_gen = linear_solve(op, f, ext)
    u_frac = linear_solve(op, -f, ext, convention="fractional")
    assert np.allclose(u_gen, u_frac, rtol=1e-12, atol=1e-14)


# comparison


@given(seed=st.integers(0, 2**31 - 1))
@settings(max_examples=20, deadline=None)
def test_random_pairs_are_ordered(seed):
    e1, e2 = random_ordered_pair(np.random.default_rng(seed), "line")
    x = np.linspace(-50.0, 50.0, 401)
    assert np.all(e1(x) <= e2(x))


def test_discrete_comparison_suite():
    op = assemble_operator(KernelSpec(1, 0.5), build_grid(GridSpec("radial", 8.0, 64)), "radial")
    rng = np.random.default_rng(7)
    f = 1e-3 * rng.uniform(0.0, 1.0, op.unknown.size)
    out = comparison_suite(op, f, rng, pairs=20)
    assert out["pairs"] == 20 and len(out["violations"]) == 20
    assert out["max_violation"] <= 1e-8


# gradients


def test_gradient_of_linear_ramp_is_exact():
    x = np.linspace(-3.0, 5.0, 41)
    assert np.max(np.abs(gradient_on_grid(nodes=x, values=2.0 * x - 1.0) - 2.0)) <= 1e-12


def test_gradient_of_constant_is_zero():
    x = np.linspace(0.0, 1.0, 11)
    assert np.max(np.abs(gradient_on_grid(nodes=x, values=np.full(11, 3.0)))) <= 1e-12


def test_gradient_against_closed_form_derivative():
    # the error is about h^2 max|u'''| / 6, so 128 nodes on [0, 4] keep it under 1e-3
    x = build_grid(GridSpec("radial", 4.0, 128))
    g = gradient_on_grid(nodes=x, values=1.0 / (1.0 + x * x), radial=True)
    assert np.max(np.abs(g + 2.0 * x / (1.0 + x * x) ** 2)) <= 1e-3


def test_gradient_needs_three_nodes():
    with pytest.raises(ValueError):
        gradient_on_grid(nodes=[0.0, 1.0], values=[0.0, 1.0])


# exterior data


def test_exterior_sandwich_and_tails():
    e = ExteriorData(c=2.0, beta=0.75, delta=0.4, bump=0.5)
    assert e.sandwich_check(4.0)["holds"]
    left, right = e.tails("line")
    assert left.coeff == pytest.approx(2.0 * 0.6) and right.coeff == pytest.approx(2.0 * 1.4)
    with pytest.raises(ValueError):
        e.tails("radial")


def test_exterior_validation():
    with pytest.raises(ValueError):
        ExteriorData(delta=1.0)
    with pytest.raises(ValueError):
        ExteriorData(length=0.0)


# monotone iteration


def test_empty_G_converges_in_one_step_to_linear_solution():
    prob = linear_problem()
    grid = GridSpec("radial", 6.0, 48)
    ext = ExteriorData(c=1.0, beta=0.5)
    rep = monotone_iterate(prob, grid, ext, IterationOptions(tol=1e300))
    assert rep.status == "Converged" and rep.iterations == 1
    op = assemble_operator(prob.kernel, build_grid(grid), "radial")
    u = linear_solve(op, np.zeros(op.unknown.size), ext)
    assert np.allclose(rep.values[op.unknown], u, rtol=1e-12)


def test_zero_tolerance_runs_to_max_iter():
    rep = monotone_iterate(linear_problem(), GridSpec("radial", 6.0, 32), ExteriorData(c=1.0), IterationOptions(max_iter=5, tol=0.0))
    assert rep.status == "NonConverged" and rep.iterations == 5
    assert len(rep.residual_history) == len(rep.monotonicity_violation) == len(rep.sandwich_lower) == 5


def test_quadratic_gradient_problem_converges_from_below():
    # p = 2 is superlinear, so small exterior data gives a contraction
    rep = monotone_iterate(
        quadratic_problem(),
        GridSpec("radial", 8.0, 64),
        ExteriorData(c=0.1, beta=0.5, a=1e-3),
        IterationOptions(convention="generator"),
    )
    assert rep.status == "Converged" and rep.iterations <= 10
    assert rep.residual_history[-1] < 1e-8 * (1 + np.max(np.abs(rep.values)))
    assert max(rep.monotonicity_violation) <= 1e-6
    assert min(rep.sandwich_lower) >= 0


def test_iteration_convention_override():
    prob = ProblemSpec(KernelSpec(1, 0.5, **FRAC), HSpec(), GSpec.single(2.0), 0.0, convention="fractional")
    grid, ext = GridSpec("radial", 8.0, 32), ExteriorData(c=0.1, beta=0.5)
    gen = monotone_iterate(prob, grid, ext, IterationOptions(convention="generator"))
    frac = monotone_iterate(prob, grid, ext)
    assert gen.convention == "generator" and frac.convention == prob.convention
    assert not np.array_equal(gen.values, frac.values)


def test_sublinear_gradient_term_from_small_data_is_flagged():
    # with p < 1 the forcing dominates small data, so the first step jumps and the run stops
    prob = ProblemSpec(KernelSpec(1, 0.9, **FRAC), HSpec(), GSpec.single(0.5), 0.0)
    rep = monotone_iterate(prob, GridSpec("radial", 8.0, 64), ExteriorData(c=1e-3, beta=2.6))
    assert rep.status == "Diverged"
    assert rep.residual_history[-1] > 10 * min(rep.residual_history)


def test_iteration_preconditions():
    with pytest.raises(ValueError, match="singular"):
        monotone_iterate(ProblemSpec(H=HSpec("singular", 1.0)), GridSpec(M=16), ExteriorData())
    with pytest.raises(ValueError, match="gamma < 0"):
        monotone_iterate(ProblemSpec(gamma=-0.5), GridSpec(M=16), ExteriorData())
    with pytest.raises(ValueError):
        IterationOptions(omega=0.0)


def test_monotone_iterate_is_deterministic():
    args = (quadratic_problem(), GridSpec("radial", 8.0, 32), ExteriorData(c=0.1, beta=0.5))
    a, b = monotone_iterate(*args), monotone_iterate(*args)
    assert a.to_dict() == b.to_dict()


def test_solve_report_function_uses_exterior_tails():
    rep = monotone_iterate(linear_problem(), GridSpec("radial", 6.0, 32), ExteriorData(c=1.0, beta=0.5), IterationOptions(tol=1.0))
    f = rep.function
    assert f(np.array([20.0]))[0] == pytest.approx(ExteriorData(c=1.0, beta=0.5)(20.0))


# exhaustion


def test_exhaust_on_linear_problem_is_deterministic_and_shrinks():
    prob = linear_problem()
    run = exhaust(prob, [4, 8, 16], lambda R: ExteriorData(c=1.0, beta=0.5), GridSpec("radial", 4.0, 48), IterationOptions(tol=1.0))
    again = exhaust(prob, [4, 8, 16], lambda R: ExteriorData(c=1.0, beta=0.5), GridSpec("radial", 4.0, 48), IterationOptions(tol=1.0))
    assert run["core_differences"] == again["core_differences"]
    assert len(run["reports"]) == 3


def test_exhaust_validates_radii():
    with pytest.raises(ValueError):
        exhaust(linear_problem(), [8, 4], lambda R: ExteriorData(), GridSpec())
    with pytest.raises(ValueError):
        exhaust(linear_problem(), [2, 4], lambda R: ExteriorData(), GridSpec())


def test_core_asymmetry_of_even_function_vanishes():
    assert core_asymmetry(lambda x: 1.0 / (1.0 + np.asarray(x) ** 2)) == 0.0
