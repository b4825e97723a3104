import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from fraclab.estimators import DecayFitter, MonotoneIterationSolver
from fraclab.kernels import KernelSpec
from fraclab.problem import GSpec, HSpec, ProblemSpec
from fraclab.solver import ExteriorData


def linear_problem():
    return ProblemSpec(KernelSpec(1, 0.5, normalization="fractional"), HSpec(), GSpec(()), 0.0)


def test_solver_params_roundtrip_through_clone():
    est = MonotoneIterationSolver(problem=linear_problem(), R=6.0, M=32, omega=0.5)
    params = clone(est).get_params()
    assert params["R"] == 6.0 and params["M"] == 32 and params["omega"] == 0.5
    assert params["problem"] == linear_problem()


def test_solver_fit_predict_on_linear_problem():
    est = MonotoneIterationSolver(problem=linear_problem(), R=6.0, M=32, tol=1.0).fit(ExteriorData(c=1.0, beta=0.5))
    assert est.status_ == "Converged" and est.n_iter_ == 1
    r = np.array([[0.0, 3.0], [6.0, 12.0]])
    out = est.predict(r)
    assert out.shape == (2, 2)
    assert out[1, 1] == pytest.approx(ExteriorData(c=1.0, beta=0.5)(12.0))
    assert 0.0 < out[0, 0] <= 1.0


def test_solver_constant_data_gives_constant_prediction():
    est = MonotoneIterationSolver(problem=linear_problem(), R=4.0, M=32, tol=1.0).fit(ExteriorData(c=2.0, beta=0.0))
    assert np.allclose(est.predict(np.linspace(0, 4, 9)), 2.0, atol=1e-8)


def test_solver_predict_before_fit_raises():
    with pytest.raises(NotFittedError):
        MonotoneIterationSolver().predict([0.0])


def test_solver_set_params_changes_run():
    est = MonotoneIterationSolver(problem=linear_problem(), R=4.0, M=32, tol=0.0, max_iter=3)
    est.set_params(max_iter=2).fit(ExteriorData(c=1.0))
    assert est.n_iter_ == 2 and est.status_ == "NonConverged"


def test_decay_fitter_recovers_exponent_and_scores_one():
    r = np.linspace(0.0, 20.0, 81)
    u = 4.0 * (1 + r * r) ** -0.7
    est = DecayFitter(window=(2.0, 10.0)).fit(r, u)
    assert est.slope_ == pytest.approx(-0.7, abs=1e-12)
    assert np.exp(est.intercept_) == pytest.approx(4.0, rel=1e-10)
    assert est.score(r, u) == pytest.approx(1.0, abs=1e-12)


def test_decay_fitter_validation():
    with pytest.raises(ValueError):
        DecayFitter().fit([1.0, 2.0], [1.0, -1.0])
    with pytest.raises(ValueError):
        DecayFitter(window=(5.0, 6.0)).fit([1.0, 2.0], [1.0, 0.5])
    with pytest.raises(ValueError):
        DecayFitter().fit([1.0, 2.0, 3.0], [1.0, 0.5])
    with pytest.raises(NotFittedError):
        DecayFitter().predict([1.0])


def test_decay_fitter_clone_keeps_window():
    assert clone(DecayFitter(window=(1.0, 2.0))).window == (1.0, 2.0)
