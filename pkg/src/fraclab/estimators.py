"""scikit-learn style wrappers: the monotone solver and the decay-exponent fit.

Both follow the ``fit``/``predict`` contract so they can sit in parameter
sweeps (``get_params``/``set_params`` come from ``BaseEstimator``).
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.utils.validation import check_array, check_is_fitted

from .problem import ProblemSpec
from .solver import ExteriorData, GridSpec, IterationOptions, monotone_iterate


class MonotoneIterationSolver(BaseEstimator):
    """Solve the Dirichlet problem on a ball for given exterior data.

    ``fit(exterior)`` runs the iteration; ``predict(r)`` evaluates the
    solution (inside the ball and, through the exterior data, outside it).
    """

    def __init__(
        self,
        problem=None,
        mode="radial",
        R=8.0,
        M=128,
        grade_center=1.0,
        grade_boundary=1.0,
        max_iter=500,
        tol=None,
        omega=1.0,
        start="lower",
        convention=None,
    ):
        self.problem = problem
        self.mode = mode
        self.R = R
        self.M = M
        self.grade_center = grade_center
        self.grade_boundary = grade_boundary
        self.max_iter = max_iter
        self.tol = tol
        self.omega = omega
        self.start = start
        self.convention = convention

    def fit(self, exterior: ExteriorData, y=None):
        problem = self.problem if self.problem is not None else ProblemSpec()
        grid = GridSpec(self.mode, self.R, self.M, self.grade_center, self.grade_boundary)
        it = IterationOptions(
            max_iter=self.max_iter, tol=self.tol, omega=self.omega, start=self.start, convention=self.convention
        )
        self.report_ = monotone_iterate(problem, grid, exterior, it)
        self.function_ = self.report_.function
        self.status_ = self.report_.status
        self.n_iter_ = self.report_.iterations
        return self

    def predict(self, X):
        check_is_fitted(self, "function_")
        X = np.asarray(X, dtype=float)
        return self.function_(X.ravel()).reshape(X.shape)


class DecayFitter(RegressorMixin, BaseEstimator):
    """Fit ``u ~ C (1+r^2)^{slope}`` by least squares on logarithms.

    ``window`` restricts the fit to ``r_lo <= r <= r_hi`` (``None`` keeps all).
    """

    def __init__(self, window=None):
        self.window = window

    def fit(self, X, y):
        r = check_array(np.asarray(X, dtype=float).reshape(-1, 1)).ravel()
        u = np.asarray(y, dtype=float).ravel()
        if r.shape != u.shape:
            raise ValueError("X and y must have the same number of samples")
        if self.window is not None:
            sel = (r >= self.window[0]) & (r <= self.window[1])
            r, u = r[sel], u[sel]
        if r.size < 2:
            raise ValueError("need at least two samples in the window")
        if np.any(u <= 0):
            raise ValueError("decay fits need positive samples")
        self.slope_, self.intercept_ = (float(v) for v in np.polyfit(np.log1p(r * r), np.log(u), 1))
        return self

    def predict(self, X):
        check_is_fitted(self, "slope_")
        r = np.asarray(X, dtype=float)
        return np.exp(self.intercept_) * (1.0 + r * r) ** self.slope_
