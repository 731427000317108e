"""Scikit-learn style estimator wrappers around the recovery algorithms.

Each regressor fits a sparse coefficient vector to (X, y) with one of the
greedy pursuits and predicts with X @ coef_. No intercept is fit; center y
beforehand if needed.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.utils.validation import check_array, check_is_fitted, check_X_y

from .pursuit import StoppingRule, gomp, omp, qomp, refine_support


class _PursuitRegressor(RegressorMixin, BaseEstimator):
    """Shared fit/predict plumbing for the pursuit regressors."""

    def __init__(self, max_iterations=None, tol=None):
        self.max_iterations = max_iterations
        self.tol = tol

    def _default_budget(self, m):
        raise NotImplementedError

    def _run(self, X, y, stop):
        raise NotImplementedError

    def fit(self, X, y):
        """Fit a sparse coefficient vector to (X, y).

        Sets coef_ (dense, in the scale of X's columns), support_ (sorted
        selected indices), n_iter_, and residual_norms_.
        """
        X, y = check_X_y(X, y, y_numeric=True, dtype=np.float64)
        m = X.shape[0]
        budget = self.max_iterations
        if budget is None:
            budget = self._default_budget(m)
        stop = StoppingRule(budget, self.tol)
        result, estimate = self._run(X, y, stop)
        self.coef_ = estimate.to_dense()
        self.support_ = np.sort(np.asarray(result.support, dtype=np.int64))
        self.n_iter_ = result.iterations_run
        self.residual_norms_ = np.asarray(result.residual_history)
        return self

    def predict(self, X):
        check_is_fitted(self, "coef_")
        X = check_array(X, dtype=np.float64)
        if X.shape[1] != self.coef_.size:
            raise ValueError(
                f"X has {X.shape[1]} features, expected {self.coef_.size}"
            )
        return X @ self.coef_


class OMPRegressor(_PursuitRegressor):
    """Orthogonal matching pursuit regressor.

    max_iterations defaults to max(1, min(m - 1, m // 2)) and must stay
    below the number of samples.
    """

    def _default_budget(self, m):
        return max(1, min(m - 1, m // 2))

    def _run(self, X, y, stop):
        result = omp(X, y, stop)
        return result, result.estimate


class GOMPRegressor(_PursuitRegressor):
    """Generalized OMP regressor selecting n_select indices per iteration."""

    def __init__(self, n_select=2, max_iterations=None, tol=None):
        super().__init__(max_iterations=max_iterations, tol=tol)
        self.n_select = n_select

    def _default_budget(self, m):
        return max(1, m // (2 * int(self.n_select)))

    def _run(self, X, y, stop):
        result = gomp(X, y, self.n_select, stop)
        return result, result.estimate


class QOMPRegressor(_PursuitRegressor):
    """Pair-wise pursuit regressor.

    Selects the best residual-reducing column pair per iteration; when
    refine is true (default) the selected support is passed through the
    greedy sparse least-squares refinement before coefficients are
    reported. max_iterations defaults to max(1, m // 4).
    """

    def __init__(self, max_iterations=None, tol=None, refine=True):
        super().__init__(max_iterations=max_iterations, tol=tol)
        self.refine = refine

    def _default_budget(self, m):
        return max(1, m // 4)

    def _run(self, X, y, stop):
        result = qomp(X, y, stop)
        estimate = result.estimate
        if self.refine:
            estimate = refine_support(X, result.support, y)
        return result, estimate
