"""Estimator front-ends with the usual fit/predict surface.

These wrap the functional core (``build_tree``, ``fit_forest``, the linear
baselines) behind ``BaseEstimator``/``RegressorMixin`` so they compose with
pipelines, ``get_params``/``set_params``, and the evaluation harness's
method registry.  Categorical columns are declared up front through the
``categorical_features`` constructor argument (column indices); values in
those columns are treated as unordered codes.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin

from .baselines import (
    cart_forest_params,
    cart_tree_params,
    fit_cart_forest,
    fit_cart_tree,
    fit_ols,
    fit_ridge,
)
from .forest import ForestParams, fit_forest, predict_forest
from .node_models import ALL_KINDS, ModelKind
from .tree import CATEGORICAL, NUMERIC, TreeParams, build_tree, predict_tree


def _col_kinds(n_features: int, categorical_features) -> tuple[str, ...]:
    kinds = [NUMERIC] * n_features
    for j in categorical_features or ():
        kinds[int(j)] = CATEGORICAL
    return tuple(kinds)


def _as_xy(X, y):
    X = np.ascontiguousarray(X, dtype=np.float64)
    if X.ndim != 2:
        raise ValueError("X must be 2-dimensional")
    y = np.asarray(y, dtype=np.float64).ravel()
    return X, y


class PilotRegressor(RegressorMixin, BaseEstimator):
    """Single piecewise-linear model tree."""

    def __init__(
        self,
        alpha=1.0,
        max_depth=20,
        max_model_depth=100,
        min_sample_fit=10,
        min_sample_alpha=5,
        min_sample_leaf=5,
        truncation_factor=1.5,
        categorical_features=None,
    ):
        self.alpha = alpha
        self.max_depth = max_depth
        self.max_model_depth = max_model_depth
        self.min_sample_fit = min_sample_fit
        self.min_sample_alpha = min_sample_alpha
        self.min_sample_leaf = min_sample_leaf
        self.truncation_factor = truncation_factor
        self.categorical_features = categorical_features

    def fit(self, X, y):
        X, y = _as_xy(X, y)
        params = TreeParams(
            alpha=self.alpha,
            max_depth=self.max_depth,
            max_model_depth=self.max_model_depth,
            min_sample_fit=self.min_sample_fit,
            min_sample_alpha=self.min_sample_alpha,
            min_sample_leaf=self.min_sample_leaf,
        )
        kinds = _col_kinds(X.shape[1], self.categorical_features)
        self.model_ = build_tree(X, y, kinds, params, truncation_factor=self.truncation_factor)
        self.n_features_in_ = X.shape[1]
        return self

    def predict(self, X):
        return predict_tree(self.model_, np.ascontiguousarray(X, dtype=np.float64))


class RaffleRegressor(RegressorMixin, BaseEstimator):
    """Random forest of randomized piecewise-linear model trees.

    The defaults reproduce the fixed dRaFFLE configuration."""

    def __init__(
        self,
        n_estimators=100,
        alpha=0.5,
        n_features_tree=1.0,
        n_features_node=1.0,
        max_depth=20,
        max_model_depth=100,
        min_sample_fit=10,
        min_sample_alpha=5,
        min_sample_leaf=5,
        random_state=0,
        n_jobs=1,
        categorical_features=None,
    ):
        self.n_estimators = n_estimators
        self.alpha = alpha
        self.n_features_tree = n_features_tree
        self.n_features_node = n_features_node
        self.max_depth = max_depth
        self.max_model_depth = max_model_depth
        self.min_sample_fit = min_sample_fit
        self.min_sample_alpha = min_sample_alpha
        self.min_sample_leaf = min_sample_leaf
        self.random_state = random_state
        self.n_jobs = n_jobs
        self.categorical_features = categorical_features

    def _params(self) -> ForestParams:
        tree = TreeParams(
            alpha=self.alpha,
            max_depth=self.max_depth,
            max_model_depth=self.max_model_depth,
            min_sample_fit=self.min_sample_fit,
            min_sample_alpha=self.min_sample_alpha,
            min_sample_leaf=self.min_sample_leaf,
            allowed_kinds=ALL_KINDS - {ModelKind.BLIN},
            n_features_node=self.n_features_node,
        )
        return ForestParams(
            n_estimators=self.n_estimators,
            n_features_tree=self.n_features_tree,
            tree=tree,
            seed=self.random_state,
        )

    def fit(self, X, y):
        X, y = _as_xy(X, y)
        kinds = _col_kinds(X.shape[1], self.categorical_features)
        self.model_ = fit_forest(X, y, kinds, self._params(), n_jobs=self.n_jobs)
        self.n_features_in_ = X.shape[1]
        return self

    def predict(self, X):
        return predict_forest(self.model_, np.ascontiguousarray(X, dtype=np.float64))


class CartTreeRegressor(RegressorMixin, BaseEstimator):
    """Greedy constant-leaf regression tree (classic CART behavior)."""

    def __init__(self, max_depth=20, min_sample_fit=10, min_sample_leaf=5, categorical_features=None):
        self.max_depth = max_depth
        self.min_sample_fit = min_sample_fit
        self.min_sample_leaf = min_sample_leaf
        self.categorical_features = categorical_features

    def fit(self, X, y):
        X, y = _as_xy(X, y)
        params = cart_tree_params(
            max_depth=self.max_depth,
            min_sample_fit=self.min_sample_fit,
            min_sample_leaf=self.min_sample_leaf,
        )
        kinds = _col_kinds(X.shape[1], self.categorical_features)
        self.model_ = fit_cart_tree(X, y, kinds, params)
        self.n_features_in_ = X.shape[1]
        return self

    def predict(self, X):
        return predict_tree(self.model_, np.ascontiguousarray(X, dtype=np.float64))


class CartForestRegressor(RegressorMixin, BaseEstimator):
    """Random forest of constant-leaf CART trees."""

    def __init__(
        self,
        n_estimators=100,
        n_features_tree=1.0,
        n_features_node=1.0,
        max_depth=20,
        min_sample_fit=10,
        min_sample_leaf=5,
        random_state=0,
        n_jobs=1,
        categorical_features=None,
    ):
        self.n_estimators = n_estimators
        self.n_features_tree = n_features_tree
        self.n_features_node = n_features_node
        self.max_depth = max_depth
        self.min_sample_fit = min_sample_fit
        self.min_sample_leaf = min_sample_leaf
        self.random_state = random_state
        self.n_jobs = n_jobs
        self.categorical_features = categorical_features

    def fit(self, X, y):
        X, y = _as_xy(X, y)
        params = cart_forest_params(
            n_estimators=self.n_estimators,
            n_features_tree=self.n_features_tree,
            seed=self.random_state,
            tree=cart_tree_params(
                max_depth=self.max_depth,
                min_sample_fit=self.min_sample_fit,
                min_sample_leaf=self.min_sample_leaf,
                n_features_node=self.n_features_node,
            ),
        )
        kinds = _col_kinds(X.shape[1], self.categorical_features)
        self.model_ = fit_cart_forest(X, y, kinds, params, n_jobs=self.n_jobs)
        self.n_features_in_ = X.shape[1]
        return self

    def predict(self, X):
        return predict_forest(self.model_, np.ascontiguousarray(X, dtype=np.float64))


class OlsRegressor(RegressorMixin, BaseEstimator):
    """Plain least squares (minimum-norm on rank-deficient designs)."""

    def fit(self, X, y):
        X, y = _as_xy(X, y)
        self.model_ = fit_ols(X, y)
        self.n_features_in_ = X.shape[1]
        return self

    def predict(self, X):
        return self.model_.predict(X)


class RidgeCvRegressor(RegressorMixin, BaseEstimator):
    """Ridge regression with the penalty picked by internal k-fold CV."""

    def __init__(self, lambdas=None, n_folds=5, random_state=0):
        self.lambdas = lambdas
        self.n_folds = n_folds
        self.random_state = random_state

    def fit(self, X, y):
        X, y = _as_xy(X, y)
        self.model_ = fit_ridge(
            X, y, lambdas=self.lambdas, n_folds=self.n_folds, seed=self.random_state
        )
        self.lambda_ = self.model_.lam
        self.n_features_in_ = X.shape[1]
        return self

    def predict(self, X):
        return self.model_.predict(X)
