"""Closed-form reference regressors: OLS, cross-validated ridge, and
CART-style trees/forests obtained by restricting the model-tree builder to
constant node models with the complexity penalty switched off."""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .forest import ForestParams, RaffleForestModel, fit_forest
from .node_models import ModelKind
from .tree import PilotTreeModel, TreeParams, build_tree
from .utils import kfold_indices, r2_score

CART_KINDS = frozenset({ModelKind.CON, ModelKind.PCON})

# effectively disables prediction truncation for plain CART behavior
_NO_TRUNCATION = math.inf

DEFAULT_RIDGE_GRID = np.logspace(-4, 4, 100)


@dataclass(frozen=True)
class LinearModel:
    """A fitted linear predictor y ~ intercept + X @ coef."""

    coef: np.ndarray
    intercept: float
    lam: float = 0.0

    def predict(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        return X @ self.coef + self.intercept


def fit_ols(X, y) -> LinearModel:
    """Least squares via a rank-revealing decomposition; minimum-norm
    solution when the design is rank deficient."""
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64).ravel()
    x_mean = X.mean(axis=0)
    y_mean = y.mean()
    coef, *_ = np.linalg.lstsq(X - x_mean, y - y_mean, rcond=None)
    return LinearModel(coef=coef, intercept=float(y_mean - x_mean @ coef), lam=0.0)


def _ridge_solve(X, y, lam: float) -> LinearModel:
    """Ridge on standardized predictors with an unpenalized intercept."""
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64).ravel()
    x_mean = X.mean(axis=0)
    x_scale = X.std(axis=0)
    x_scale[x_scale == 0.0] = 1.0
    y_mean = y.mean()
    Xs = (X - x_mean) / x_scale
    if lam == 0.0:
        beta, *_ = np.linalg.lstsq(Xs, y - y_mean, rcond=None)
    else:
        p = Xs.shape[1]
        beta = np.linalg.solve(Xs.T @ Xs + lam * np.eye(p), Xs.T @ (y - y_mean))
    coef = beta / x_scale
    return LinearModel(coef=coef, intercept=float(y_mean - x_mean @ coef), lam=lam)


def fit_ridge(X, y, lambdas=None, n_folds: int = 5, seed: int = 0) -> LinearModel:
    """Ridge with the penalty chosen by k-fold CV mean R^2 over a grid.

    Predictors are standardized with training-fold statistics; the grid
    defaults to 100 log-spaced values in [1e-4, 1e4].  Ties go to the
    smaller penalty.
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64).ravel()
    lambdas = DEFAULT_RIDGE_GRID if lambdas is None else np.asarray(lambdas, dtype=np.float64)
    if lambdas.size == 0:
        raise ValueError("lambda grid must be non-empty")
    if lambdas.size == 1 or X.shape[0] < 2 * n_folds:
        return _ridge_solve(X, y, float(lambdas[0]))

    folds = kfold_indices(X.shape[0], n_folds, seed)
    mean_scores = np.empty(lambdas.size)
    for i, lam in enumerate(lambdas):
        scores = []
        for fold in folds:
            mask = np.ones(X.shape[0], dtype=bool)
            mask[fold] = False
            fit = _ridge_solve(X[mask], y[mask], float(lam))
            score = r2_score(y[fold], fit.predict(X[fold]))
            if not math.isnan(score):
                scores.append(score)
        mean_scores[i] = np.mean(scores) if scores else -math.inf
    order = np.argsort(lambdas)
    best = order[int(np.argmax(mean_scores[order]))]
    return _ridge_solve(X, y, float(lambdas[best]))


def cart_tree_params(**overrides) -> TreeParams:
    base = dict(alpha=0.0, allowed_kinds=CART_KINDS)
    base.update(overrides)
    return TreeParams(**base)


def fit_cart_tree(X, y, col_kinds=None, params: TreeParams | None = None) -> PilotTreeModel:
    """Single CART regression tree (constant-leaf splits, min-RSS selection,
    no prediction truncation)."""
    params = params or cart_tree_params()
    return build_tree(X, y, col_kinds, params, truncation_factor=_NO_TRUNCATION)


def cart_forest_params(**overrides) -> ForestParams:
    tree = overrides.pop("tree", cart_tree_params())
    return ForestParams(tree=tree, truncation_factor=_NO_TRUNCATION, **overrides)


def fit_cart_forest(X, y, col_kinds=None, params: ForestParams | None = None, n_jobs: int = 1) -> RaffleForestModel:
    """Classical random forest of CART trees via the restricted builder."""
    params = params or cart_forest_params()
    if not params.tree.allowed_kinds <= CART_KINDS:
        params = replace(params, tree=replace(params.tree, allowed_kinds=CART_KINDS, alpha=0.0))
    return fit_forest(X, y, col_kinds, params, n_jobs=n_jobs)
