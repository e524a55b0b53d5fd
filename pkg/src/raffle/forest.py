"""Bagged ensemble of randomized piecewise-linear model trees.

Each tree is trained on a bootstrap sample (seeded by the forest seed and
the tree index, so fits are reproducible and order-independent), optionally
on a per-tree feature subset, and with a fresh random subset of features
drawn at every node.  Predictions are the arithmetic mean of the per-tree
predictions, which are individually truncated to the response range of
their own training sample.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field, replace

import numpy as np
from joblib import Parallel, delayed

from .node_models import ConfigurationError, ModelKind
from .tree import (
    NUMERIC,
    PilotTreeModel,
    TreeParams,
    build_tree,
    presort,
    predict_tree,
    tree_from_dict,
    tree_to_dict,
)

FOREST_FORMAT = "raffle-forest-v1"


@dataclass(frozen=True)
class ForestParams:
    """Ensemble hyperparameters.

    ``n_features_tree`` and ``tree.n_features_node`` are fractions of the
    total feature count; the node-level fraction in effect is the minimum
    of the two.  The defaults are the fixed out-of-the-box configuration
    (alpha 0.5, all features per node, split depth 20, 100 trees).
    """

    n_estimators: int = 100
    n_features_tree: float = 1.0
    tree: TreeParams = field(default_factory=TreeParams.forest_member)
    seed: int = 0
    bootstrap: bool = True
    truncation_factor: float = 1.0

    def __post_init__(self):
        if self.n_estimators < 1:
            raise ConfigurationError("n_estimators must be >= 1")
        if not 0.0 < self.n_features_tree <= 1.0:
            raise ConfigurationError("n_features_tree must be in (0, 1]")

    def effective_tree_params(self) -> TreeParams:
        frac = min(self.n_features_tree, self.tree.n_features_node)
        return replace(self.tree, n_features_node=frac)


def draffle_params(**overrides) -> ForestParams:
    """The default-parameter forest configuration."""
    return ForestParams(**overrides)


@dataclass
class RaffleForestModel:
    trees: list[PilotTreeModel]
    params: ForestParams
    bootstrap_records: list[np.ndarray]
    schema_fingerprint: str
    col_kinds: tuple[str, ...]
    n_features: int

    def predict(self, X) -> np.ndarray:
        return predict_forest(self, X)


def schema_fingerprint(col_kinds, n_features: int) -> str:
    doc = json.dumps({"col_kinds": list(col_kinds), "n_features": n_features}, sort_keys=True)
    return hashlib.sha256(doc.encode()).hexdigest()[:16]


def _tree_rng(seed: int, tree_index: int):
    return np.random.Generator(np.random.Philox(np.random.SeedSequence((seed, tree_index))))


def _sample_sorted_index(rows, global_sorted, col_kinds):
    """Sort permutations of the bootstrap sample, derived from global ranks."""
    out = {}
    for j, order in global_sorted.items():
        rank = np.empty(order.shape[0], dtype=np.int64)
        rank[order] = np.arange(order.shape[0])
        out[j] = np.argsort(rank[rows], kind="stable")
    return out


def _fit_one_tree(X, y, col_kinds, params: ForestParams, tree_index: int, global_sorted):
    n, p = X.shape
    rng = _tree_rng(params.seed, tree_index)
    if params.bootstrap:
        rows = rng.integers(0, n, size=n)
    else:
        rows = np.arange(n)
    if params.n_features_tree < 1.0:
        size = int(np.ceil(params.n_features_tree * p))
        feats = np.sort(rng.choice(p, size=size, replace=False)).tolist()
    else:
        feats = None
    sorted_index = _sample_sorted_index(rows, global_sorted, col_kinds)
    model = build_tree(
        X[rows],
        y[rows],
        col_kinds,
        params.effective_tree_params(),
        truncation_factor=params.truncation_factor,
        rng=rng,
        sorted_index=sorted_index,
        feature_subset=feats,
        from_bootstrap=params.bootstrap,
    )
    return model, rows


def fit_forest(X, y, col_kinds=None, params: ForestParams | None = None, n_jobs: int = 1) -> RaffleForestModel:
    """Fit the ensemble.  Trees are independent work units; results are
    joined in tree-index order, so parallel and serial runs agree."""
    X = np.ascontiguousarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64).ravel()
    if X.ndim != 2 or X.shape[1] == 0:
        raise ConfigurationError("X must be 2-d with at least one column")
    if X.shape[0] != y.shape[0]:
        raise ConfigurationError("X and y must have the same number of rows")
    params = params or ForestParams()
    if X.shape[0] < params.tree.min_sample_fit:
        raise ConfigurationError(
            f"need at least min_sample_fit={params.tree.min_sample_fit} rows"
        )
    col_kinds = tuple(col_kinds) if col_kinds is not None else (NUMERIC,) * X.shape[1]
    global_sorted = presort(X, col_kinds)

    if n_jobs == 1:
        results = [
            _fit_one_tree(X, y, col_kinds, params, i, global_sorted)
            for i in range(params.n_estimators)
        ]
    else:
        results = Parallel(n_jobs=n_jobs)(
            delayed(_fit_one_tree)(X, y, col_kinds, params, i, global_sorted)
            for i in range(params.n_estimators)
        )
    trees = [m for m, _ in results]
    records = [r for _, r in results]
    return RaffleForestModel(
        trees=trees,
        params=params,
        bootstrap_records=records,
        schema_fingerprint=schema_fingerprint(col_kinds, X.shape[1]),
        col_kinds=col_kinds,
        n_features=X.shape[1],
    )


def predict_forest(model: RaffleForestModel, X) -> np.ndarray:
    """Mean of the per-tree predictions, summed in fixed tree order."""
    X = np.ascontiguousarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[1] != model.n_features:
        raise ValueError(
            f"X must be 2-d with {model.n_features} columns, got shape {X.shape}"
        )
    acc = np.zeros(X.shape[0])
    for tree in model.trees:
        acc += predict_tree(tree, X)
    return acc / len(model.trees)


def feature_usage(model: RaffleForestModel) -> dict[int, dict[str, int]]:
    """Counts of non-constant node models per feature and kind, over all trees."""
    counts: dict[int, dict[str, int]] = {
        j: {k.value: 0 for k in ModelKind if k is not ModelKind.CON}
        for j in range(model.n_features)
    }
    def visit(node):
        if node is None:
            return
        m = node.model
        if m.kind is not ModelKind.CON:
            counts[m.feature][m.kind.value] += 1
        visit(node.left)
        visit(node.right)
    for tree in model.trees:
        visit(tree.root)
    return counts


def forest_to_dict(model: RaffleForestModel) -> dict:
    p = model.params
    return {
        "format": FOREST_FORMAT,
        "schema_fingerprint": model.schema_fingerprint,
        "col_kinds": list(model.col_kinds),
        "n_features": model.n_features,
        "params": {
            "n_estimators": p.n_estimators,
            "n_features_tree": p.n_features_tree,
            "seed": p.seed,
            "bootstrap": p.bootstrap,
            "truncation_factor": p.truncation_factor,
            "tree": {
                "alpha": p.tree.alpha,
                "max_depth": p.tree.max_depth,
                "max_model_depth": p.tree.max_model_depth,
                "min_sample_fit": p.tree.min_sample_fit,
                "min_sample_alpha": p.tree.min_sample_alpha,
                "min_sample_leaf": p.tree.min_sample_leaf,
                "allowed_kinds": sorted(k.value for k in p.tree.allowed_kinds),
                "n_features_node": p.tree.n_features_node,
            },
        },
        "bootstrap_records": [r.tolist() for r in model.bootstrap_records],
        "trees": [tree_to_dict(t) for t in model.trees],
    }


def forest_from_dict(d: dict) -> RaffleForestModel:
    if d.get("format") != FOREST_FORMAT:
        raise ValueError(f"unsupported forest document format: {d.get('format')!r}")
    p = d["params"]
    tp = p["tree"]
    params = ForestParams(
        n_estimators=p["n_estimators"],
        n_features_tree=p["n_features_tree"],
        seed=p["seed"],
        bootstrap=p["bootstrap"],
        truncation_factor=p["truncation_factor"],
        tree=TreeParams(
            alpha=tp["alpha"],
            max_depth=tp["max_depth"],
            max_model_depth=tp["max_model_depth"],
            min_sample_fit=tp["min_sample_fit"],
            min_sample_alpha=tp["min_sample_alpha"],
            min_sample_leaf=tp["min_sample_leaf"],
            allowed_kinds=frozenset(ModelKind(k) for k in tp["allowed_kinds"]),
            n_features_node=tp["n_features_node"],
        ),
    )
    return RaffleForestModel(
        trees=[tree_from_dict(t) for t in d["trees"]],
        params=params,
        bootstrap_records=[np.asarray(r, dtype=np.int64) for r in d["bootstrap_records"]],
        schema_fingerprint=d["schema_fingerprint"],
        col_kinds=tuple(d["col_kinds"]),
        n_features=d["n_features"],
    )


def save_forest(model: RaffleForestModel, path) -> None:
    with open(path, "w") as fh:
        json.dump(forest_to_dict(model), fh, sort_keys=True)


def load_forest(path) -> RaffleForestModel:
    with open(path) as fh:
        return forest_from_dict(json.load(fh))
