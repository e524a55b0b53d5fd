"""Greedy construction of a single piecewise-linear model tree.

Each node selects one of the allowed node models by BIC; the fitted values
are subtracted from the residuals and the recursion continues.  A lin node
keeps all cases and increments only the model depth; split nodes partition
the cases and increment both depth counters; a con node terminates its
branch.  Predictions accumulate the per-node contributions along the path
from the root, are clamped to ``[-f*B, f*B]`` where ``B`` is half the range
of the (midrange-centered) training response, and are then shifted back.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .node_models import (
    ALL_KINDS,
    SPLIT_KINDS,
    ConfigurationError,
    DfConfig,
    ModelCandidate,
    ModelKind,
    fit_constant,
    scan_categorical,
    scan_feature,
    select_model,
)

NUMERIC = "num"
CATEGORICAL = "cat"

TREE_FORMAT = "raffle-tree-v1"

# a lin fit improving the node RSS by less than this fraction is replaced
# by con, so chains of no-op lin nodes cannot occur
_LIN_GAIN_FRACTION = 1e-10

_RSS_FLOOR_FRACTION = 1e-12


@dataclass(frozen=True)
class TreeParams:
    """Hyperparameters of one tree build.

    ``max_depth`` counts split nodes only; ``max_model_depth`` counts every
    fitted model including lin.  ``n_features_node`` is the fraction of the
    tree's features drawn (without replacement) at every node.  ``None`` for
    either depth means unlimited.
    """

    alpha: float = 1.0
    max_depth: int | None = 20
    max_model_depth: int | None = 100
    min_sample_fit: int = 10
    min_sample_alpha: int = 5
    min_sample_leaf: int = 5
    allowed_kinds: frozenset = ALL_KINDS
    n_features_node: float = 1.0

    def __post_init__(self):
        if not 0.0 <= self.alpha <= 1.0:
            raise ConfigurationError(f"alpha must be in [0, 1], got {self.alpha}")
        if self.min_sample_leaf < 1:
            raise ConfigurationError("min_sample_leaf must be >= 1")
        if self.min_sample_alpha < self.min_sample_leaf:
            raise ConfigurationError("min_sample_alpha must be >= min_sample_leaf")
        if self.min_sample_fit < 2:
            raise ConfigurationError("min_sample_fit must be >= 2")
        if not 0.0 < self.n_features_node <= 1.0:
            raise ConfigurationError("n_features_node must be in (0, 1]")
        if ModelKind.CON not in self.allowed_kinds:
            raise ConfigurationError("allowed_kinds must include con")

    @staticmethod
    def forest_member(**overrides) -> "TreeParams":
        """Defaults for a randomized tree inside a forest (blin disabled)."""
        base = dict(alpha=0.5, allowed_kinds=ALL_KINDS - {ModelKind.BLIN})
        base.update(overrides)
        return TreeParams(**base)


@dataclass
class TreeNode:
    """One fitted node.  Split nodes have left/right children, lin nodes a
    single continuation child, con nodes none."""

    model: ModelCandidate
    depth: int
    model_depth: int
    case_count: int
    left: "TreeNode | None" = None
    right: "TreeNode | None" = None
    # complement of the left category set observed in training, used to
    # route unseen categories to the larger child
    right_categories: frozenset | None = None

    @property
    def is_leaf(self) -> bool:
        return self.model.kind is ModelKind.CON


@dataclass
class PilotTreeModel:
    """A fitted tree plus the response centering/truncation metadata."""

    root: TreeNode
    center: float
    half_range: float
    truncation_factor: float
    params: TreeParams
    col_kinds: tuple[str, ...]
    n_features: int
    # whether centering/truncation bounds came from a bootstrap sample
    from_bootstrap: bool = False

    def predict(self, X) -> np.ndarray:
        return predict_tree(self, X)


def presort(X: np.ndarray, col_kinds) -> dict[int, np.ndarray]:
    """Stable ascending sort permutation per numeric column."""
    X = np.asarray(X)
    if X.ndim != 2 or X.shape[1] == 0:
        raise ValueError("X must be 2-d with at least one column")
    return {
        j: np.argsort(X[:, j], kind="stable")
        for j, kind in enumerate(col_kinds)
        if kind == NUMERIC
    }


def _depth_ok(value: int, limit: int | None) -> bool:
    return limit is None or value < limit


class _Builder:
    def __init__(self, X, y, col_kinds, params, rng, features, sorted_index, rss_floor):
        self.X = X
        self.col_kinds = col_kinds
        self.params = params
        self.rng = rng
        self.features = features
        self.res = y  # modified in place during the build
        self.cfg = DfConfig(alpha=params.alpha)
        self.rss_floor = rss_floor
        self.sorted_index = sorted_index

    def sample_features(self) -> list[int]:
        p = len(self.features)
        q = int(np.ceil(self.params.n_features_node * p))
        if q >= p:
            return list(self.features)
        chosen = self.rng.choice(len(self.features), size=q, replace=False)
        return [self.features[i] for i in np.sort(chosen)]

    def grow(self, members, sorted_pos, depth, model_depth) -> TreeNode:
        params = self.params
        t = members.shape[0]
        node_res = self.res[members]
        con = fit_constant(node_res, self.cfg, self.rss_floor)

        if (
            t < params.min_sample_fit
            or not _depth_ok(depth, params.max_depth)
            or not _depth_ok(model_depth, params.max_model_depth)
        ):
            return self._make_leaf(con, members, depth, model_depth)

        allowed = set(params.allowed_kinds) - {ModelKind.CON}
        if t < params.min_sample_alpha:
            allowed -= SPLIT_KINDS
        candidates = [con]
        if allowed:
            numeric_kinds = frozenset(allowed)
            for j in self.sample_features():
                if self.col_kinds[j] == NUMERIC:
                    idx = sorted_pos[j]
                    candidates.extend(
                        scan_feature(
                            self.X[idx, j],
                            self.res[idx],
                            numeric_kinds,
                            self.cfg,
                            params.min_sample_leaf,
                            self.rss_floor,
                            feature=j,
                        )
                    )
                elif ModelKind.PCON in allowed:
                    cands = scan_categorical(
                        self.X[members, j],
                        self.res[members],
                        self.cfg,
                        params.min_sample_leaf,
                        self.rss_floor,
                        feature=j,
                    )
                    candidates.extend(c for c in cands if c.kind is ModelKind.PCON)

        best = select_model(candidates, self.cfg)
        node_rss = float(np.sum(node_res**2))
        if best.kind is ModelKind.LIN and node_rss - best.rss < _LIN_GAIN_FRACTION * node_rss:
            best = con

        if best.kind is ModelKind.CON:
            return self._make_leaf(best, members, depth, model_depth)

        if best.kind is ModelKind.LIN:
            a, b = best.coef_left
            self.res[members] -= a + b * self.X[members, best.feature]
            node = TreeNode(best, depth, model_depth, t)
            node.left = self.grow(members, sorted_pos, depth, model_depth + 1)
            return node

        # split kinds
        j = best.feature
        if isinstance(best.split, frozenset):
            left_values = np.array(sorted(best.split))
            in_left = np.isin(self.X[members, j], left_values)
        else:
            in_left = self.X[members, j] <= best.split
        left_members = members[in_left]
        right_members = members[~in_left]

        mask = np.zeros(self.res.shape[0], dtype=bool)
        mask[left_members] = True
        left_pos = {k: idx[mask[idx]] for k, idx in sorted_pos.items()}
        right_pos = {k: idx[~mask[idx]] for k, idx in sorted_pos.items()}

        al, bl = best.coef_left
        ar, br = best.coef_right
        self.res[left_members] -= al + bl * self.X[left_members, j]
        self.res[right_members] -= ar + br * self.X[right_members, j]

        node = TreeNode(best, depth, model_depth, t)
        if isinstance(best.split, frozenset):
            node.right_categories = frozenset(np.unique(self.X[right_members, j]).tolist())
        node.left = self.grow(left_members, left_pos, depth + 1, model_depth + 1)
        node.right = self.grow(right_members, right_pos, depth + 1, model_depth + 1)
        return node

    def _make_leaf(self, con, members, depth, model_depth) -> TreeNode:
        self.res[members] -= con.coef_left[0]
        return TreeNode(con, depth, model_depth, members.shape[0])


def build_tree(
    X,
    y,
    col_kinds=None,
    params: TreeParams | None = None,
    truncation_factor: float = 1.5,
    rng=None,
    sorted_index: dict[int, np.ndarray] | None = None,
    feature_subset=None,
    from_bootstrap: bool = False,
) -> PilotTreeModel:
    """Fit one tree on ``(X, y)``.

    ``col_kinds`` marks each column "num" or "cat" (default: all numeric).
    ``sorted_index`` may carry a precomputed stable sort permutation per
    numeric column; ``feature_subset`` restricts the columns the tree may
    use; ``rng`` drives the per-node feature sampling (unused when all
    features are taken at every node).
    """
    X = np.ascontiguousarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64).ravel()
    if X.ndim != 2 or X.shape[0] != y.shape[0]:
        raise ValueError("X must be 2-d with one row per response value")
    params = params or TreeParams()
    if y.shape[0] < params.min_sample_fit:
        raise ConfigurationError(
            f"need at least min_sample_fit={params.min_sample_fit} cases, got {y.shape[0]}"
        )
    col_kinds = tuple(col_kinds) if col_kinds is not None else (NUMERIC,) * X.shape[1]
    if len(col_kinds) != X.shape[1]:
        raise ValueError("col_kinds must have one entry per column")
    if rng is None:
        rng = np.random.default_rng(0)
    features = sorted(feature_subset) if feature_subset is not None else list(range(X.shape[1]))

    y_min, y_max = float(y.min()), float(y.max())
    center = 0.5 * (y_max + y_min)
    half_range = 0.5 * (y_max - y_min)
    res = y - center
    rss_floor = _RSS_FLOOR_FRACTION * float(np.var(res))

    if sorted_index is None:
        sorted_index = presort(X, col_kinds)
    sorted_pos = {j: sorted_index[j] for j in features if col_kinds[j] == NUMERIC}

    builder = _Builder(X, res, col_kinds, params, rng, features, sorted_index, rss_floor)
    root = builder.grow(np.arange(y.shape[0]), sorted_pos, depth=0, model_depth=0)
    return PilotTreeModel(
        root=root,
        center=center,
        half_range=half_range,
        truncation_factor=truncation_factor,
        params=params,
        col_kinds=col_kinds,
        n_features=X.shape[1],
        from_bootstrap=from_bootstrap,
    )


def _accumulate(node: TreeNode, X: np.ndarray, idx: np.ndarray, out: np.ndarray) -> None:
    if idx.shape[0] == 0:
        return
    m = node.model
    if m.kind is ModelKind.CON:
        out[idx] += m.coef_left[0]
        return
    if m.kind is ModelKind.LIN:
        a, b = m.coef_left
        out[idx] += a + b * X[idx, m.feature]
        _accumulate(node.left, X, idx, out)
        return
    col = X[idx, m.feature]
    if isinstance(m.split, frozenset):
        left_values = np.array(sorted(m.split))
        in_left = np.isin(col, left_values)
        if node.right_categories is not None:
            right_values = np.array(sorted(node.right_categories))
            seen = in_left | np.isin(col, right_values)
            if not seen.all() and node.left.case_count > node.right.case_count:
                in_left = in_left | ~seen
    else:
        in_left = col <= m.split
    left_idx = idx[in_left]
    right_idx = idx[~in_left]
    al, bl = m.coef_left
    ar, br = m.coef_right
    out[left_idx] += al + bl * X[left_idx, m.feature]
    out[right_idx] += ar + br * X[right_idx, m.feature]
    _accumulate(node.left, X, left_idx, out)
    _accumulate(node.right, X, right_idx, out)


def predict_tree(model: PilotTreeModel, X) -> np.ndarray:
    """Predict by path-accumulated coefficients with truncation."""
    X = np.ascontiguousarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[1] != model.n_features:
        raise ValueError(f"X must be 2-d with {model.n_features} columns")
    raw = np.zeros(X.shape[0])
    _accumulate(model.root, X, np.arange(X.shape[0]), raw)
    bound = model.truncation_factor * model.half_range
    if np.isfinite(bound):
        np.clip(raw, -bound, bound, out=raw)
    return raw + model.center


# ---------------------------------------------------------------------------
# JSON serialization
# ---------------------------------------------------------------------------


def _candidate_to_dict(m: ModelCandidate) -> dict:
    split = m.split
    if isinstance(split, frozenset):
        split = {"categories": sorted(split)}
    return {
        "kind": m.kind.value,
        "feature": m.feature,
        "split": split,
        "coef_left": list(m.coef_left),
        "coef_right": list(m.coef_right),
        "rss": m.rss,
        "bic": m.bic,
        "n": m.n,
    }


def _candidate_from_dict(d: dict) -> ModelCandidate:
    split = d["split"]
    if isinstance(split, dict):
        split = frozenset(split["categories"])
    return ModelCandidate(
        kind=ModelKind(d["kind"]),
        feature=d["feature"],
        split=split,
        coef_left=tuple(d["coef_left"]),
        coef_right=tuple(d["coef_right"]),
        rss=d["rss"],
        bic=d["bic"],
        n=d["n"],
    )


def _node_to_dict(node: TreeNode) -> dict:
    d = {
        "model": _candidate_to_dict(node.model),
        "depth": node.depth,
        "model_depth": node.model_depth,
        "case_count": node.case_count,
    }
    if node.right_categories is not None:
        d["right_categories"] = sorted(node.right_categories)
    if node.left is not None:
        d["left"] = _node_to_dict(node.left)
    if node.right is not None:
        d["right"] = _node_to_dict(node.right)
    return d


def _node_from_dict(d: dict) -> TreeNode:
    node = TreeNode(
        model=_candidate_from_dict(d["model"]),
        depth=d["depth"],
        model_depth=d["model_depth"],
        case_count=d["case_count"],
    )
    if "right_categories" in d:
        node.right_categories = frozenset(d["right_categories"])
    if "left" in d:
        node.left = _node_from_dict(d["left"])
    if "right" in d:
        node.right = _node_from_dict(d["right"])
    return node


def tree_to_dict(model: PilotTreeModel) -> dict:
    params = model.params
    return {
        "format": TREE_FORMAT,
        "center": model.center,
        "half_range": model.half_range,
        "truncation_factor": model.truncation_factor,
        "from_bootstrap": model.from_bootstrap,
        "col_kinds": list(model.col_kinds),
        "n_features": model.n_features,
        "params": {
            "alpha": params.alpha,
            "max_depth": params.max_depth,
            "max_model_depth": params.max_model_depth,
            "min_sample_fit": params.min_sample_fit,
            "min_sample_alpha": params.min_sample_alpha,
            "min_sample_leaf": params.min_sample_leaf,
            "allowed_kinds": sorted(k.value for k in params.allowed_kinds),
            "n_features_node": params.n_features_node,
        },
        "root": _node_to_dict(model.root),
    }


def tree_from_dict(d: dict) -> PilotTreeModel:
    if d.get("format") != TREE_FORMAT:
        raise ValueError(f"unsupported tree document format: {d.get('format')!r}")
    p = d["params"]
    params = TreeParams(
        alpha=p["alpha"],
        max_depth=p["max_depth"],
        max_model_depth=p["max_model_depth"],
        min_sample_fit=p["min_sample_fit"],
        min_sample_alpha=p["min_sample_alpha"],
        min_sample_leaf=p["min_sample_leaf"],
        allowed_kinds=frozenset(ModelKind(k) for k in p["allowed_kinds"]),
        n_features_node=p["n_features_node"],
    )
    return PilotTreeModel(
        root=_node_from_dict(d["root"]),
        center=d["center"],
        half_range=d["half_range"],
        truncation_factor=d["truncation_factor"],
        params=params,
        col_kinds=tuple(d["col_kinds"]),
        n_features=d["n_features"],
        from_bootstrap=d.get("from_bootstrap", False),
    )


def save_tree(model: PilotTreeModel, path) -> None:
    with open(path, "w") as fh:
        json.dump(tree_to_dict(model), fh, sort_keys=True)


def load_tree(path) -> PilotTreeModel:
    with open(path) as fh:
        return tree_from_dict(json.load(fh))
