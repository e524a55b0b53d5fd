"""Independent brute-force reference implementations used by the tests.

Everything here is deliberately slow and direct: per-split least-squares
refits instead of incremental statistics, exhaustive partition enumeration,
and a plain recursive greedy tree.  The production code must agree with
these within tight tolerances.
"""

from __future__ import annotations

import itertools

import numpy as np


def _lstsq_rss(A: np.ndarray, y: np.ndarray) -> float:
    coef, *_ = np.linalg.lstsq(A, y, rcond=None)
    return float(np.sum((y - A @ coef) ** 2))


def _side_rss_mean(y: np.ndarray) -> float:
    return float(np.sum((y - y.mean()) ** 2))


def _side_rss_line(x: np.ndarray, y: np.ndarray) -> float:
    return _lstsq_rss(np.column_stack([np.ones_like(x), x]), y)


def admissible_split_indices(x_sorted: np.ndarray, min_leaf: int) -> list[int]:
    """Indices i such that splitting between i and i+1 is allowed: both sides
    hold at least min_leaf cases and the boundary values differ."""
    n = x_sorted.shape[0]
    return [
        i
        for i in range(n - 1)
        if x_sorted[i + 1] > x_sorted[i] and i + 1 >= min_leaf and n - i - 1 >= min_leaf
    ]


def scan_oracle(x: np.ndarray, y: np.ndarray, min_leaf: int) -> dict[str, dict]:
    """Best per-kind fit of one numeric feature by explicit refitting.

    Returns a dict keyed by kind name with ``rss`` and (for split kinds)
    ``split``; kinds with no admissible fit are absent.  For blin, splits
    whose hinge design is rank deficient are skipped, mirroring the
    production conditioning guard.
    """
    order = np.argsort(x, kind="stable")
    xs, ys = np.asarray(x, dtype=float)[order], np.asarray(y, dtype=float)[order]
    n = xs.shape[0]
    out: dict[str, dict] = {"con": {"rss": _side_rss_mean(ys), "split": None}}

    if xs[0] < xs[-1]:
        out["lin"] = {"rss": _side_rss_line(xs, ys), "split": None}

    best = {"pcon": (np.inf, None), "blin": (np.inf, None), "plin": (np.inf, None)}
    for i in admissible_split_indices(xs, min_leaf):
        s = 0.5 * (xs[i] + xs[i + 1])
        xl, yl = xs[: i + 1], ys[: i + 1]
        xr, yr = xs[i + 1 :], ys[i + 1 :]

        rss = _side_rss_mean(yl) + _side_rss_mean(yr)
        if rss < best["pcon"][0]:
            best["pcon"] = (rss, s)

        rss = _side_rss_line(xl, yl) + _side_rss_line(xr, yr)
        if rss < best["plin"][0]:
            best["plin"] = (rss, s)

        A = np.column_stack([np.ones(n), xs, np.maximum(xs - s, 0.0)])
        if np.linalg.matrix_rank(A) == 3:
            rss = _lstsq_rss(A, ys)
            if rss < best["blin"][0]:
                best["blin"] = (rss, s)

    for kind, (rss, s) in best.items():
        if np.isfinite(rss):
            out[kind] = {"rss": rss, "split": s}
    return out


def categorical_oracle(codes: np.ndarray, y: np.ndarray, min_leaf: int = 1) -> float:
    """Best two-group RSS over every binary partition of the category set."""
    codes = np.asarray(codes)
    y = np.asarray(y, dtype=float)
    cats = np.unique(codes)
    best = np.inf
    for r in range(1, len(cats)):
        for left in itertools.combinations(cats.tolist(), r):
            mask = np.isin(codes, left)
            nl, nr = int(mask.sum()), int((~mask).sum())
            if nl < min_leaf or nr < min_leaf:
                continue
            rss = _side_rss_mean(y[mask]) + _side_rss_mean(y[~mask])
            best = min(best, rss)
    return best


def cart_oracle_predict(
    X: np.ndarray,
    y: np.ndarray,
    X_query: np.ndarray,
    min_sample_fit: int = 10,
    min_sample_alpha: int = 5,
    min_sample_leaf: int = 5,
    max_depth: int | None = 20,
    report_ties: bool = False,
    tie_tol: float = 1e-9,
) -> np.ndarray:
    """Greedy constant-leaf regression tree grown by explicit search.

    Split selection: minimum summed child RSS, ties broken by lower feature
    index then smaller threshold; a split must strictly beat the node RSS.
    Predictions are leaf means of the original response.

    With ``report_ties`` the return value is ``(preds, tied)`` where ``tied``
    flags whether any node had two distinct splits within ``tie_tol`` of the
    winning RSS.  On tied nodes the greedy choice is order-dependent (two
    different splits can induce the same partition), so equivalence with
    another implementation is only meaningful on tie-free data.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    preds = np.empty(X_query.shape[0])
    tied = [False]

    def grow(rows: np.ndarray, qrows: np.ndarray, depth: int) -> None:
        yv = y[rows]
        if (
            rows.shape[0] < min_sample_fit
            or rows.shape[0] < min_sample_alpha
            or (max_depth is not None and depth >= max_depth)
        ):
            preds[qrows] = yv.mean()
            return
        node_rss = _side_rss_mean(yv)
        best = (np.inf, -1, np.inf)  # (rss, feature, threshold)
        runner_up = np.inf
        for j in range(X.shape[1]):
            xs = np.sort(X[rows, j], kind="stable")
            for i in admissible_split_indices(xs, min_sample_leaf):
                s = 0.5 * (xs[i] + xs[i + 1])
                mask = X[rows, j] <= s
                rss = _side_rss_mean(yv[mask]) + _side_rss_mean(yv[~mask])
                if (rss, j, s) < best:
                    runner_up = best[0]
                    best = (rss, j, s)
                elif rss < runner_up:
                    runner_up = rss
        rss, j, s = best
        if not np.isfinite(rss) or rss >= node_rss:
            preds[qrows] = yv.mean()
            return
        scale = max(node_rss, 1.0)
        if runner_up - rss <= tie_tol * scale:
            tied[0] = True
        mask = X[rows, j] <= s
        qmask = X_query[qrows, j] <= s
        grow(rows[mask], qrows[qmask], depth + 1)
        grow(rows[~mask], qrows[~qmask], depth + 1)

    grow(np.arange(X.shape[0]), np.arange(X_query.shape[0]), 0)
    if report_ties:
        return preds, tied[0]
    return preds


def tree_path_predict(model, X: np.ndarray) -> np.ndarray:
    """Row-at-a-time walk of a fitted tree: accumulate each node's
    contribution along the path, then truncate and shift.  Independent of
    the vectorized production predictor."""
    from raffle.node_models import ModelKind

    X = np.asarray(X, dtype=float)
    out = np.empty(X.shape[0])
    for i in range(X.shape[0]):
        node = model.root
        acc = 0.0
        while True:
            m = node.model
            if m.kind is ModelKind.CON:
                acc += m.coef_left[0]
                break
            if m.kind is ModelKind.LIN:
                a, b = m.coef_left
                acc += a + b * X[i, m.feature]
                node = node.left
                continue
            v = X[i, m.feature]
            if isinstance(m.split, frozenset):
                go_left = v in m.split
                if not go_left and node.right_categories is not None and v not in node.right_categories:
                    go_left = node.left.case_count > node.right.case_count
            else:
                go_left = v <= m.split
            a, b = m.coef_left if go_left else m.coef_right
            acc += a + b * v
            node = node.left if go_left else node.right
        bound = model.truncation_factor * model.half_range
        if np.isfinite(bound):
            acc = min(max(acc, -bound), bound)
        out[i] = acc + model.center
    return out
