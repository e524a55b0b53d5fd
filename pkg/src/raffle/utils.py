"""Small shared helpers: scoring and fold assignment."""

from __future__ import annotations

import numpy as np


def r2_score(y_true, y_pred) -> float:
    """Coefficient of determination about the holdout mean.

    Returns nan when the true values are constant (undefined score).
    """
    y_true = np.asarray(y_true, dtype=np.float64)
    y_pred = np.asarray(y_pred, dtype=np.float64)
    tss = float(np.sum((y_true - y_true.mean()) ** 2))
    if tss == 0.0:
        return float("nan")
    rss = float(np.sum((y_true - y_pred) ** 2))
    return 1.0 - rss / tss


def kfold_indices(n: int, k: int, seed: int) -> list[np.ndarray]:
    """Seeded shuffled k-fold split: disjoint folds covering all rows, with
    sizes differing by at most one."""
    if n < k:
        raise ValueError(f"need at least k={k} rows, got {n}")
    rng = np.random.default_rng(seed)
    perm = rng.permutation(n)
    return [np.sort(fold) for fold in np.array_split(perm, k)]
