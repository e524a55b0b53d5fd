"""Candidate node models and BIC-based selection.

A tree node chooses among five univariate regression models: a constant
(con), a simple line (lin), a piecewise constant split (pcon), a continuous
broken line (blin) and a piecewise linear split (plin).  Goodness of fit is
traded against model complexity through a BIC whose degrees of freedom are
interpolated by a regularization exponent alpha in [0, 1]:

    nu_alpha(kind) = 1 + alpha * (nu(kind) - 1)
    bic = n * log(RSS / n) + nu_alpha * log(n)

At alpha = 1 the full (1, 2, 5, 5, 7) complexity penalties apply; at
alpha = 0 every kind costs the same and selection reduces to pure min-RSS.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, replace

import numpy as np

from ._scan import BLIN_SLOT, LIN_SLOT, PCON_SLOT, PLIN_SLOT, scan_numeric_kernel


class ModelKind(str, enum.Enum):
    CON = "con"
    LIN = "lin"
    PCON = "pcon"
    BLIN = "blin"
    PLIN = "plin"


NU = {
    ModelKind.CON: 1,
    ModelKind.LIN: 2,
    ModelKind.PCON: 5,
    ModelKind.BLIN: 5,
    ModelKind.PLIN: 7,
}

SPLIT_KINDS = frozenset({ModelKind.PCON, ModelKind.BLIN, ModelKind.PLIN})
ALL_KINDS = frozenset(ModelKind)

_KIND_SLOT = {
    ModelKind.LIN: LIN_SLOT,
    ModelKind.PCON: PCON_SLOT,
    ModelKind.BLIN: BLIN_SLOT,
    ModelKind.PLIN: PLIN_SLOT,
}


class ConfigurationError(ValueError):
    """Raised for invalid hyperparameter values."""


@dataclass(frozen=True)
class DfConfig:
    """Degrees-of-freedom interpolation setting."""

    alpha: float = 1.0

    def __post_init__(self):
        if not 0.0 <= self.alpha <= 1.0:
            raise ConfigurationError(f"alpha must be in [0, 1], got {self.alpha}")


def nu_alpha(kind: ModelKind, cfg: DfConfig) -> float:
    """Interpolated degrees of freedom of a model kind."""
    return 1.0 + cfg.alpha * (NU[kind] - 1)


def bic_alpha(rss: float, n: int, kind: ModelKind, cfg: DfConfig, rss_floor: float = 0.0) -> float:
    """BIC value for a fitted node model.

    ``rss_floor`` is a per-case RSS floor guarding against log(0) on perfect
    fits; the tree builder passes 1e-12 times the variance of the (centered)
    root response.  With the default of 0.0 a perfect fit yields -inf.
    """
    if n < 1:
        raise ConfigurationError(f"n must be >= 1, got {n}")
    if rss < 0:
        raise ConfigurationError(f"rss must be >= 0, got {rss}")
    rss = max(rss, rss_floor * n)
    if rss == 0.0:
        return -math.inf
    return n * math.log(rss / n) + nu_alpha(kind, cfg) * math.log(n)


@dataclass(frozen=True)
class ModelCandidate:
    """One fitted node model.

    ``split`` is a float threshold for numeric splits, a frozenset of left
    category codes for categorical pcon splits, and None for con/lin.
    ``coef_left``/``coef_right`` are (intercept, slope) pairs; constant
    pieces carry slope 0 and con duplicates its mean on both sides.
    """

    kind: ModelKind
    feature: int | None
    split: float | frozenset | None
    coef_left: tuple[float, float]
    coef_right: tuple[float, float]
    rss: float
    bic: float
    n: int


def fit_constant(residuals: np.ndarray, cfg: DfConfig, rss_floor: float = 0.0) -> ModelCandidate:
    """Fit the constant model (the mean of the residuals)."""
    r = np.asarray(residuals, dtype=np.float64)
    n = r.shape[0]
    mean = float(r.mean())
    rss = float(np.sum((r - mean) ** 2))
    return ModelCandidate(
        kind=ModelKind.CON,
        feature=None,
        split=None,
        coef_left=(mean, 0.0),
        coef_right=(mean, 0.0),
        rss=rss,
        bic=bic_alpha(rss, n, ModelKind.CON, cfg, rss_floor),
        n=n,
    )


def scan_feature(
    values: np.ndarray,
    residuals: np.ndarray,
    allowed: frozenset | set,
    cfg: DfConfig,
    min_sample_leaf: int = 1,
    rss_floor: float = 0.0,
    feature: int | None = None,
) -> list[ModelCandidate]:
    """Best candidate of each allowed kind on one sorted numeric column.

    ``values`` must be ascending with ``residuals`` aligned.  Kinds whose
    fit is inadmissible (zero-variance feature, no split with both children
    holding at least ``min_sample_leaf`` cases) are omitted; a con candidate
    is returned whenever con is allowed.
    """
    x = np.ascontiguousarray(values, dtype=np.float64)
    r = np.ascontiguousarray(residuals, dtype=np.float64)
    if x.shape != r.shape or x.ndim != 1:
        raise ValueError("values and residuals must be aligned 1-d arrays")
    if x.shape[0] < 2:
        raise ValueError("need at least 2 cases to scan a feature")
    if not allowed:
        raise ValueError("allowed kinds must be non-empty")

    out: list[ModelCandidate] = []
    if ModelKind.CON in allowed:
        out.append(fit_constant(r, cfg, rss_floor))

    want = np.zeros(4, dtype=np.bool_)
    for kind, slot in _KIND_SLOT.items():
        want[slot] = kind in allowed
    if not want.any():
        return out

    found, rss, split, coef = scan_numeric_kernel(x, r, min_sample_leaf, want)
    n = x.shape[0]
    for kind, slot in _KIND_SLOT.items():
        if not found[slot]:
            continue
        cand_rss = float(rss[slot])
        out.append(
            ModelCandidate(
                kind=kind,
                feature=feature,
                split=float(split[slot]) if kind in SPLIT_KINDS else None,
                coef_left=(float(coef[slot, 0]), float(coef[slot, 1])),
                coef_right=(float(coef[slot, 2]), float(coef[slot, 3])),
                rss=cand_rss,
                bic=bic_alpha(cand_rss, n, kind, cfg, rss_floor),
                n=n,
            )
        )
    return out


def scan_categorical(
    values: np.ndarray,
    residuals: np.ndarray,
    cfg: DfConfig,
    min_sample_leaf: int = 1,
    rss_floor: float = 0.0,
    feature: int | None = None,
) -> list[ModelCandidate]:
    """Best con and pcon candidates on one categorical column.

    Categories are ordered by their mean residual and then scanned as if
    numeric; for the squared loss the best split of that ordering is the
    best binary partition.  The pcon candidate stores the set of left
    category codes as its split descriptor.
    """
    vals = np.asarray(values)
    r = np.ascontiguousarray(residuals, dtype=np.float64)
    cats, inverse = np.unique(vals, return_inverse=True)
    out = [fit_constant(r, cfg, rss_floor)]
    if cats.shape[0] < 2:
        return out

    counts = np.bincount(inverse)
    sums = np.bincount(inverse, weights=r)
    order = np.argsort(sums / counts, kind="stable")
    rank = np.empty_like(order)
    rank[order] = np.arange(order.shape[0])
    pseudo = rank[inverse].astype(np.float64)
    sort_idx = np.argsort(pseudo, kind="stable")

    want = np.zeros(4, dtype=np.bool_)
    want[PCON_SLOT] = True
    found, rss, split, coef = scan_numeric_kernel(
        pseudo[sort_idx], r[sort_idx], min_sample_leaf, want
    )
    if not found[PCON_SLOT]:
        return out
    n_left = int(math.floor(split[PCON_SLOT])) + 1
    left = frozenset(cats[order[:n_left]].tolist())
    cand_rss = float(rss[PCON_SLOT])
    n = r.shape[0]
    out.append(
        ModelCandidate(
            kind=ModelKind.PCON,
            feature=feature,
            split=left,
            coef_left=(float(coef[PCON_SLOT, 0]), 0.0),
            coef_right=(float(coef[PCON_SLOT, 2]), 0.0),
            rss=cand_rss,
            bic=bic_alpha(cand_rss, n, ModelKind.PCON, cfg, rss_floor),
            n=n,
        )
    )
    return out


def _tie_key(cand: ModelCandidate, cfg: DfConfig) -> tuple:
    # lower complexity wins ties, then lower feature index, then smaller split
    feature = -1 if cand.feature is None else cand.feature
    if isinstance(cand.split, frozenset):
        split = float(len(cand.split))
    elif cand.split is None:
        split = -math.inf
    else:
        split = cand.split
    return (cand.bic, nu_alpha(cand.kind, cfg), feature, split)


def select_model(candidates: list[ModelCandidate], cfg: DfConfig) -> ModelCandidate:
    """Pick the candidate with the lowest BIC, with deterministic tie-breaking."""
    if not candidates:
        raise ValueError("candidates must be non-empty")
    return min(candidates, key=lambda c: _tie_key(c, cfg))


def with_updated_bic(cand: ModelCandidate, cfg: DfConfig, rss_floor: float = 0.0) -> ModelCandidate:
    """Recompute the BIC field of a candidate under a (new) configuration."""
    return replace(cand, bic=bic_alpha(cand.rss, cand.n, cand.kind, cfg, rss_floor))
