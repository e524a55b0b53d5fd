"""Evaluation harness: cross-validated scoring, relative performance
tables, hyperparameter grid search, linearity categorization, and the
linear-convergence simulation study.

All randomness is driven by explicit seeds; the same seed reproduces the
same folds, fits, and emitted files byte for byte.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .datasets import Dataset, low_rank_design, singular_value_profile
from .estimators import (
    CartForestRegressor,
    CartTreeRegressor,
    OlsRegressor,
    PilotRegressor,
    RaffleRegressor,
    RidgeCvRegressor,
)
from .utils import kfold_indices, r2_score

METHOD_NAMES = ("ols", "ridge", "pilot", "cart", "raffle", "cart_forest")

# methods whose fitted function is globally linear in the features
LINEAR_METHODS = ("ridge", "lasso")


def make_method(name: str, seed: int = 0, categorical_features=None, n_jobs: int = 1, **overrides):
    """Construct a ready-to-fit estimator from the method registry."""
    if name == "ols":
        return OlsRegressor()
    if name == "ridge":
        return RidgeCvRegressor(random_state=seed, **overrides)
    if name == "pilot":
        return PilotRegressor(categorical_features=categorical_features, **overrides)
    if name == "cart":
        return CartTreeRegressor(categorical_features=categorical_features, **overrides)
    if name == "raffle":
        return RaffleRegressor(
            random_state=seed, n_jobs=n_jobs, categorical_features=categorical_features, **overrides
        )
    if name == "cart_forest":
        return CartForestRegressor(
            random_state=seed, n_jobs=n_jobs, categorical_features=categorical_features, **overrides
        )
    raise ValueError(f"unknown method {name!r}; known: {METHOD_NAMES}")


# ---------------------------------------------------------------------------
# Cross-validated scoring and relative tables
# ---------------------------------------------------------------------------


def relative_scores(raw: dict[str, float]) -> dict[str, float]:
    """Relative performance within one dataset: negative scores are clipped
    to zero, then everything is divided by the best clipped score.  The best
    method lands exactly at 1.  If no method beats the mean predictor, all
    entries are 0."""
    clipped = {m: max(0.0, s) for m, s in raw.items()}
    top = max(clipped.values(), default=0.0)
    if top == 0.0:
        return {m: 0.0 for m in raw}
    return {m: v / top for m, v in clipped.items()}


def cv_score_method(dataset: Dataset, name: str, k: int = 5, seed: int = 0,
                    n_jobs: int = 1, overrides: dict | None = None) -> dict:
    """Mean k-fold holdout R^2 for one method on one dataset.

    Folds with a constant holdout target have no defined R^2; they are
    skipped and recorded.  All methods called with the same (k, seed) see
    identical folds.
    """
    cats = [j for j, kind in enumerate(dataset.col_kinds) if kind == "cat"]
    folds = kfold_indices(dataset.n_rows, k, seed)
    fold_scores: list[float] = []
    skipped: list[int] = []
    for f, idx in enumerate(folds):
        mask = np.ones(dataset.n_rows, dtype=bool)
        mask[idx] = False
        est = make_method(name, seed=seed, categorical_features=cats or None,
                          n_jobs=n_jobs, **(overrides or {}))
        est.fit(dataset.X[mask], dataset.y[mask])
        score = r2_score(dataset.y[idx], est.predict(dataset.X[idx]))
        if math.isnan(score):
            skipped.append(f)
        else:
            fold_scores.append(score)
    if not fold_scores:
        raise ValueError("every fold had a constant holdout target; no score defined")
    return {
        "mean_r2": float(np.mean(fold_scores)),
        "fold_scores": fold_scores,
        "skipped_folds": skipped,
    }


@dataclass
class CvReport:
    """Scores of several methods across several datasets."""

    dataset_names: list[str]
    method_names: list[str]
    raw: dict[str, dict[str, float]]
    relative: dict[str, dict[str, float]]
    details: dict[str, dict[str, dict]]
    k: int
    seed: int

    def summary(self) -> dict[str, float]:
        """Mean relative score per method across datasets."""
        return {
            m: float(np.mean([self.relative[d][m] for d in self.dataset_names]))
            for m in self.method_names
        }

    def as_dict(self) -> dict:
        return {
            "dataset_names": self.dataset_names,
            "method_names": self.method_names,
            "raw": self.raw,
            "relative": self.relative,
            "summary": self.summary(),
            "details": self.details,
            "k": self.k,
            "seed": self.seed,
        }


def run_cv(datasets: list[tuple[str, Dataset]], methods=METHOD_NAMES, k: int = 5,
           seed: int = 0, n_jobs: int = 1,
           method_overrides: dict[str, dict] | None = None) -> CvReport:
    """Score every method on every dataset with shared folds and build the
    raw and relative tables."""
    methods = list(methods)
    raw: dict[str, dict[str, float]] = {}
    details: dict[str, dict[str, dict]] = {}
    for ds_name, ds in datasets:
        raw[ds_name] = {}
        details[ds_name] = {}
        for m in methods:
            res = cv_score_method(ds, m, k=k, seed=seed, n_jobs=n_jobs,
                                  overrides=(method_overrides or {}).get(m))
            raw[ds_name][m] = res["mean_r2"]
            details[ds_name][m] = res
    relative = {d: relative_scores(raw[d]) for d in raw}
    return CvReport(
        dataset_names=[n for n, _ in datasets],
        method_names=methods,
        raw=raw,
        relative=relative,
        details=details,
        k=k,
        seed=seed,
    )


def load_external_scores(path) -> dict[str, dict[str, float]]:
    """Read externally produced scores (CSV columns: dataset,method,r2) into
    the raw-score table shape, so outside baselines can join a report."""
    raw: dict[str, dict[str, float]] = {}
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            raw.setdefault(row["dataset"], {})[row["method"]] = float(row["r2"])
    return raw


def merge_raw_scores(*tables: dict[str, dict[str, float]]) -> dict[str, dict[str, float]]:
    out: dict[str, dict[str, float]] = {}
    for table in tables:
        for ds, methods in table.items():
            out.setdefault(ds, {}).update(methods)
    return out


# ---------------------------------------------------------------------------
# Grid search
# ---------------------------------------------------------------------------

# Benchmark tuning grids.  Depth None means unlimited split depth.
GRIDS = {
    "raffle": {
        "alpha": [0.01, 0.5, 1.0],
        "n_features_node": [0.7, 1.0],
        "max_depth": [6, 20, None],
    },
    "cart_forest": {
        "n_features_node": [0.7, 1.0],
        "max_depth": [6, 20, None],
    },
    "pilot": {
        "alpha": [0.01, 0.5, 1.0],
        "max_depth": [6, 20],
    },
    "cart": {
        "max_depth": [6, 20],
    },
}

# preferred configuration per method when grid scores tie
_TIE_PREFERENCE = {
    "raffle": {"alpha": 0.5, "n_features_node": 1.0, "max_depth": 20},
    "cart_forest": {"n_features_node": 1.0, "max_depth": 20},
    "pilot": {"alpha": 1.0, "max_depth": 20},
    "cart": {"max_depth": 20},
}


def _grid_points(grid: dict) -> list[dict]:
    names = sorted(grid)
    points = [{}]
    for name in names:
        points = [dict(pt, **{name: v}) for pt in points for v in grid[name]]
    return points


def _param_sort_key(params: dict):
    # None (unlimited depth) orders after every finite value
    return tuple(
        (v is None, v if v is not None else 0.0) for _, v in sorted(params.items())
    )


@dataclass
class GridResult:
    method: str
    rows: list[dict]
    best_params: dict
    best_score: float

    def as_dict(self) -> dict:
        return {
            "method": self.method,
            "rows": self.rows,
            "best_params": self.best_params,
            "best_score": self.best_score,
        }


def grid_search(dataset: Dataset, method: str, grid: dict | None = None, k: int = 5,
                seed: int = 0, n_jobs: int = 1, base_overrides: dict | None = None) -> GridResult:
    """Exhaustive CV over the method's hyperparameter grid.

    Ties on the mean score go first to the method's default configuration,
    then to the lexicographically smallest parameter combination.
    """
    if grid is None:
        if method not in GRIDS:
            raise ValueError(f"no default grid for method {method!r}")
        grid = GRIDS[method]
    preferred = _TIE_PREFERENCE.get(method, {})
    rows = []
    for point in _grid_points(grid):
        overrides = dict(base_overrides or {})
        overrides.update(point)
        res = cv_score_method(dataset, method, k=k, seed=seed, n_jobs=n_jobs, overrides=overrides)
        rows.append({"params": point, "mean_r2": res["mean_r2"], "fold_scores": res["fold_scores"]})
    best = min(
        rows,
        key=lambda r: (
            -r["mean_r2"],
            0 if all(r["params"].get(k_) == v for k_, v in preferred.items()) else 1,
            _param_sort_key(r["params"]),
        ),
    )
    return GridResult(method=method, rows=rows, best_params=best["params"], best_score=best["mean_r2"])


# ---------------------------------------------------------------------------
# Linearity categorization
# ---------------------------------------------------------------------------


def categorize_linearity(raw: dict[str, dict[str, float]]) -> dict[str, str]:
    """Label each dataset linear or nonlinear from its raw scores.

    A dataset is linear when the best available globally-linear method
    (ridge, and lasso if present) strictly beats the single CART tree;
    ties count as nonlinear.  Requires "ridge" and "cart" scores.
    """
    out = {}
    for ds, scores in raw.items():
        if "ridge" not in scores or "cart" not in scores:
            raise ValueError(f"dataset {ds!r} needs 'ridge' and 'cart' scores")
        best_linear = max(scores[m] for m in LINEAR_METHODS if m in scores)
        out[ds] = "linear" if best_linear > scores["cart"] else "nonlinear"
    return out


# ---------------------------------------------------------------------------
# Linear-convergence simulation
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SimConfig:
    """Design of the convergence study on a low-effective-rank linear truth.

    A pool of ``n_pool`` rows is generated per repetition; the last
    ``test_size`` rows are the fixed evaluation set and nested prefixes of
    the remainder are the training sets.  Coefficients are uniform on
    [coef_low, coef_high]; one curve is produced per noise level.
    """

    n_pool: int
    p: int
    effective_rank: int
    test_size: int
    train_sizes: tuple
    noise_sds: tuple = (1.0,)
    coef_low: float = 0.0
    coef_high: float = 100.0
    repetitions: int = 5
    seed: int = 0
    n_estimators: int = 100

    def __post_init__(self):
        if max(self.train_sizes) + self.test_size > self.n_pool:
            raise ValueError("largest train size plus test size exceeds the pool")


def paper_sim_config(seed: int = 0) -> SimConfig:
    """Full-scale study design (expensive; hours of compute)."""
    return SimConfig(
        n_pool=8000,
        p=20,
        effective_rank=16,
        test_size=2000,
        train_sizes=tuple(range(10, 6001, 200)),
        noise_sds=(0.0, 0.1, 0.5, 1.0),
        repetitions=5,
        seed=seed,
    )


def desk_sim_config(seed: int = 0, repetitions: int = 5) -> SimConfig:
    """Reduced design that preserves the qualitative comparison while
    finishing in minutes on one core: smaller pool, fewer features, and
    25-tree forests."""
    return SimConfig(
        n_pool=2500,
        p=10,
        effective_rank=8,
        test_size=1000,
        train_sizes=tuple(range(50, 1501, 50)),
        noise_sds=(1.0,),
        repetitions=repetitions,
        seed=seed,
        n_estimators=25,
    )


@dataclass
class SimResult:
    config: SimConfig
    methods: list[str]
    curves: dict = field(default_factory=dict)  # (method, sd) -> list of mean R^2
    per_rep: dict = field(default_factory=dict)  # (method, sd, rep) -> list of R^2
    crossings: dict = field(default_factory=dict)  # (method, sd, threshold) -> size or None
    singular_profile: list = field(default_factory=list)

    def rows(self) -> list[list]:
        out = []
        for sd in self.config.noise_sds:
            for i, size in enumerate(self.config.train_sizes):
                for m in self.methods:
                    out.append([sd, size, m, self.curves[(m, sd)][i]])
        return out


CROSSING_THRESHOLDS = (0.97, 0.99)


def _first_crossing(curve, ols_curve, threshold: float):
    for size_index in range(len(curve)):
        if curve[size_index] >= threshold * ols_curve[size_index]:
            return size_index
    return None


def simulate_linear_convergence(cfg: SimConfig, methods=("ols", "cart_forest", "raffle"),
                                n_jobs: int = 1) -> SimResult:
    """Learning curves of each method on a linear ground truth with a
    low-effective-rank design, averaged over repetitions."""
    methods = list(methods)
    result = SimResult(config=cfg, methods=methods,
                       singular_profile=singular_value_profile(cfg.p, cfg.effective_rank))
    forest_overrides = {"n_estimators": cfg.n_estimators}
    acc = {(m, sd): np.zeros(len(cfg.train_sizes)) for m in methods for sd in cfg.noise_sds}

    for rep in range(cfg.repetitions):
        rng = np.random.default_rng(np.random.SeedSequence((cfg.seed, rep)))
        X = low_rank_design(cfg.n_pool, cfg.p, cfg.effective_rank, rng)
        beta = rng.uniform(cfg.coef_low, cfg.coef_high, size=cfg.p)
        signal = X @ beta
        base_noise = rng.normal(size=cfg.n_pool)
        X_test = X[-cfg.test_size:]
        fit_seed = cfg.seed * 100003 + rep
        for sd in cfg.noise_sds:
            y = signal + sd * base_noise
            y_test = y[-cfg.test_size:]
            for m in methods:
                scores = []
                for size in cfg.train_sizes:
                    overrides = forest_overrides if m in ("raffle", "cart_forest") else {}
                    est = make_method(m, seed=fit_seed, n_jobs=n_jobs, **overrides)
                    est.fit(X[:size], y[:size])
                    scores.append(r2_score(y_test, est.predict(X_test)))
                result.per_rep[(m, sd, rep)] = scores
                acc[(m, sd)] += np.asarray(scores)

    for key, total in acc.items():
        result.curves[key] = (total / cfg.repetitions).tolist()

    if "ols" in methods:
        for sd in cfg.noise_sds:
            ols_curve = result.curves[("ols", sd)]
            for m in methods:
                if m == "ols":
                    continue
                for thr in CROSSING_THRESHOLDS:
                    idx = _first_crossing(result.curves[(m, sd)], ols_curve, thr)
                    result.crossings[(m, sd, thr)] = (
                        None if idx is None else cfg.train_sizes[idx]
                    )
    return result


# ---------------------------------------------------------------------------
# Deterministic writers
# ---------------------------------------------------------------------------


def _fmt(value):
    if isinstance(value, float):
        return repr(value)
    return str(value)


def write_csv(path, header: list[str], rows: list[list]) -> None:
    """CSV with repr-exact floats so identical inputs give identical bytes."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])


def write_json(path, obj) -> None:
    with open(path, "w") as fh:
        json.dump(obj, fh, sort_keys=True, indent=2)
        fh.write("\n")


def sim_result_to_csv(result: SimResult, path) -> None:
    write_csv(path, ["noise_sd", "train_size", "method", "mean_r2"], result.rows())
