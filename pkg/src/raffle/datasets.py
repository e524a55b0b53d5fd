"""Dataset ingestion and synthetic data generators.

A :class:`Dataset` is a column-typed feature matrix (numeric columns as
float64, categorical columns as integer codes into stored level lists)
plus a numeric target.  CSV ingestion applies the benchmark preprocessing
rules: optionally drop date columns, drop columns with more than 50%
missing values, impute remaining numeric gaps with the column median and
categorical gaps with the mode, and record every transformation in an
ingestion report.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import pandas as pd

from .tree import CATEGORICAL, NUMERIC


class IngestError(ValueError):
    """Ingestion failure with a machine-readable ``code``."""

    def __init__(self, code: str, message: str):
        super().__init__(message)
        self.code = code


@dataclass
class IngestReport:
    """Log of every transformation applied while loading a file."""

    dropped_columns: list[tuple[str, str]] = field(default_factory=list)
    imputed_columns: list[dict] = field(default_factory=list)
    dropped_rows: int = 0
    notes: list[str] = field(default_factory=list)

    def as_dict(self) -> dict:
        return {
            "dropped_columns": [list(t) for t in self.dropped_columns],
            "imputed_columns": self.imputed_columns,
            "dropped_rows": self.dropped_rows,
            "notes": self.notes,
        }


@dataclass
class Dataset:
    """Encoded feature matrix with a numeric target."""

    X: np.ndarray
    y: np.ndarray
    col_names: tuple[str, ...]
    col_kinds: tuple[str, ...]
    target_name: str
    cat_levels: dict[int, list] = field(default_factory=dict)

    @property
    def n_rows(self) -> int:
        return self.X.shape[0]

    @property
    def n_features(self) -> int:
        return self.X.shape[1]

    def schema(self) -> dict:
        return {
            "col_names": list(self.col_names),
            "col_kinds": list(self.col_kinds),
            "target_name": self.target_name,
            "cat_levels": {str(j): levels for j, levels in sorted(self.cat_levels.items())},
        }


def from_dataframe(df: pd.DataFrame, target: str) -> Dataset:
    """Encode an already-clean dataframe: numeric columns to float64,
    everything else to integer codes over sorted levels."""
    if target not in df.columns:
        raise IngestError("missing-target", f"target column {target!r} not found")
    y_col = df[target]
    if not pd.api.types.is_numeric_dtype(y_col):
        raise IngestError("non-numeric-target", f"target column {target!r} is not numeric")
    feats = [c for c in df.columns if c != target]
    cols = []
    kinds = []
    cat_levels: dict[int, list] = {}
    for j, name in enumerate(feats):
        col = df[name]
        if pd.api.types.is_numeric_dtype(col):
            cols.append(col.to_numpy(dtype=np.float64))
            kinds.append(NUMERIC)
        else:
            levels = sorted(col.astype(str).unique().tolist())
            code = {v: i for i, v in enumerate(levels)}
            cols.append(col.astype(str).map(code).to_numpy(dtype=np.float64))
            kinds.append(CATEGORICAL)
            cat_levels[j] = levels
    X = np.column_stack(cols) if cols else np.empty((len(df), 0))
    return Dataset(
        X=X,
        y=y_col.to_numpy(dtype=np.float64),
        col_names=tuple(feats),
        col_kinds=tuple(kinds),
        target_name=target,
        cat_levels=cat_levels,
    )


def encode_like(dataset_schema: dict, df: pd.DataFrame) -> np.ndarray:
    """Encode new rows against a stored schema; unseen category labels get
    code -1 (routed by the trees' unseen-category rule)."""
    names = dataset_schema["col_names"]
    kinds = dataset_schema["col_kinds"]
    levels = {int(j): v for j, v in dataset_schema["cat_levels"].items()}
    missing = [c for c in names if c not in df.columns]
    if missing:
        raise IngestError("missing-column", f"input is missing columns: {missing}")
    cols = []
    for j, name in enumerate(names):
        col = df[name]
        if kinds[j] == NUMERIC:
            cols.append(pd.to_numeric(col, errors="coerce").to_numpy(dtype=np.float64))
        else:
            code = {v: i for i, v in enumerate(levels[j])}
            cols.append(
                col.astype(str).map(lambda v: code.get(v, -1)).to_numpy(dtype=np.float64)
            )
    return np.column_stack(cols) if cols else np.empty((len(df), 0))


def _is_date_column(col: pd.Series) -> bool:
    if pd.api.types.is_datetime64_any_dtype(col):
        return True
    if col.dtype != object:
        return False
    sample = col.dropna()
    if sample.empty:
        return False
    try:
        parsed = pd.to_datetime(sample, errors="coerce", format="mixed")
    except (ValueError, TypeError):
        return False
    looks_numeric = bool(pd.to_numeric(sample, errors="coerce").notna().all())
    return bool(parsed.notna().all()) and not looks_numeric


def ingest(path, target: str, drop_dates: bool = False) -> tuple[Dataset, IngestReport]:
    """Load a CSV into a Dataset, applying the preprocessing rules."""
    report = IngestReport()
    try:
        df = pd.read_csv(path)
    except pd.errors.EmptyDataError:
        raise IngestError("empty-file", f"{path} is empty") from None
    if df.empty:
        raise IngestError("empty-file", f"{path} has a header but no rows")
    if target not in df.columns:
        raise IngestError("missing-target", f"target column {target!r} not found in {path}")
    if not pd.api.types.is_numeric_dtype(df[target]):
        raise IngestError("non-numeric-target", f"target column {target!r} is not numeric")

    n0 = len(df)
    df = df[df[target].notna()]
    if len(df) < n0:
        report.dropped_rows = n0 - len(df)
        report.notes.append(f"dropped {n0 - len(df)} rows with missing target")

    for name in [c for c in df.columns if c != target]:
        col = df[name]
        if drop_dates and _is_date_column(col):
            df = df.drop(columns=[name])
            report.dropped_columns.append((name, "date-typed"))
            continue
        if col.isna().mean() > 0.5:
            df = df.drop(columns=[name])
            report.dropped_columns.append((name, "more than 50% missing"))
            continue
        n_missing = int(col.isna().sum())
        if n_missing == 0:
            continue
        if pd.api.types.is_numeric_dtype(col):
            value = float(col.median())
            df[name] = col.fillna(value)
            report.imputed_columns.append(
                {"column": name, "strategy": "median", "value": value, "count": n_missing}
            )
        else:
            value = sorted(col.mode().astype(str).tolist())[0]
            df[name] = col.fillna(value)
            report.imputed_columns.append(
                {"column": name, "strategy": "mode", "value": value, "count": n_missing}
            )

    dataset = from_dataframe(df.reset_index(drop=True), target)
    if dataset.n_features == 0:
        raise IngestError("no-usable-columns", "no usable feature columns remain after cleaning")
    return dataset, report


# ---------------------------------------------------------------------------
# Synthetic generators
# ---------------------------------------------------------------------------


def low_rank_design(n: int, p: int, effective_rank: int, rng) -> np.ndarray:
    """Random design matrix with controlled singular-value decay.

    The profile is s_i = exp(-(i / effective_rank)^2) + 0.01 * (1 - i/p)
    for i = 0..p-1; columns are rescaled to unit variance afterwards.
    """
    g = rng.normal(size=(n, p))
    u, _ = np.linalg.qr(g)
    v, _ = np.linalg.qr(rng.normal(size=(p, p)))
    i = np.arange(p)
    s = np.exp(-((i / effective_rank) ** 2)) + 0.01 * (1 - i / p)
    X = (u * s) @ v.T
    scale = X.std(axis=0)
    scale[scale == 0.0] = 1.0
    return X / scale


def singular_value_profile(p: int, effective_rank: int) -> list[float]:
    i = np.arange(p)
    return (np.exp(-((i / effective_rank) ** 2)) + 0.01 * (1 - i / p)).tolist()


def additive_smooth(n: int, p: int = 4, noise_sd: float = 0.3, seed: int = 0) -> Dataset:
    """Additive target with smooth bounded component functions."""
    rng = np.random.default_rng(seed)
    X = rng.uniform(0, 1, size=(n, p))
    y = (
        np.sin(2 * np.pi * X[:, 0])
        + 2.0 * (X[:, 1] - 0.5) ** 2
        + np.tanh(3 * (X[:, 2] - 0.5))
        + 0.5 * np.cos(np.pi * X[:, 3 % p])
        + rng.normal(scale=noise_sd, size=n)
    )
    return _plain_dataset(X, y)


def _plain_dataset(X: np.ndarray, y: np.ndarray) -> Dataset:
    p = X.shape[1]
    return Dataset(
        X=np.ascontiguousarray(X, dtype=np.float64),
        y=np.asarray(y, dtype=np.float64),
        col_names=tuple(f"x{j}" for j in range(p)),
        col_kinds=(NUMERIC,) * p,
        target_name="y",
    )


def benchmark_suite(seed: int = 0, n: int = 220) -> list[tuple[str, Dataset]]:
    """Bundled suite of small synthetic regression problems: four with a
    dominant linear structure and four with nonlinear structure."""
    rng = np.random.default_rng(seed)
    suite = []

    X = rng.normal(size=(n, 5))
    y = X @ np.array([3.0, -2.0, 1.5, 0.5, -1.0]) + 0.3 * rng.normal(size=n)
    suite.append(("linear_dense", _plain_dataset(X, y)))

    X = low_rank_design(n, 8, 4, rng)
    y = X @ rng.uniform(1, 5, size=8) + 0.2 * rng.normal(size=n)
    suite.append(("linear_lowrank", _plain_dataset(X, y)))

    X = rng.uniform(-2, 2, size=(n, 4))
    y = 4.0 * X[:, 0] - 1.0 * X[:, 1] + 0.1 * rng.standard_t(df=5, size=n)
    suite.append(("linear_sparse", _plain_dataset(X, y)))

    X = rng.normal(size=(n, 6))
    y = X @ np.array([1.0, 1.0, 1.0, -1.0, -1.0, -1.0]) + 0.5 * rng.normal(size=n)
    suite.append(("linear_noisy", _plain_dataset(X, y)))

    X = rng.uniform(0, 1, size=(n, 5))
    y = (
        10 * np.sin(np.pi * X[:, 0] * X[:, 1])
        + 20 * (X[:, 2] - 0.5) ** 2
        + 10 * X[:, 3]
        + 5 * X[:, 4]
        + rng.normal(size=n)
    )
    suite.append(("nonlinear_friedman", _plain_dataset(X, y)))

    X = rng.uniform(-1, 1, size=(n, 3))
    y = 5.0 * (X[:, 0] > 0.2) + 3.0 * (X[:, 1] > -0.3) * (X[:, 0] <= 0.2) + 0.2 * rng.normal(size=n)
    suite.append(("nonlinear_steps", _plain_dataset(X, y)))

    X = rng.normal(size=(n, 4))
    y = 2.0 * X[:, 0] * X[:, 1] + X[:, 2] ** 2 + 0.3 * rng.normal(size=n)
    suite.append(("nonlinear_interaction", _plain_dataset(X, y)))

    X = rng.uniform(0, 2, size=(n, 3))
    y = np.exp(X[:, 0]) * np.sin(2 * X[:, 1]) + 0.3 * rng.normal(size=n)
    suite.append(("nonlinear_wave", _plain_dataset(X, y)))

    return suite
