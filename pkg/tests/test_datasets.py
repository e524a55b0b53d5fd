import numpy as np
import pandas as pd
import pytest

from raffle.datasets import (
    IngestError,
    additive_smooth,
    benchmark_suite,
    encode_like,
    from_dataframe,
    ingest,
    low_rank_design,
    singular_value_profile,
)


def _write(tmp_path, name, df):
    path = tmp_path / name
    df.to_csv(path, index=False)
    return path


def test_missing_target_code(tmp_path):
    path = _write(tmp_path, "a.csv", pd.DataFrame({"x": [1, 2, 3], "y": [1.0, 2.0, 3.0]}))
    with pytest.raises(IngestError) as err:
        ingest(path, "price")
    assert err.value.code == "missing-target"


def test_non_numeric_target_code(tmp_path):
    path = _write(tmp_path, "a.csv", pd.DataFrame({"x": [1, 2], "y": ["a", "b"]}))
    with pytest.raises(IngestError) as err:
        ingest(path, "y")
    assert err.value.code == "non-numeric-target"


def test_empty_file_codes(tmp_path):
    empty = tmp_path / "empty.csv"
    empty.write_text("")
    with pytest.raises(IngestError) as err:
        ingest(empty, "y")
    assert err.value.code == "empty-file"
    header_only = tmp_path / "header.csv"
    header_only.write_text("x,y\n")
    with pytest.raises(IngestError) as err:
        ingest(header_only, "y")
    assert err.value.code == "empty-file"


def test_imputation_and_column_drop(tmp_path):
    df = pd.DataFrame(
        {
            "num": [1.0, np.nan, 3.0, 5.0],
            "cat": ["a", "b", None, "b"],
            "mostly_missing": [np.nan, np.nan, np.nan, 1.0],
            "y": [1.0, 2.0, 3.0, 4.0],
        }
    )
    ds, report = ingest(_write(tmp_path, "a.csv", df), "y")
    assert ("mostly_missing", "more than 50% missing") in report.dropped_columns
    strategies = {item["column"]: item for item in report.imputed_columns}
    assert strategies["num"]["strategy"] == "median" and strategies["num"]["value"] == 3.0
    assert strategies["cat"]["strategy"] == "mode" and strategies["cat"]["value"] == "b"
    assert ds.col_names == ("num", "cat")
    assert ds.col_kinds == ("num", "cat")
    # imputed values landed in the matrix
    assert ds.X[1, 0] == 3.0
    assert ds.X[2, 1] == ds.X[1, 1]  # mode "b"


def test_rows_with_missing_target_dropped(tmp_path):
    df = pd.DataFrame({"x": [1.0, 2.0, 3.0], "y": [1.0, np.nan, 3.0]})
    ds, report = ingest(_write(tmp_path, "a.csv", df), "y")
    assert report.dropped_rows == 1
    assert ds.n_rows == 2


def test_drop_dates_flag(tmp_path):
    df = pd.DataFrame(
        {
            "when": pd.date_range("2021-03-01", periods=4).astype(str),
            "digit_strings": ["10", "20", "30", "40"],
            "x": [1.0, 2.0, 3.0, 4.0],
            "y": [1.0, 2.0, 3.0, 4.0],
        }
    )
    path = _write(tmp_path, "a.csv", df)
    ds, report = ingest(path, "y", drop_dates=True)
    assert ("when", "date-typed") in report.dropped_columns
    assert "when" not in ds.col_names
    # kept without the flag (becomes categorical)
    ds2, _ = ingest(path, "y", drop_dates=False)
    assert "when" in ds2.col_names


def test_categorical_encoding_and_unseen_levels():
    df = pd.DataFrame({"c": ["b", "a", "c", "a"], "y": [1.0, 2.0, 3.0, 4.0]})
    ds = from_dataframe(df, "y")
    assert ds.cat_levels[0] == ["a", "b", "c"]
    np.testing.assert_array_equal(ds.X[:, 0], [1.0, 0.0, 2.0, 0.0])
    new = pd.DataFrame({"c": ["c", "zebra"]})
    enc = encode_like(ds.schema(), new)
    np.testing.assert_array_equal(enc[:, 0], [2.0, -1.0])


def test_encode_like_missing_column():
    df = pd.DataFrame({"x": [1.0], "y": [1.0]})
    ds = from_dataframe(df, "y")
    with pytest.raises(IngestError):
        encode_like(ds.schema(), pd.DataFrame({"z": [1.0]}))


def test_low_rank_design_properties():
    rng = np.random.default_rng(0)
    X = low_rank_design(500, 10, 8, rng)
    np.testing.assert_allclose(X.std(axis=0), np.ones(10), atol=1e-9)
    prof = singular_value_profile(10, 8)
    assert all(a > b for a, b in zip(prof, prof[1:]))
    assert prof[0] == pytest.approx(1.01)
    # the scaled design really concentrates variance in few directions
    s = np.linalg.svd(X - X.mean(axis=0), compute_uv=False)
    assert s[0] / s[-1] > 3.0


def test_benchmark_suite_shape_and_determinism():
    suite = benchmark_suite(seed=5)
    assert len(suite) >= 8
    names = [n for n, _ in suite]
    assert sum(n.startswith("linear") for n in names) == 4
    assert sum(n.startswith("nonlinear") for n in names) == 4
    again = benchmark_suite(seed=5)
    for (na, a), (nb, b) in zip(suite, again):
        assert na == nb
        np.testing.assert_array_equal(a.X, b.X)
        np.testing.assert_array_equal(a.y, b.y)


def test_additive_smooth_deterministic():
    a = additive_smooth(100, seed=3)
    b = additive_smooth(100, seed=3)
    np.testing.assert_array_equal(a.y, b.y)
    assert a.X.shape == (100, 4)
