import json
import math

import numpy as np
import pytest

from oracles import cart_oracle_predict, tree_path_predict
from raffle.baselines import cart_tree_params, fit_cart_tree
from raffle.node_models import ConfigurationError, ModelKind
from raffle.tree import (
    CATEGORICAL,
    NUMERIC,
    PilotTreeModel,
    TreeParams,
    build_tree,
    predict_tree,
    presort,
    tree_from_dict,
    tree_to_dict,
)


def test_presort_is_stable_and_numeric_only():
    X = np.array([[3.0, 0.0], [1.0, 1.0], [3.0, 2.0], [2.0, 0.0]])
    out = presort(X, (NUMERIC, CATEGORICAL))
    assert set(out) == {0}
    np.testing.assert_array_equal(out[0], [1, 3, 0, 2])
    # ties keep original order (stable)
    out = presort(np.array([[1.0], [1.0], [0.0]]), (NUMERIC,))
    np.testing.assert_array_equal(out[0], [2, 0, 1])


def test_linear_data_yields_lin_root_and_near_perfect_fit():
    rng = np.random.default_rng(0)
    X = rng.normal(size=(200, 3))
    y = 3.0 * X[:, 1] - 1.0 + 0.01 * rng.normal(size=200)
    model = build_tree(X, y)
    assert model.root.model.kind is ModelKind.LIN
    assert model.root.model.feature == 1
    pred = predict_tree(model, X)
    assert float(np.mean((pred - y) ** 2)) < 1e-3


def test_exact_line_is_recovered():
    x = np.linspace(-2, 5, 40).reshape(-1, 1)
    y = 2.5 * x[:, 0] + 0.75
    model = build_tree(x, y)
    pred = predict_tree(model, x)
    np.testing.assert_allclose(pred, y, atol=1e-8)


def test_step_function_is_recovered_by_splits():
    x = np.linspace(0, 1, 60).reshape(-1, 1)
    y = np.where(x[:, 0] < 0.5, -1.0, 1.0)
    model = build_tree(x, y, params=TreeParams(min_sample_leaf=1, min_sample_alpha=1))
    pred = predict_tree(model, x)
    np.testing.assert_allclose(pred, y, atol=1e-8)


def test_predict_matches_pathwalk_oracle():
    rng = np.random.default_rng(4)
    X = rng.normal(size=(300, 4))
    y = np.sin(X[:, 0]) + X[:, 1] * (X[:, 2] > 0) + 0.1 * rng.normal(size=300)
    model = build_tree(X, y)
    X_new = rng.normal(size=(150, 4)) * 2.0
    np.testing.assert_allclose(predict_tree(model, X_new), tree_path_predict(model, X_new), atol=1e-10)


def test_truncation_bound_is_respected_and_reaches_clip():
    rng = np.random.default_rng(5)
    X = rng.normal(size=(100, 2))
    y = 5.0 * X[:, 0] + rng.normal(size=100)
    model = build_tree(X, y, truncation_factor=1.5)
    lo = model.center - 1.5 * model.half_range
    hi = model.center + 1.5 * model.half_range
    X_far = rng.normal(size=(500, 2)) * 50.0
    pred = predict_tree(model, X_far)
    assert pred.min() >= lo - 1e-12 and pred.max() <= hi + 1e-12
    # far inputs on a steep line must actually hit the clamp
    assert np.any(pred == lo) and np.any(pred == hi)


def test_depth_and_leaf_size_limits():
    rng = np.random.default_rng(6)
    X = rng.uniform(size=(400, 3))
    y = np.floor(X[:, 0] * 8) + np.floor(X[:, 1] * 4) + 0.05 * rng.normal(size=400)
    params = TreeParams(max_depth=3, min_sample_leaf=7, min_sample_alpha=7, alpha=0.0,
                        allowed_kinds=frozenset({ModelKind.CON, ModelKind.PCON}))
    model = build_tree(X, y, params=params)

    def visit(node):
        if node.left is None:
            assert node.model.kind is ModelKind.CON
            return
        assert node.depth < 3
        for child in (node.left, node.right):
            assert child.case_count >= 7
            visit(child)
        assert node.case_count == node.left.case_count + node.right.case_count

    visit(model.root)


def test_max_model_depth_counts_lin_nodes():
    rng = np.random.default_rng(7)
    X = rng.normal(size=(100, 2))
    y = X[:, 0] + X[:, 1]
    model = build_tree(X, y, params=TreeParams(max_model_depth=1))
    # one model may be fitted, its continuation must be a leaf
    node = model.root
    if node.model.kind is ModelKind.LIN:
        assert node.left.model.kind is ModelKind.CON


def test_build_is_deterministic():
    rng = np.random.default_rng(8)
    X = rng.normal(size=(150, 3))
    y = X[:, 0] ** 2 + rng.normal(size=150)
    a = tree_to_dict(build_tree(X, y))
    b = tree_to_dict(build_tree(X, y))
    assert json.dumps(a, sort_keys=True) == json.dumps(b, sort_keys=True)


def test_serialization_round_trip():
    rng = np.random.default_rng(9)
    X = rng.normal(size=(120, 3))
    X[:, 2] = rng.integers(0, 4, size=120)
    y = X[:, 0] + (X[:, 2] == 2) * 3.0 + 0.1 * rng.normal(size=120)
    model = build_tree(X, y, col_kinds=(NUMERIC, NUMERIC, CATEGORICAL))
    doc = tree_to_dict(model)
    clone = tree_from_dict(json.loads(json.dumps(doc)))
    X_new = rng.normal(size=(60, 3))
    X_new[:, 2] = rng.integers(0, 5, size=60)  # includes an unseen category
    np.testing.assert_array_equal(predict_tree(model, X_new), predict_tree(clone, X_new))
    assert json.dumps(tree_to_dict(clone), sort_keys=True) == json.dumps(doc, sort_keys=True)


def test_unseen_category_routed_to_larger_child():
    # 30 cases of category 0, 10 of category 1; an unseen category must
    # follow the larger (category 0) side
    codes = np.array([0.0] * 30 + [1.0] * 10)
    y = np.where(codes == 0.0, 5.0, -5.0)
    X = codes.reshape(-1, 1)
    model = build_tree(
        X, y, col_kinds=(CATEGORICAL,), params=TreeParams(min_sample_leaf=5, min_sample_alpha=5)
    )
    pred_seen0 = predict_tree(model, np.array([[0.0]]))[0]
    pred_unseen = predict_tree(model, np.array([[7.0]]))[0]
    assert pred_unseen == pytest.approx(pred_seen0)


def test_cart_mode_matches_greedy_oracle_small():
    rng = np.random.default_rng(10)
    done = 0
    while done < 8:
        n = int(rng.integers(20, 50))
        p = int(rng.integers(1, 4))
        X = rng.normal(size=(n, p))
        y = rng.normal(size=n) + 2.0 * (X[:, 0] > 0)
        want, tied = cart_oracle_predict(X, y, X, max_depth=3, report_ties=True)
        if tied:  # order-dependent greedy choice, not comparable
            continue
        params = cart_tree_params(max_depth=3)
        model = fit_cart_tree(X, y, params=params)
        np.testing.assert_allclose(predict_tree(model, X), want, atol=1e-10)
        done += 1


def test_constant_target():
    X = np.arange(20, dtype=float).reshape(-1, 1)
    y = np.full(20, 4.5)
    model = build_tree(X, y)
    np.testing.assert_allclose(predict_tree(model, X), y, atol=1e-12)
    assert model.half_range == 0.0


def test_zero_variance_feature_column():
    rng = np.random.default_rng(12)
    X = np.column_stack([np.ones(50), rng.normal(size=50)])
    y = 2.0 * X[:, 1] + 0.1 * rng.normal(size=50)
    model = build_tree(X, y)
    assert float(np.mean((predict_tree(model, X) - y) ** 2)) < 0.1


def test_invalid_inputs():
    X = np.ones((5, 2))
    y = np.ones(5)
    with pytest.raises(ConfigurationError):
        build_tree(X, y)  # fewer rows than min_sample_fit
    with pytest.raises(ValueError):
        build_tree(np.ones((20, 2)), np.ones(20), col_kinds=(NUMERIC,))
    with pytest.raises(ConfigurationError):
        TreeParams(alpha=2.0)
    with pytest.raises(ConfigurationError):
        TreeParams(min_sample_leaf=0)
    with pytest.raises(ConfigurationError):
        TreeParams(min_sample_alpha=2, min_sample_leaf=5)
    with pytest.raises(ConfigurationError):
        TreeParams(allowed_kinds=frozenset({ModelKind.LIN}))


def test_predict_wrong_width_raises():
    rng = np.random.default_rng(13)
    X = rng.normal(size=(30, 2))
    model = build_tree(X, X[:, 0])
    with pytest.raises(ValueError):
        predict_tree(model, np.ones((4, 3)))


def test_residual_cascade_telescopes_to_training_fit():
    # without truncation pressure, path accumulation reproduces the exact
    # greedy fit: the training prediction plus the final residual equals y.
    rng = np.random.default_rng(14)
    X = rng.normal(size=(200, 2))
    y = np.abs(X[:, 0]) + 0.05 * rng.normal(size=200)
    params = TreeParams()
    model = build_tree(X, y, params=params, truncation_factor=math.inf)
    pred = predict_tree(model, X)

    # recompute the greedy fit's leaf residuals by walking training rows
    def leaf_residuals(node, rows, res):
        m = node.model
        if m.kind is ModelKind.CON:
            res[rows] -= m.coef_left[0]
            return
        if m.kind is ModelKind.LIN:
            a, b = m.coef_left
            res[rows] -= a + b * X[rows, m.feature]
            leaf_residuals(node.left, rows, res)
            return
        mask = X[rows, m.feature] <= m.split
        a, b = m.coef_left
        res[rows[mask]] -= a + b * X[rows[mask], m.feature]
        a, b = m.coef_right
        res[rows[~mask]] -= a + b * X[rows[~mask], m.feature]
        leaf_residuals(node.left, rows[mask], res)
        leaf_residuals(node.right, rows[~mask], res)

    res = y - model.center
    leaf_residuals(model.root, np.arange(200), res)
    np.testing.assert_allclose(pred + res, y, atol=1e-9)


def test_forest_member_params_disable_blin():
    params = TreeParams.forest_member()
    assert ModelKind.BLIN not in params.allowed_kinds
    assert params.alpha == 0.5


def test_from_dict_rejects_unknown_format():
    with pytest.raises(ValueError):
        tree_from_dict({"format": "other"})
