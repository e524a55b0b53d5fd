import numpy as np
from sklearn.base import clone

from raffle.estimators import (
    CartForestRegressor,
    CartTreeRegressor,
    OlsRegressor,
    PilotRegressor,
    RaffleRegressor,
    RidgeCvRegressor,
)

ESTIMATORS = [
    PilotRegressor(),
    RaffleRegressor(n_estimators=4),
    CartTreeRegressor(),
    CartForestRegressor(n_estimators=4),
    OlsRegressor(),
    RidgeCvRegressor(),
]


def _data(seed=0, n=120):
    rng = np.random.default_rng(seed)
    X = rng.normal(size=(n, 3))
    y = X[:, 0] - 0.5 * X[:, 1] + 0.1 * rng.normal(size=n)
    return X, y


def test_fit_predict_and_score_surface():
    X, y = _data()
    for est in ESTIMATORS:
        fitted = clone(est).fit(X, y)
        pred = fitted.predict(X)
        assert pred.shape == (120,)
        assert fitted.n_features_in_ == 3
        assert fitted.score(X, y) > 0.5


def test_get_set_params_round_trip():
    est = RaffleRegressor(n_estimators=7, alpha=0.25)
    params = est.get_params()
    assert params["n_estimators"] == 7 and params["alpha"] == 0.25
    est.set_params(alpha=0.75)
    assert est.get_params()["alpha"] == 0.75
    # clone preserves hyperparameters
    assert clone(est).get_params() == est.get_params()


def test_random_state_controls_forest():
    X, y = _data(1)
    a = RaffleRegressor(n_estimators=3, random_state=0).fit(X, y).predict(X)
    b = RaffleRegressor(n_estimators=3, random_state=0).fit(X, y).predict(X)
    c = RaffleRegressor(n_estimators=3, random_state=5).fit(X, y).predict(X)
    np.testing.assert_array_equal(a, b)
    assert not np.array_equal(a, c)


def test_categorical_features_argument():
    rng = np.random.default_rng(2)
    codes = rng.integers(0, 3, size=150).astype(float)
    X = np.column_stack([codes, rng.normal(size=150)])
    y = np.where(codes == 1, 4.0, -2.0) + 0.1 * rng.normal(size=150)
    est = PilotRegressor(categorical_features=[0]).fit(X, y)
    assert est.model_.col_kinds == ("cat", "num")
    assert est.score(X, y) > 0.9


def test_ridge_exposes_selected_lambda():
    X, y = _data(3)
    est = RidgeCvRegressor().fit(X, y)
    assert est.lambda_ > 0 or est.lambda_ == 0.0
    assert est.model_.lam == est.lambda_
