"""Gradient boosting: staged definition and exact-fit behavior."""
from __future__ import annotations

import numpy as np
import pytest

from interveno.gbm import GBM, GbmParams, fit_gbm
from interveno.rng import Stream
from interveno.tree import Leaf, TreeParams, fit_tree


def distinct_rows(seed, n=12, d=2):
    rng = Stream(seed)
    X = np.array([[rng.normal() for _ in range(d)] for _ in range(n)])
    y = np.array([rng.normal() for _ in range(n)])
    return X, y


def test_prediction_unrolls_to_staged_sum():
    X, y = distinct_rows(0)
    params = GbmParams(tree=TreeParams(max_depth=2), n_rounds=5, learning_rate=0.3)
    model = fit_gbm(X, y, params)
    manual = np.full(len(y), model.base_value)
    for tree in model.trees:
        manual += params.learning_rate * tree.predict(X)
    assert np.array_equal(model.predict(X), manual)


def test_first_round_fits_residual_from_mean():
    X, y = distinct_rows(1)
    params = GbmParams(tree=TreeParams(max_depth=2), n_rounds=1, learning_rate=1.0)
    model = fit_gbm(X, y, params)
    reference = fit_tree(X, y - y.mean(), TreeParams(max_depth=2))
    assert np.array_equal(model.trees[0].predict(X), reference.predict(X))
    assert model.base_value == float(y.mean())


def test_full_rate_deep_trees_fit_distinct_rows_exactly():
    X, y = distinct_rows(2, n=16)
    params = GbmParams(tree=TreeParams(max_depth=16), n_rounds=3, learning_rate=1.0)
    model = fit_gbm(X, y, params)
    rmse = float(np.sqrt(np.mean((model.predict(X) - y) ** 2)))
    assert rmse < 1e-9


def test_training_residuals_shrink_monotonically():
    X, y = distinct_rows(3, n=40, d=3)
    params = GbmParams(tree=TreeParams(max_depth=2), n_rounds=30, learning_rate=0.2)
    model = fit_gbm(X, y, params)
    current = np.full(len(y), model.base_value)
    losses = [float(np.mean((y - current) ** 2))]
    for tree in model.trees:
        current = current + params.learning_rate * tree.predict(X)
        losses.append(float(np.mean((y - current) ** 2)))
    assert all(b <= a + 1e-12 for a, b in zip(losses, losses[1:]))
    assert losses[-1] < losses[0]


def test_constant_target_stays_at_mean():
    X = np.arange(10, dtype=float).reshape(-1, 1)
    y = np.full(10, 2.5)
    model = fit_gbm(X, y, GbmParams(n_rounds=4, learning_rate=0.5))
    assert all(isinstance(t.root, Leaf) for t in model.trees)
    assert np.array_equal(model.predict(X), y)


def test_same_inputs_reproduce_bit_identically():
    X, y = distinct_rows(4, n=30, d=3)
    params = GbmParams(tree=TreeParams(max_depth=3), n_rounds=10, learning_rate=0.1)
    a = fit_gbm(X, y, params)
    b = fit_gbm(X, y, params)
    assert np.array_equal(a.predict(X), b.predict(X))


def test_learning_rate_scales_first_correction():
    X, y = distinct_rows(5)
    slow = fit_gbm(X, y, GbmParams(tree=TreeParams(max_depth=2), n_rounds=1, learning_rate=0.1))
    fast = fit_gbm(X, y, GbmParams(tree=TreeParams(max_depth=2), n_rounds=1, learning_rate=1.0))
    # Round 1 fits the same residual tree; only the applied step differs.
    step_slow = slow.predict(X) - slow.base_value
    step_fast = fast.predict(X) - fast.base_value
    assert np.allclose(step_slow * 10.0, step_fast, atol=1e-12)


def test_params_validation():
    with pytest.raises(ValueError):
        GbmParams(n_rounds=0)
    with pytest.raises(ValueError):
        GbmParams(learning_rate=0.0)
    with pytest.raises(ValueError):
        GbmParams(learning_rate=1.2)


def test_gbm_dataclass_shape():
    X, y = distinct_rows(6, n=8)
    model = fit_gbm(X, y, GbmParams(n_rounds=2))
    assert isinstance(model, GBM)
    assert model.n_features == 2
    assert len(model.trees) == 2
