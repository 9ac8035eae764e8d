"""Permutation importance, partial dependence, and the local surrogate."""
from __future__ import annotations

from datetime import date, timedelta

import numpy as np
import pytest

from interveno.ensemble import EnsembleConfig, FeatureSchema, ModelArtifact
from interveno.errors import (
    EmptyExplanation,
    TooShortSeries,
    UnknownColumn,
    UnknownDate,
)
from interveno.explain import (
    CASE_WEIGHT_COLUMN,
    DONOR_WINDOW_DAYS,
    Explanation,
    LimeConfig,
    lime_explain,
    most_impactful,
    partial_dependence,
    permutation_importance,
)
from interveno.features import FeatureMatrix
from interveno.forest import Forest
from interveno.gbm import GBM
from interveno.linear import LinearModel
from interveno.rng import Stream
from interveno.tree import Leaf, RegressionTree

D0 = date(2020, 3, 1)


def linear_stub(slopes, names, intercept=0.0):
    width = len(names)
    return ModelArtifact(
        linear=LinearModel(
            slopes=np.asarray(slopes, dtype=float), intercept=intercept, n_features=width
        ),
        forest=Forest(
            trees=[RegressionTree(root=Leaf(0.0), n_features=width)], n_features=width
        ),
        gbm=GBM(base_value=0.0, learning_rate=0.1, trees=[], n_features=width),
        ensemble_weights=(1.0, 0.0, 0.0),
        val_r2=(1.0, 0.0, 0.0),
        feature_schema=FeatureSchema(tuple(names), tuple(False for _ in names)),
        target_name="new_cases",
        trained_through=D0,
        hyperparams=EnsembleConfig(),
        seed=0,
    )


def make_context(n=80, names=("a", "b"), seed=0):
    rng = Stream(seed)
    rows = np.array([[rng.normal() for _ in names] for _ in range(n)])
    if CASE_WEIGHT_COLUMN in names:
        j = names.index(CASE_WEIGHT_COLUMN)
        rows[:, j] = np.abs(rows[:, j]) * 100.0 + 10.0
    return FeatureMatrix(
        rows=rows,
        column_names=list(names),
        controllable=[False] * len(names),
        row_dates=[D0 + timedelta(days=i) for i in range(n)],
        target=np.zeros(n),
        target_name="new_cases",
    )


# ---------------------------------------------------------------------------
# permutation importance


def test_unused_feature_has_exactly_zero_drop():
    art = linear_stub((1.0, 0.0), ("a", "b"))
    rng = Stream(1)
    X = np.array([[rng.normal(), rng.normal()] for _ in range(40)])
    y = X[:, 0].copy()
    drops = dict(permutation_importance(art, X, y))
    assert drops["b"] == 0.0
    assert drops["a"] > 0.5


def test_importance_sorted_descending_by_drop():
    art = linear_stub((3.0, 0.5), ("a", "b"))
    rng = Stream(2)
    X = np.array([[rng.normal(), rng.normal()] for _ in range(50)])
    y = 3.0 * X[:, 0] + 0.5 * X[:, 1]
    ranked = permutation_importance(art, X, y)
    assert [name for name, _ in ranked] == ["a", "b"]
    assert ranked[0][1] >= ranked[1][1]


def test_importance_is_deterministic():
    art = linear_stub((1.0, -2.0), ("a", "b"))
    rng = Stream(3)
    X = np.array([[rng.normal(), rng.normal()] for _ in range(30)])
    y = X @ np.array([1.0, -2.0])
    assert permutation_importance(art, X, y, seed=9) == permutation_importance(
        art, X, y, seed=9
    )


def test_importance_input_validation():
    art = linear_stub((1.0,), ("a",))
    X = np.ones((5, 1))
    with pytest.raises(TooShortSeries):
        permutation_importance(art, X, np.ones(5))
    X = np.arange(20, dtype=float).reshape(-1, 1)
    with pytest.raises(ValueError):
        permutation_importance(art, X, X[:, 0], n_repeats=0)


# ---------------------------------------------------------------------------
# partial dependence


def test_partial_dependence_recovers_linear_slope():
    art = linear_stub((2.0, -1.0), ("a", "b"), intercept=0.5)
    rng = Stream(4)
    X = np.array([[rng.normal(), rng.normal()] for _ in range(60)])
    curve = partial_dependence(art, X, "a", [0.0, 1.0, 2.0])
    values = [v for _, v in curve]
    assert values[1] - values[0] == pytest.approx(2.0, rel=1e-12)
    assert values[2] - values[1] == pytest.approx(2.0, rel=1e-12)


def test_partial_dependence_flat_for_ignored_feature():
    art = linear_stub((2.0, 0.0), ("a", "b"))
    rng = Stream(5)
    X = np.array([[rng.normal(), rng.normal()] for _ in range(40)])
    curve = partial_dependence(art, X, "b", [-1.0, 0.0, 1.0])
    values = [v for _, v in curve]
    assert values[0] == values[1] == values[2]


def test_partial_dependence_single_point_grid():
    art = linear_stub((1.0, 1.0), ("a", "b"))
    X = np.zeros((10, 2))
    curve = partial_dependence(art, X, "a", [3.0])
    assert curve == [(3.0, pytest.approx(3.0))]


def test_partial_dependence_unknown_feature():
    art = linear_stub((1.0,), ("a",))
    with pytest.raises(UnknownColumn):
        partial_dependence(art, np.zeros((5, 1)), "zzz", [0.0])


# ---------------------------------------------------------------------------
# local surrogate


def test_linear_black_box_recovered_across_seeds():
    context = make_context(n=90)
    instance = context.row_dates[-1]

    def black_box(X):
        return 3.0 * X[:, 0] - 2.0 * X[:, 1]

    for seed in range(5):
        exp = lime_explain(black_box, context, instance, LimeConfig(seed=seed))
        weights = dict(exp.contributions)
        assert weights["a"] == pytest.approx(3.0, rel=0.05)
        assert weights["b"] == pytest.approx(-2.0, rel=0.05)
        assert exp.fidelity_r2 >= 0.99


def test_constant_black_box_gives_flat_surrogate():
    context = make_context(n=70)
    exp = lime_explain(
        lambda X: np.full(X.shape[0], 7.0), context, context.row_dates[-1]
    )
    assert all(w == pytest.approx(0.0, abs=1e-9) for _, w in exp.contributions)
    assert exp.intercept == pytest.approx(7.0)
    assert exp.fidelity_r2 == 1.0


def test_same_seed_reproduces_bit_identically():
    context = make_context(n=60)
    f = lambda X: X[:, 0] ** 2  # noqa: E731
    a = lime_explain(f, context, context.row_dates[-1], LimeConfig(seed=4))
    b = lime_explain(f, context, context.row_dates[-1], LimeConfig(seed=4))
    assert a.contributions == b.contributions
    assert a.intercept == b.intercept
    assert a.fidelity_r2 == b.fidelity_r2


def test_seed_changes_the_sample_cloud():
    context = make_context(n=60)
    f = lambda X: X[:, 0] ** 2  # noqa: E731
    a = lime_explain(f, context, context.row_dates[-1], LimeConfig(seed=0))
    b = lime_explain(f, context, context.row_dates[-1], LimeConfig(seed=1))
    assert a.contributions != b.contributions


def test_recency_halflife_changes_weighting_of_nonlinear_fit():
    context = make_context(n=60)
    f = lambda X: X[:, 0] ** 2  # noqa: E731
    short = lime_explain(
        f, context, context.row_dates[-1], LimeConfig(recency_halflife_days=1.0)
    )
    long = lime_explain(
        f, context, context.row_dates[-1], LimeConfig(recency_halflife_days=1000.0)
    )
    assert short.contributions != long.contributions


def test_case_weight_column_participates_when_present():
    context = make_context(n=60, names=(CASE_WEIGHT_COLUMN, "b"))
    f = lambda X: X[:, 1] ** 2  # noqa: E731
    floored = lime_explain(
        f, context, context.row_dates[-1], LimeConfig(case_weight_floor=1.0)
    )
    weighted = lime_explain(
        f, context, context.row_dates[-1], LimeConfig(case_weight_floor=0.0)
    )
    # floor 1 neutralizes the case factor entirely; floor 0 lets it act
    assert floored.contributions != weighted.contributions


def test_surrogate_scales_linearly_with_black_box():
    context = make_context(n=60)
    base = lime_explain(
        lambda X: X[:, 0] + 0.5 * X[:, 1], context, context.row_dates[-1]
    )
    doubled = lime_explain(
        lambda X: 2.0 * (X[:, 0] + 0.5 * X[:, 1]), context, context.row_dates[-1]
    )
    for (name_a, w_a), (name_b, w_b) in zip(
        sorted(base.contributions), sorted(doubled.contributions)
    ):
        assert name_a == name_b
        assert w_b == pytest.approx(2.0 * w_a, rel=1e-9, abs=1e-12)


def test_unknown_instance_date_rejected():
    context = make_context(n=30)
    with pytest.raises(UnknownDate):
        lime_explain(lambda X: X[:, 0], context, date(1999, 1, 1))


def test_instance_need_not_be_inside_donor_window():
    context = make_context(n=DONOR_WINDOW_DAYS + 20)
    exp = lime_explain(
        lambda X: X[:, 0], context, context.row_dates[0], LimeConfig(seed=2)
    )
    assert exp.target_date == context.row_dates[0]


def test_artifact_black_box_accepted(artifact_pair, frame_2020):
    from interveno.features import build_matrix, default_lag_spec

    cases, _ = artifact_pair
    context = build_matrix(frame_2020, default_lag_spec(), "new_cases")
    exp = lime_explain(cases, context, context.row_dates[-1], LimeConfig(n_samples=300))
    assert len(exp.contributions) == context.width
    assert exp.method == "lime"
    assert exp.fidelity_r2 <= 1.0


def test_lime_config_validation():
    with pytest.raises(ValueError):
        LimeConfig(n_samples=50)
    with pytest.raises(ValueError):
        LimeConfig(kernel_width=0.0)
    with pytest.raises(ValueError):
        LimeConfig(recency_halflife_days=0.0)
    with pytest.raises(ValueError):
        LimeConfig(case_weight_floor=-0.1)
    with pytest.raises(ValueError):
        LimeConfig(surrogate_ridge=-1.0)


# ---------------------------------------------------------------------------
# explanation object


def test_contributions_sorted_by_magnitude_then_name():
    exp = Explanation(
        target_date=D0,
        contributions=[("a", 0.5), ("b", -0.9), ("c", 0.9)],
        intercept=0.0,
        fidelity_r2=1.0,
        method="lime",
    )
    assert [name for name, _ in exp.contributions] == ["b", "c", "a"]


def test_fidelity_above_one_rejected():
    with pytest.raises(ValueError):
        Explanation(D0, [("a", 1.0)], 0.0, 1.5, "lime")


def test_most_impactful_prefers_magnitude_then_name():
    exp = Explanation(D0, [("a", 0.5), ("b", -0.9)], 0.0, 1.0, "lime")
    assert most_impactful(exp) == "b"
    tied = Explanation(D0, [("b", -0.5), ("a", 0.5)], 0.0, 1.0, "lime")
    assert most_impactful(tied) == "a"
    single = Explanation(D0, [("only", 0.1)], 0.0, 1.0, "lime")
    assert most_impactful(single) == "only"


def test_most_impactful_requires_contributions():
    with pytest.raises(EmptyExplanation):
        most_impactful(Explanation(D0, [], 0.0, 1.0, "lime"))


def test_explanation_json_shape():
    exp = Explanation(D0, [("a", 0.5)], 1.25, 0.9, "lime")
    payload = exp.to_json()
    assert payload == {
        "target_date": "2020-03-01",
        "contributions": [["a", 0.5]],
        "intercept": 1.25,
        "fidelity_r2": 0.9,
        "method": "lime",
    }
