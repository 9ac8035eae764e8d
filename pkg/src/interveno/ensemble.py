"""Three-model ensemble: holdout tuning, r²-proportional weights, artifacts."""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from datetime import date
from typing import Callable, Sequence, Union

import numpy as np

from .backtest import r_squared
from .errors import SchemaMismatch, TooShortSeries, ZeroVariance
from .features import FeatureMatrix, LagSpec, build_matrix
from .forest import Forest, ForestParams, fit_forest
from .frame import SeriesFrame
from .gbm import GBM, GbmParams, fit_gbm
from .linear import LinearModel, LinearParams, fit_linear
from .tree import TreeParams

BaseModel = Union[LinearModel, Forest, GBM]


@dataclass(frozen=True)
class TuningGrids:
    linear: tuple[LinearParams, ...]
    forest: tuple[ForestParams, ...]
    gbm: tuple[GbmParams, ...]

    def __post_init__(self):
        if not (self.linear and self.forest and self.gbm):
            raise ValueError("every grid needs at least one point")


def default_grids(seed: int = 0) -> TuningGrids:
    return TuningGrids(
        linear=tuple(LinearParams(ridge_lambda=lam) for lam in (0.01, 0.1, 1.0, 10.0)),
        forest=tuple(
            ForestParams(tree=TreeParams(max_depth=depth), n_trees=n, seed=seed)
            for n, depth in itertools.product((100, 300), (4, 8))
        ),
        gbm=tuple(
            GbmParams(tree=TreeParams(max_depth=depth), n_rounds=r, learning_rate=lr)
            for r, lr, depth in itertools.product((100, 300), (0.05, 0.1), (2, 3))
        ),
    )


@dataclass(frozen=True)
class EnsembleConfig:
    linear: LinearParams = LinearParams()
    forest: ForestParams = field(default_factory=ForestParams)
    gbm: GbmParams = field(default_factory=GbmParams)
    val_days: int = 14
    seed: int = 0


@dataclass(frozen=True)
class FeatureSchema:
    column_names: tuple[str, ...]
    controllable: tuple[bool, ...]

    @property
    def width(self) -> int:
        return len(self.column_names)

    @staticmethod
    def from_matrix(matrix: FeatureMatrix) -> "FeatureSchema":
        return FeatureSchema(
            column_names=tuple(matrix.column_names),
            controllable=tuple(matrix.controllable),
        )


@dataclass
class ModelArtifact:
    linear: LinearModel
    forest: Forest
    gbm: GBM
    ensemble_weights: tuple[float, float, float]
    val_r2: tuple[float, float, float]
    feature_schema: FeatureSchema
    target_name: str
    trained_through: date
    hyperparams: EnsembleConfig
    seed: int
    format_version: int = 1

    def __post_init__(self):
        if any(w < 0 for w in self.ensemble_weights):
            raise ValueError("ensemble weights must be nonnegative")
        if abs(sum(self.ensemble_weights) - 1.0) > 1e-12:
            raise ValueError("ensemble weights must sum to 1")
        for m in (self.linear, self.forest, self.gbm):
            if m.n_features != self.feature_schema.width:
                raise ValueError("base model width disagrees with schema")


def _holdout(X: np.ndarray, y: np.ndarray, val_days: int):
    if val_days < 7:
        raise ValueError("val_days must be >= 7")
    if y.shape[0] <= val_days:
        raise TooShortSeries(f"need more than {val_days} rows, have {y.shape[0]}")
    return X[:-val_days], y[:-val_days], X[-val_days:], y[-val_days:]


def _val_score(model: BaseModel, Xv: np.ndarray, yv: np.ndarray) -> float:
    try:
        return r_squared(yv, model.predict(Xv))
    except ZeroVariance:
        return -math.inf


def _best_point(grid: Sequence, fit: Callable, Xf, yf, Xv, yv):
    best_p, best_s = None, -math.inf
    for p in grid:
        s = _val_score(fit(Xf, yf, p), Xv, yv)
        if best_p is None or s > best_s:  # strict: first declared wins ties
            best_p, best_s = p, s
    return best_p


def tune(
    X: np.ndarray, y: np.ndarray, grids: TuningGrids, val_days: int = 14
) -> tuple[LinearParams, ForestParams, GbmParams]:
    """Pick each model's grid point by r² on the last val_days rows."""
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    Xf, yf, Xv, yv = _holdout(X, y, val_days)
    return (
        _best_point(grids.linear, fit_linear, Xf, yf, Xv, yv),
        _best_point(grids.forest, fit_forest, Xf, yf, Xv, yv),
        _best_point(grids.gbm, fit_gbm, Xf, yf, Xv, yv),
    )


def fit_ensemble(matrix: FeatureMatrix, config: EnsembleConfig) -> ModelArtifact:
    """Weight base models by held-out r², then refit them on all rows.

    Weight_i = max(0, val_r2_i) / sum_j max(0, val_r2_j); if no model beats
    the holdout mean, equal thirds. A constant holdout target scores 0.
    """
    X, y = matrix.rows, matrix.target
    Xf, yf, Xv, yv = _holdout(X, y, config.val_days)
    held_out = (
        fit_linear(Xf, yf, config.linear),
        fit_forest(Xf, yf, config.forest),
        fit_gbm(Xf, yf, config.gbm),
    )
    scores = [_val_score(m, Xv, yv) for m in held_out]
    val_r2 = tuple(0.0 if s == -math.inf else s for s in scores)
    clipped = [max(0.0, v) for v in val_r2]
    total = sum(clipped)
    if total > 0.0:
        weights = tuple(c / total for c in clipped)
    else:
        weights = (1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0)
    return ModelArtifact(
        linear=fit_linear(X, y, config.linear),
        forest=fit_forest(X, y, config.forest),
        gbm=fit_gbm(X, y, config.gbm),
        ensemble_weights=weights,
        val_r2=val_r2,
        feature_schema=FeatureSchema.from_matrix(matrix),
        target_name=matrix.target_name,
        trained_through=matrix.row_dates[-1],
        hyperparams=config,
        seed=config.seed,
    )


def train_artifact(
    frame: SeriesFrame,
    target_name: str,
    lag_spec: LagSpec,
    grids: TuningGrids,
    val_days: int = 14,
    seed: int = 0,
) -> ModelArtifact:
    """Lag-expand, tune, and fit one target head end to end."""
    matrix = build_matrix(frame, lag_spec, target_name)
    lp, fp, gp = tune(matrix.rows, matrix.target, grids, val_days)
    config = EnsembleConfig(linear=lp, forest=fp, gbm=gp, val_days=val_days, seed=seed)
    return fit_ensemble(matrix, config)


def predict(model: Union[BaseModel, ModelArtifact], X: np.ndarray) -> np.ndarray:
    """Dispatch to a base model or blend an artifact's heads by weight."""
    X = np.asarray(X, dtype=float)
    if X.ndim != 2:
        raise SchemaMismatch("expected a 2-d design matrix")
    if isinstance(model, ModelArtifact):
        if X.shape[1] != model.feature_schema.width:
            raise SchemaMismatch(
                f"matrix has {X.shape[1]} columns, schema expects {model.feature_schema.width}"
            )
        acc = np.zeros(X.shape[0])
        bases = (model.linear, model.forest, model.gbm)
        for w, m in zip(model.ensemble_weights, bases):
            if w != 0.0:  # zero-weight heads are never evaluated
                acc += w * m.predict(X)
        return acc
    if X.shape[1] != model.n_features:
        raise SchemaMismatch(
            f"matrix has {X.shape[1]} columns, model expects {model.n_features}"
        )
    return model.predict(X)
