"""Interpretability: permutation importance, partial dependence, and a
time-decayed, case-weighted local linear surrogate (LIME variant)."""
from __future__ import annotations

import math
from dataclasses import dataclass
from datetime import date
from typing import Callable, Optional, Sequence, Union

import numpy as np

from .backtest import r_squared
from .ensemble import ModelArtifact, predict
from .errors import (
    EmptyExplanation,
    SingularSystem,
    TooShortSeries,
    UnknownColumn,
    UnknownDate,
)
from .features import FeatureMatrix
from .rng import Stream

DONOR_WINDOW_DAYS = 56  # perturbations resample from the last 8 weeks
CASE_WEIGHT_COLUMN = "new_cases_lag1"

BlackBox = Union[ModelArtifact, Callable[[np.ndarray], np.ndarray]]


@dataclass(frozen=True)
class LimeConfig:
    n_samples: int = 1000
    kernel_width: Optional[float] = None  # None: 0.75 * sqrt(n feature columns)
    recency_halflife_days: float = 14.0
    case_weight_floor: float = 0.1
    surrogate_ridge: float = 1e-3
    seed: int = 0

    def __post_init__(self):
        if self.n_samples < 100:
            raise ValueError("n_samples must be >= 100")
        if self.kernel_width is not None and self.kernel_width <= 0:
            raise ValueError("kernel_width must be positive")
        if self.recency_halflife_days <= 0:
            raise ValueError("recency_halflife_days must be positive")
        if self.case_weight_floor < 0:
            raise ValueError("case_weight_floor must be >= 0")
        if self.surrogate_ridge < 0:
            raise ValueError("surrogate_ridge must be >= 0")


@dataclass
class Explanation:
    target_date: date
    contributions: list[tuple[str, float]]  # sorted by |weight| descending
    intercept: float
    fidelity_r2: float
    method: str

    def __post_init__(self):
        self.contributions = sorted(
            self.contributions, key=lambda item: (-abs(item[1]), item[0])
        )
        if self.fidelity_r2 > 1.0:
            raise ValueError("fidelity r^2 cannot exceed 1")

    def to_json(self) -> dict:
        return {
            "target_date": self.target_date.isoformat(),
            "contributions": [[name, w] for name, w in self.contributions],
            "intercept": self.intercept,
            "fidelity_r2": self.fidelity_r2,
            "method": self.method,
        }


def _call(model: BlackBox, X: np.ndarray) -> np.ndarray:
    if callable(model):
        return np.asarray(model(X), dtype=float)
    return predict(model, X)


def permutation_importance(
    artifact: ModelArtifact,
    X: np.ndarray,
    y: np.ndarray,
    n_repeats: int = 5,
    seed: int = 0,
) -> list[tuple[str, float]]:
    """Mean r² drop per column over independent shuffles, sorted descending.

    Stream (seed, column*n_repeats + repeat) drives each shuffle, so every
    (column, repeat) cell is reproducible in isolation.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    if X.shape[0] < 10:
        raise TooShortSeries("permutation importance needs at least 10 rows")
    if n_repeats < 1:
        raise ValueError("n_repeats must be >= 1")
    baseline = r_squared(y, predict(artifact, X))
    n = X.shape[0]
    drops = []
    for j, name in enumerate(artifact.feature_schema.column_names):
        scores = []
        for r in range(n_repeats):
            order = Stream(seed, j * n_repeats + r).shuffled(n)
            Xp = X.copy()
            Xp[:, j] = X[np.asarray(order), j]
            scores.append(r_squared(y, predict(artifact, Xp)))
        drops.append((name, baseline - float(np.mean(scores))))
    return sorted(drops, key=lambda item: (-item[1], item[0]))


def partial_dependence(
    artifact: ModelArtifact,
    X: np.ndarray,
    feature: str,
    grid: Sequence[float],
) -> list[tuple[float, float]]:
    """Mean prediction with one column clamped to each grid value in turn."""
    X = np.asarray(X, dtype=float)
    names = artifact.feature_schema.column_names
    if feature not in names:
        raise UnknownColumn(feature)
    j = names.index(feature)
    out = []
    for v in grid:
        Xv = X.copy()
        Xv[:, j] = float(v)
        out.append((float(v), float(np.mean(predict(artifact, Xv)))))
    return out


def _weighted_ridge(
    X: np.ndarray, y: np.ndarray, w: np.ndarray, lam: float
) -> tuple[np.ndarray, float]:
    """Original-space coefficients of a weight-w ridge with free intercept."""
    total = float(w.sum())
    x_mean = (w @ X) / total
    y_mean = float(w @ y) / total
    Xc = X - x_mean
    yc = y - y_mean
    A = Xc.T @ (Xc * w[:, None]) + lam * np.eye(X.shape[1])
    if lam == 0.0 and np.linalg.matrix_rank(A) < X.shape[1]:
        raise SingularSystem("weighted design is rank-deficient and lambda = 0")
    beta = np.linalg.solve(A, Xc.T @ (w * yc))
    return beta, y_mean - float(beta @ x_mean)


def lime_explain(
    model: BlackBox,
    context: FeatureMatrix,
    instance_date: date,
    config: LimeConfig = LimeConfig(),
) -> Explanation:
    """Fit a locally weighted linear surrogate around one context row.

    Perturbations resample every feature from its empirical values over the
    last 56 context days, so ordinal policy levels stay valid levels. Sample
    weight = kernel(standardized distance) * 2^(-donor age / halflife) *
    max(floor, relative case load), the last factor read from the sample's
    lag-1 case feature.
    """
    if instance_date not in context.row_dates:
        raise UnknownDate(instance_date.isoformat())
    inst = context.rows[context.row_dates.index(instance_date)]
    donors = context.rows[-DONOR_WINDOW_DAYS:]
    donor_dates = context.row_dates[-DONOR_WINDOW_DAYS:]
    n_donors, d = donors.shape
    sigma = config.kernel_width if config.kernel_width is not None else 0.75 * math.sqrt(d)

    samples = np.empty((config.n_samples, d))
    ages = np.empty(config.n_samples)
    for i in range(config.n_samples):
        stream = Stream(config.seed, i)
        age_total = 0
        for j in range(d):
            pick = stream.randint(n_donors)
            samples[i, j] = donors[pick, j]
            age_total += abs((donor_dates[pick] - instance_date).days)
        ages[i] = age_total / d

    scale = donors.std(axis=0)
    scale = np.where(scale > 0, scale, 1.0)
    d2 = (((samples - inst) / scale) ** 2).sum(axis=1)
    kernel = np.exp(-d2 / (sigma * sigma))
    recency = np.exp(-math.log(2.0) * ages / config.recency_halflife_days)
    if CASE_WEIGHT_COLUMN in context.column_names:
        col = context.column_names.index(CASE_WEIGHT_COLUMN)
        max_cases = float(donors[:, col].max())
        ratio = samples[:, col] / max_cases if max_cases > 0 else np.ones(config.n_samples)
        case_factor = np.maximum(config.case_weight_floor, ratio)
    else:
        case_factor = np.ones(config.n_samples)
    weights = kernel * recency * case_factor

    preds = _call(model, samples)
    beta, intercept = _weighted_ridge(samples, preds, weights, config.surrogate_ridge)
    surrogate = samples @ beta + intercept
    y_mean = float(weights @ preds) / float(weights.sum())
    ss_res = float(weights @ (preds - surrogate) ** 2)
    ss_tot = float(weights @ (preds - y_mean) ** 2)
    if ss_tot > 0.0:
        fidelity = 1.0 - ss_res / ss_tot
    else:
        fidelity = 1.0 if ss_res == 0.0 else 0.0
    return Explanation(
        target_date=instance_date,
        contributions=list(zip(context.column_names, (float(b) for b in beta))),
        intercept=intercept,
        fidelity_r2=fidelity,
        method="lime",
    )


def most_impactful(explanation: Explanation) -> str:
    """Largest |weight| wins; ties go to the lexicographically smallest name."""
    if not explanation.contributions:
        raise EmptyExplanation("no contributions to rank")
    return min(explanation.contributions, key=lambda item: (-abs(item[1]), item[0]))[0]
