"""Ridge linear regression on standardized features with unpenalized intercept."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import SingularSystem


@dataclass(frozen=True)
class LinearParams:
    ridge_lambda: float = 1.0

    def __post_init__(self):
        if self.ridge_lambda < 0:
            raise ValueError("ridge_lambda must be >= 0")


@dataclass
class LinearModel:
    slopes: np.ndarray  # original-space coefficients, (d,)
    intercept: float
    n_features: int

    def predict(self, X: np.ndarray) -> np.ndarray:
        return X @ self.slopes + self.intercept


def ridge_fit(X: np.ndarray, y: np.ndarray, ridge_lambda: float) -> LinearModel:
    """Solve (Z'Z + lambda*I) beta = Z'(y - ybar) on z-scored features; the
    intercept is recovered unpenalized. Columns with zero variance carry a
    zero coefficient (and make the lambda=0 system singular)."""
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    n, d = X.shape
    mu = X.mean(axis=0)
    sigma = X.std(axis=0)
    safe = np.where(sigma > 0, sigma, 1.0)
    Z = (X - mu) / safe
    y_mean = float(y.mean())
    yc = y - y_mean

    A = Z.T @ Z + ridge_lambda * np.eye(d)
    if ridge_lambda == 0.0 and (d > 0 and np.linalg.matrix_rank(A) < d):
        raise SingularSystem("X'X is rank-deficient and lambda = 0")
    beta = np.linalg.solve(A, Z.T @ yc) if d > 0 else np.zeros(0)

    slopes = beta / safe
    intercept = y_mean - float(slopes @ mu)
    return LinearModel(slopes=slopes, intercept=intercept, n_features=d)


def fit_linear(X: np.ndarray, y: np.ndarray, params: LinearParams) -> LinearModel:
    return ridge_fit(X, y, params.ridge_lambda)
