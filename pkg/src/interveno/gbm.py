"""Gradient-boosted regression trees fitting squared-error residuals."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .tree import RegressionTree, TreeParams, fit_tree


@dataclass(frozen=True)
class GbmParams:
    tree: TreeParams = field(default_factory=lambda: TreeParams(max_depth=3))
    n_rounds: int = 100
    learning_rate: float = 0.1

    def __post_init__(self):
        if self.n_rounds < 1:
            raise ValueError("n_rounds must be >= 1")
        if not 0.0 < self.learning_rate <= 1.0:
            raise ValueError("learning_rate must be in (0, 1]")


@dataclass
class GBM:
    base_value: float
    learning_rate: float
    trees: list[RegressionTree]
    n_features: int

    def predict(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        acc = np.full(X.shape[0], self.base_value)
        for tree in self.trees:
            acc += self.learning_rate * tree.predict(X)
        return acc


def fit_gbm(X: np.ndarray, y: np.ndarray, params: GbmParams) -> GBM:
    """F_0 = mean(y); round m fits a tree to y - F_{m-1}(X)."""
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    base = float(y.mean())
    current = np.full(y.shape[0], base)
    trees = []
    for _ in range(params.n_rounds):
        tree = fit_tree(X, y - current, params.tree)
        current = current + params.learning_rate * tree.predict(X)
        trees.append(tree)
    return GBM(
        base_value=base,
        learning_rate=params.learning_rate,
        trees=trees,
        n_features=X.shape[1],
    )
