"""Random forest regressor: bagged CART trees with per-split feature subsets."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .rng import Stream
from .tree import RegressionTree, TreeParams, fit_tree


@dataclass(frozen=True)
class ForestParams:
    tree: TreeParams = field(default_factory=TreeParams)
    n_trees: int = 100
    feature_subsample: float = 1.0 / 3.0
    seed: int = 0

    def __post_init__(self):
        if self.n_trees < 1:
            raise ValueError("n_trees must be >= 1")
        if not 0.0 < self.feature_subsample <= 1.0:
            raise ValueError("feature_subsample must be in (0, 1]")


@dataclass
class Forest:
    trees: list[RegressionTree]
    n_features: int

    def predict(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        acc = np.zeros(X.shape[0])
        for tree in self.trees:
            acc += tree.predict(X)
        return acc / len(self.trees)


def fit_forest(
    X: np.ndarray, y: np.ndarray, params: ForestParams, bootstrap: bool = True
) -> Forest:
    """Fit n_trees trees, each reproducible from Stream(seed, tree_index).

    Each tree's stream yields its bootstrap row draws first, then one feature
    subset per split attempt (pre-order, left child first), so trees may fit
    in parallel yet match the sequential result bit for bit. `bootstrap=False`
    is a test hook that trains every tree on the original rows.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    n, d = X.shape
    k = math.ceil(params.feature_subsample * d)
    trees = []
    for t in range(params.n_trees):
        rng = Stream(params.seed, t)
        if bootstrap:
            rows = np.array([rng.randint(n) for _ in range(n)], dtype=int)
        else:
            rows = np.arange(n)
        if k == d:
            picker = None
        else:
            def picker(rng=rng):
                return sorted(rng.sample_without_replacement(d, k))
        trees.append(fit_tree(X[rows], y[rows], params.tree, feature_picker=picker))
    return Forest(trees=trees, n_features=d)
