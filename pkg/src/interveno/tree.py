"""CART regression trees with exhaustive variance-reduction split search."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional, Sequence, Union

import numpy as np


@dataclass(frozen=True)
class TreeParams:
    max_depth: int = 8
    min_samples_leaf: int = 1

    def __post_init__(self):
        if self.max_depth < 1:
            raise ValueError("max_depth must be >= 1")
        if self.min_samples_leaf < 1:
            raise ValueError("min_samples_leaf must be >= 1")


@dataclass
class Leaf:
    value: float


@dataclass
class Split:
    feature: int
    threshold: float
    left: "Node"
    right: "Node"


Node = Union[Leaf, Split]

# Called once per split attempt, in pre-order DFS (left child first); returns
# the candidate feature indices for that node.
FeaturePicker = Callable[[], Sequence[int]]


@dataclass
class RegressionTree:
    root: Node
    n_features: int

    def predict(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        if X.shape[0] == 1:  # recursive forecasting predicts one day at a time
            return np.array([self.predict_one(X[0])])
        out = np.empty(X.shape[0])
        self._fill(self.root, X, np.arange(X.shape[0]), out)
        return out

    def predict_one(self, x: np.ndarray) -> float:
        node = self.root
        while isinstance(node, Split):
            node = node.left if x[node.feature] <= node.threshold else node.right
        return node.value

    def _fill(self, node: Node, X: np.ndarray, idx: np.ndarray, out: np.ndarray):
        if isinstance(node, Leaf):
            out[idx] = node.value
            return
        go_left = X[idx, node.feature] <= node.threshold
        self._fill(node.left, X, idx[go_left], out)
        self._fill(node.right, X, idx[~go_left], out)


def _best_split(
    X: np.ndarray, y: np.ndarray, features: Sequence[int], min_leaf: int
) -> Optional[tuple[int, float]]:
    """Best (feature, threshold) by weighted variance reduction.

    Candidates are midpoints between consecutive distinct sorted values; a
    candidate is legal only when both sides keep min_leaf samples. The score
    (sum_l*n_r - sum_r*n_l)^2 / (n_l*n_r) orders candidates identically to
    variance reduction within a node and is zero exactly when the side means
    are equal. Ties break to the lowest feature index, then lowest threshold.
    """
    n = y.shape[0]
    total = float(y.sum())
    counts = np.arange(1, n, dtype=float)
    best_score = 0.0
    best: Optional[tuple[int, float]] = None
    for j in features:
        xj = X[:, j]
        order = np.argsort(xj, kind="stable")
        xs = xj[order]
        valid = xs[1:] > xs[:-1]
        if min_leaf > 1:
            valid &= (counts >= min_leaf) & (n - counts >= min_leaf)
        if not valid.any():
            continue
        sum_l = np.cumsum(y[order])[:-1]
        num = sum_l * (n - counts) - (total - sum_l) * counts
        score = np.where(valid, num * num / (counts * (n - counts)), -1.0)
        pos = int(np.argmax(score))
        s = float(score[pos])
        if s > best_score:
            thr = (xs[pos] + xs[pos + 1]) / 2.0
            if thr >= xs[pos + 1]:  # adjacent floats can round the midpoint up
                thr = float(xs[pos])
            best_score = s
            best = (j, float(thr))
    return best


def _grow(
    X: np.ndarray,
    y: np.ndarray,
    idx: np.ndarray,
    depth: int,
    params: TreeParams,
    picker: Optional[FeaturePicker],
) -> Node:
    yn = y[idx]
    if (
        depth >= params.max_depth
        or idx.shape[0] < 2 * params.min_samples_leaf
        or np.all(yn == yn[0])
    ):
        return Leaf(float(yn.mean()))
    features = picker() if picker is not None else range(X.shape[1])
    found = _best_split(X[idx], yn, features, params.min_samples_leaf)
    if found is None:
        return Leaf(float(yn.mean()))
    feature, threshold = found
    go_left = X[idx, feature] <= threshold
    left = _grow(X, y, idx[go_left], depth + 1, params, picker)
    right = _grow(X, y, idx[~go_left], depth + 1, params, picker)
    return Split(feature=feature, threshold=threshold, left=left, right=right)


def fit_tree(
    X: np.ndarray,
    y: np.ndarray,
    params: TreeParams,
    feature_picker: Optional[FeaturePicker] = None,
) -> RegressionTree:
    """Grow a CART tree; degenerate inputs collapse to a single leaf."""
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    root = _grow(X, y, np.arange(X.shape[0]), 0, params, feature_picker)
    return RegressionTree(root=root, n_features=X.shape[1])
