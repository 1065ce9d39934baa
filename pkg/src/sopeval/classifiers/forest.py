"""Random forest of axis-aligned decision trees: Gini impurity splits over a
random feature subset per node, one bootstrap sample per tree, majority-vote
prediction with ties broken toward rejected (-1)."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import ModelError


@dataclass(frozen=True)
class TreeNode:
    feature: int | None = None
    threshold: float | None = None
    left: "TreeNode | None" = None
    right: "TreeNode | None" = None
    prediction: int | None = None

    @property
    def is_leaf(self) -> bool:
        return self.feature is None


@dataclass(frozen=True)
class ForestModel:
    trees: tuple
    tree_seeds: tuple
    n_features: int
    max_depth: int | None
    features_per_split: int


def gini(y: np.ndarray) -> float:
    """1 - sum of squared class proportions for +/-1 labels."""
    n = len(y)
    if n == 0:
        return 0.0
    p_pos = np.count_nonzero(y == 1) / n
    return float(1.0 - p_pos * p_pos - (1.0 - p_pos) * (1.0 - p_pos))


def _majority(y: np.ndarray) -> int:
    pos = np.count_nonzero(y == 1)
    return 1 if pos * 2 > len(y) else -1


def _best_split(X: np.ndarray, y: np.ndarray, feature_ids) -> tuple:
    """Lowest weighted child Gini over midpoint thresholds of the candidate
    features; ties keep the first candidate examined."""
    n = len(y)
    best = (np.inf, None, None)
    total_pos = np.count_nonzero(y == 1)
    for f in feature_ids:
        order = np.argsort(X[:, f], kind="stable")
        values = X[order, f]
        labels = y[order]
        pos_cum = np.cumsum(labels == 1)
        for i in range(n - 1):
            if values[i + 1] <= values[i]:
                continue
            n_l = i + 1
            n_r = n - n_l
            pos_l = pos_cum[i]
            pos_r = total_pos - pos_l
            p_l = pos_l / n_l
            p_r = pos_r / n_r
            cost = (
                n_l * (1.0 - p_l * p_l - (1.0 - p_l) * (1.0 - p_l))
                + n_r * (1.0 - p_r * p_r - (1.0 - p_r) * (1.0 - p_r))
            ) / n
            if cost < best[0]:
                best = (cost, int(f), float((values[i] + values[i + 1]) / 2.0))
    return best


def _build_tree(X, y, rng, max_depth, features_per_split, depth=0) -> TreeNode:
    if gini(y) == 0.0 or len(y) < 2 or (max_depth is not None and depth >= max_depth):
        return TreeNode(prediction=_majority(y))
    d = X.shape[1]
    m = min(features_per_split, d)
    feature_ids = rng.choice(d, size=m, replace=False)
    _, feature, threshold = _best_split(X, y, feature_ids)
    if feature is None:
        return TreeNode(prediction=_majority(y))
    goes_left = X[:, feature] < threshold
    return TreeNode(
        feature=feature,
        threshold=threshold,
        left=_build_tree(X[goes_left], y[goes_left], rng, max_depth, features_per_split, depth + 1),
        right=_build_tree(
            X[~goes_left], y[~goes_left], rng, max_depth, features_per_split, depth + 1
        ),
    )


def train_rfdt(
    X,
    y,
    n_trees: int = 100,
    max_depth: int | None = None,
    features_per_split: int | None = None,
    seed: int = 0,
) -> ForestModel:
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if X.ndim != 2 or len(y) != len(X):
        raise ModelError("training data must be a 2-d matrix with one label per row")
    if not np.all(np.isfinite(X)):
        raise ModelError("training features contain non-finite values")
    if not set(np.unique(y)) <= {-1.0, 1.0}:
        raise ModelError("labels must be +1/-1")
    if len(set(np.unique(y))) < 2:
        raise ModelError("training data contains a single class")
    if n_trees < 1:
        raise ModelError(f"n_trees must be >= 1, got {n_trees}")

    d = X.shape[1]
    m = features_per_split if features_per_split is not None else max(1, int(round(np.sqrt(d))))
    master = np.random.default_rng(seed)
    tree_seeds = tuple(int(s) for s in master.integers(0, 2**31 - 1, size=n_trees))

    y_int = y.astype(np.int64)
    trees = []
    for tree_seed in tree_seeds:
        rng = np.random.default_rng(tree_seed)
        idx = rng.integers(0, len(X), size=len(X))
        trees.append(_build_tree(X[idx], y_int[idx], rng, max_depth, m))
    return ForestModel(
        trees=tuple(trees),
        tree_seeds=tree_seeds,
        n_features=d,
        max_depth=max_depth,
        features_per_split=m,
    )


def _predict_tree(node: TreeNode, x: np.ndarray) -> int:
    while not node.is_leaf:
        node = node.left if x[node.feature] < node.threshold else node.right
    return node.prediction


def decision_function(model: ForestModel, X) -> np.ndarray:
    """Mean tree vote in [-1, 1]; 0 means an exact tie (resolved to rejected
    by the shared sign rule)."""
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    if X.shape[1] != model.n_features:
        raise ModelError(
            f"feature dimension {X.shape[1]} does not match model dimension {model.n_features}"
        )
    votes = np.array([[_predict_tree(t, x) for t in model.trees] for x in X], dtype=np.float64)
    return votes.mean(axis=1)
