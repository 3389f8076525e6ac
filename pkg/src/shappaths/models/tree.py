"""Binary decision trees stored as flat node arrays.

The same structure serves two roles: a standalone Gini-trained classifier
whose leaves hold class-frequency vectors, and the regression trees inside
the boosted ensemble whose leaves hold a single Newton weight. Every node
records its training-sample count (cover); the per-leaf path weights of
the SHAP computation are built from those covers.

Routing convention: a sample goes left iff x[feature] < threshold.
Thresholds are midpoints of the separating gap, so training data never
sits on a boundary.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import DataError, InvalidSpecError

LEAF = -1


@dataclass
class DecisionTree:
    feature: np.ndarray    # (n_nodes,) int, LEAF at leaves
    threshold: np.ndarray  # (n_nodes,) float, nan at leaves
    left: np.ndarray       # (n_nodes,) int, LEAF at leaves
    right: np.ndarray      # (n_nodes,) int, LEAF at leaves
    cover: np.ndarray      # (n_nodes,) float, training samples through the node
    value: np.ndarray      # (n_nodes, value_dim) float, read at leaves
    n_features: int = 0    # width of the training matrix

    @property
    def n_nodes(self) -> int:
        return self.feature.shape[0]

    @property
    def n_classes(self) -> int:
        return self.value.shape[1]

    @property
    def max_depth(self) -> int:
        depth = np.zeros(self.n_nodes, dtype=int)
        for node in range(self.n_nodes):  # parents precede children
            if self.feature[node] != LEAF:
                depth[self.left[node]] = depth[node] + 1
                depth[self.right[node]] = depth[node] + 1
        return int(depth.max())

    def is_leaf(self, node) -> np.ndarray:
        return self.feature[node] == LEAF

    def leaf_ids(self, X: np.ndarray) -> np.ndarray:
        """Index of the unique leaf each row routes to."""
        X = np.atleast_2d(np.asarray(X, dtype=float))
        nodes = np.zeros(X.shape[0], dtype=int)
        active = self.feature[nodes] != LEAF
        while active.any():
            idx = np.flatnonzero(active)
            cur = nodes[idx]
            goes_left = X[idx, self.feature[cur]] < self.threshold[cur]
            nodes[idx] = np.where(goes_left, self.left[cur], self.right[cur])
            active[idx] = self.feature[nodes[idx]] != LEAF
        return nodes

    def predict_margin(self, X: np.ndarray) -> np.ndarray:
        """(n, value_dim) leaf values of the routed rows."""
        return self.value[self.leaf_ids(X)]

    def predict_class(self, X: np.ndarray) -> np.ndarray:
        return np.argmax(self.predict_margin(X), axis=1)

    def expected_value(self) -> np.ndarray:
        """Cover-weighted mean leaf value, i.e. the training-set mean output."""
        leaves = np.flatnonzero(self.feature == LEAF)
        weights = self.cover[leaves] / self.cover[0]
        return weights @ self.value[leaves]

    def validate(self) -> None:
        if (self.cover <= 0).any():
            raise DataError("tree has a zero-cover node")
        for node in range(self.n_nodes):
            if self.feature[node] != LEAF:
                kids = self.cover[self.left[node]] + self.cover[self.right[node]]
                if abs(kids - self.cover[node]) > 1e-9 * max(1.0, self.cover[node]):
                    raise DataError(f"cover mismatch at node {node}")


class _TreeBuilder:
    """Accumulates nodes in preorder; children patched in after recursion."""

    def __init__(self, value_dim: int):
        self.feature: list[int] = []
        self.threshold: list[float] = []
        self.left: list[int] = []
        self.right: list[int] = []
        self.cover: list[float] = []
        self.value: list[np.ndarray] = []
        self.value_dim = value_dim

    def add(self, cover: float, value: np.ndarray) -> int:
        self.feature.append(LEAF)
        self.threshold.append(np.nan)
        self.left.append(LEAF)
        self.right.append(LEAF)
        self.cover.append(float(cover))
        self.value.append(np.asarray(value, dtype=float))
        return len(self.feature) - 1

    def make_internal(self, node: int, feature: int, threshold: float,
                      left: int, right: int) -> None:
        self.feature[node] = feature
        self.threshold[node] = threshold
        self.left[node] = left
        self.right[node] = right

    def build(self, n_features: int) -> DecisionTree:
        return DecisionTree(
            feature=np.array(self.feature, dtype=int),
            threshold=np.array(self.threshold, dtype=float),
            left=np.array(self.left, dtype=int),
            right=np.array(self.right, dtype=int),
            cover=np.array(self.cover, dtype=float),
            value=np.vstack(self.value).reshape(len(self.feature), self.value_dim),
            n_features=n_features,
        )


def best_split(X: np.ndarray, gain_fn) -> tuple[int, float, float] | None:
    """Best (feature, threshold, gain) over all midpoint splits, or None.

    ``gain_fn(order, distinct)`` receives the per-column sort order and a
    mask of split positions whose neighboring sorted values differ; it
    returns a gain matrix with -inf at disallowed positions. Ties resolve
    to the lowest feature index, then the lowest threshold.
    """
    m, p = X.shape
    if m < 2:
        return None
    order = np.argsort(X, axis=0, kind="stable")
    sorted_x = np.take_along_axis(X, order, axis=0)
    distinct = sorted_x[:-1] != sorted_x[1:]
    if not distinct.any():
        return None
    gains = gain_fn(order, distinct)
    best = gains.max()
    if not np.isfinite(best) or best <= 0.0:
        return None
    where = np.argwhere(gains == best)
    feat = int(where[:, 1].min())
    pos = int(where[where[:, 1] == feat][:, 0].min())
    threshold = 0.5 * (sorted_x[pos, feat] + sorted_x[pos + 1, feat])
    return feat, float(threshold), float(best)


def train_tree(train, max_depth: int = 7, min_leaf: int = 1) -> DecisionTree:
    """Greedy CART fit by Gini impurity; leaves hold class-frequency vectors.

    The reported margins are the leaf probability vectors themselves.
    Splitting stops on purity, depth, or when no split with positive gain
    keeps ``min_leaf`` samples on both sides.
    """
    if max_depth < 0 or min_leaf < 1:
        raise InvalidSpecError("max_depth must be >= 0 and min_leaf >= 1")
    if train.n < 2 * min_leaf:
        raise DataError(f"need at least {2 * min_leaf} rows, got {train.n}")
    X, y, k = train.features, train.labels, train.k
    builder = _TreeBuilder(value_dim=k)

    def node_value(rows):
        return np.bincount(y[rows], minlength=k) / rows.size

    def gini_gains(rows):
        yr = y[rows]

        def gain_fn(order, distinct):
            m = rows.size
            n_left = np.arange(1, m, dtype=float)[:, None]
            n_right = m - n_left
            sq_left = np.zeros((m - 1, order.shape[1]))
            sq_right = np.zeros((m - 1, order.shape[1]))
            for c in range(k):
                cum = np.cumsum(yr[order] == c, axis=0).astype(float)
                sq_left += cum[:-1] ** 2
                sq_right += (cum[-1] - cum[:-1]) ** 2
            child = (n_left - sq_left / n_left + n_right - sq_right / n_right) / m
            parent = 1.0 - np.sum((np.bincount(yr, minlength=k) / m) ** 2)
            gains = parent - child
            gains[~distinct] = -np.inf
            gains[: min_leaf - 1] = -np.inf
            gains[gains.shape[0] + 1 - min_leaf:] = -np.inf
            return gains

        return gain_fn

    def grow(rows: np.ndarray, depth: int) -> int:
        node = builder.add(rows.size, node_value(rows))
        if depth >= max_depth or rows.size < 2 * min_leaf:
            return node
        if np.unique(y[rows]).size == 1:
            return node
        found = best_split(X[rows], gini_gains(rows))
        if found is None:
            return node
        feat, threshold, _ = found
        goes_left = X[rows, feat] < threshold
        left = grow(rows[goes_left], depth + 1)
        right = grow(rows[~goes_left], depth + 1)
        builder.make_internal(node, feat, threshold, left, right)
        return node

    grow(np.arange(train.n), 0)
    return builder.build(train.p)


def leaf_id(model: DecisionTree, x) -> int:
    """The leaf node index a single sample routes to."""
    return int(model.leaf_ids(np.atleast_2d(x))[0])
