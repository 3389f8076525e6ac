"""Exact Shapley attributions for tree models in polynomial time.

The value function is the cover-weighted (path-dependent) expectation: to
evaluate a feature coalition, the tree is walked from the root following
the sample's direction at nodes whose feature is in the coalition and
blending both children by their cover fractions elsewhere. The algorithm
tracks, along each root-leaf path, a polynomial over coalition sizes
(extended by one term per distinct path feature, unwound when a feature
repeats or when its contribution is read off), which yields every
feature's exact Shapley weight in one depth-first pass.

Attributions for an ensemble are the learning-rate-scaled sums of the
member trees' attributions; base values are cover-weighted expectations
plus the ensemble's base score, which equal the training-set mean margins
exactly because covers are training counts.
"""

from __future__ import annotations

import numpy as np

from ..errors import DataError
from ..models.boosted import BoostedEnsemble
from ..models.tree import LEAF, DecisionTree
from .tensor import ShapTensor


class _Path:
    """Parallel arrays of (feature, zero fraction, one fraction, weight)."""

    __slots__ = ("d", "z", "o", "w")

    def __init__(self):
        self.d: list[int] = []
        self.z: list[float] = []
        self.o: list[float] = []
        self.w: list[float] = []

    def copy(self) -> "_Path":
        dup = _Path.__new__(_Path)
        dup.d = self.d[:]
        dup.z = self.z[:]
        dup.o = self.o[:]
        dup.w = self.w[:]
        return dup

    def extend(self, pz: float, po: float, pi: int) -> None:
        length = len(self.d)
        self.d.append(pi)
        self.z.append(pz)
        self.o.append(po)
        self.w.append(1.0 if length == 0 else 0.0)
        w = self.w
        for i in range(length - 1, -1, -1):
            w[i + 1] += po * w[i] * (i + 1) / (length + 1)
            w[i] = pz * w[i] * (length - i) / (length + 1)

    def unwound_sum(self, index: int) -> float:
        """Sum of path weights after removing element ``index`` (non-mutating)."""
        last = len(self.d) - 1
        w, z, o = self.w, self.z[index], self.o[index]
        total = 0.0
        if o != 0.0:
            n = w[last]
            for j in range(last - 1, -1, -1):
                tmp = n / ((j + 1) * o)
                total += tmp
                n = w[j] - tmp * z * (last - j)
        else:
            for j in range(last - 1, -1, -1):
                total += w[j] / (z * (last - j))
        return total * (last + 1)


def _shap_single(tree: DecisionTree, x: np.ndarray, phi: np.ndarray) -> None:
    """Accumulate one sample's attributions into phi (p, value_dim)."""
    feature = tree.feature
    threshold = tree.threshold
    left = tree.left
    right = tree.right
    cover = tree.cover
    value = tree.value

    def recurse(node: int, path: _Path, pz: float, po: float, pi: int) -> None:
        path = path.copy()
        path.extend(pz, po, pi)
        if feature[node] == LEAF:
            for i in range(1, len(path.d)):
                weight = path.unwound_sum(i)
                phi[path.d[i]] += weight * (path.o[i] - path.z[i]) * value[node]
            return
        split = feature[node]
        if x[split] < threshold[node]:
            hot, cold = left[node], right[node]
        else:
            hot, cold = right[node], left[node]
        iz = io = 1.0
        for i in range(1, len(path.d)):
            if path.d[i] == split:
                iz, io = path.z[i], path.o[i]
                path = _unwound(path, i)
                break
        recurse(hot, path, iz * cover[hot] / cover[node], io, split)
        recurse(cold, path, iz * cover[cold] / cover[node], 0.0, split)

    recurse(0, _Path(), 1.0, 1.0, -1)


def _unwound(path: _Path, index: int) -> _Path:
    """A copy of the path with element ``index`` removed."""
    out = path.copy()
    last = len(out.d) - 1
    w, z, o = out.w, out.z[index], out.o[index]
    n = w[last]
    if o != 0.0:
        for j in range(last - 1, -1, -1):
            t = w[j]
            w[j] = n * (last + 1) / ((j + 1) * o)
            n = t - w[j] * z * (last - j) / (last + 1)
    else:
        for j in range(last - 1, -1, -1):
            w[j] = w[j] * (last + 1) / (z * (last - j))
    for j in range(index, last):
        out.d[j] = out.d[j + 1]
        out.z[j] = out.z[j + 1]
        out.o[j] = out.o[j + 1]
    del out.d[last], out.z[last], out.o[last], out.w[last]
    return out


def shap_values_tree(tree: DecisionTree, X: np.ndarray,
                     n_features: int | None = None) -> np.ndarray:
    """(n, p, value_dim) attributions of a single tree."""
    tree.validate()
    X = np.atleast_2d(np.asarray(X, dtype=float))
    p = X.shape[1] if n_features is None else n_features
    out = np.zeros((X.shape[0], p, tree.value.shape[1]))
    for i in range(X.shape[0]):
        _shap_single(tree, X[i], out[i])
    return out


def tree_shap(model, X: np.ndarray, feature_names=None, class_names=None,
              sample_ids=None) -> ShapTensor:
    """Exact path-dependent SHAP tensor for a tree or boosted ensemble."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    n, p = X.shape
    if isinstance(model, DecisionTree):
        if model.n_features != p:
            raise DataError(f"model expects {model.n_features} features, data has {p}")
        values = shap_values_tree(model, X, n_features=p)
        base = model.expected_value()
        kind = "tree"
    elif isinstance(model, BoostedEnsemble):
        if model.n_features != p:
            raise DataError(f"model expects {model.n_features} features, data has {p}")
        k = model.n_classes
        values = np.zeros((n, p, k))
        base = model.base_score.copy()
        eta = model.learning_rate
        for round_trees in model.rounds:
            for c, tree in enumerate(round_trees):
                values[:, :, c] += eta * shap_values_tree(tree, X, n_features=p)[:, :, 0]
                base[c] += eta * tree.expected_value()[0]
        kind = "boosted"
    else:
        raise DataError(f"tree_shap supports trees and boosted ensembles, "
                        f"not {type(model).__name__}")
    k = values.shape[2]
    return ShapTensor(
        values=values, base=base,
        sample_ids=np.arange(n) if sample_ids is None else np.asarray(sample_ids),
        feature_names=tuple(feature_names) if feature_names
        else tuple(f"feature_{j}" for j in range(p)),
        class_names=tuple(class_names) if class_names
        else tuple(f"class_{c}" for c in range(k)),
        method="tree_shap", model_kind=kind)
