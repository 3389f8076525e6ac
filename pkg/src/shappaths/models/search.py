"""Exhaustive grid search with deterministic cross-validation folds."""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from ..errors import InvalidSpecError
from ..rng import generator
from .boosted import train_boosted
from .metrics import evaluate
from .mlp import train_mlp
from .tree import train_tree


@dataclass(frozen=True)
class GridSearchSpec:
    """Candidate lists per hyperparameter, in tie-break priority order."""

    grids: dict[str, list]
    n_folds: int = 3
    stratified: bool = True
    seed: int = 0

    def validate(self):
        if not self.grids or any(len(v) == 0 for v in self.grids.values()):
            raise InvalidSpecError("every hyperparameter grid must be nonempty")
        if self.n_folds < 2:
            raise InvalidSpecError("n_folds must be at least 2")


@dataclass(frozen=True)
class CvCell:
    params: dict
    fold_accuracies: tuple[float, ...]

    @property
    def mean_accuracy(self) -> float:
        return float(np.mean(self.fold_accuracies))


@dataclass(frozen=True)
class GridSearchResult:
    best_params: dict
    table: tuple[CvCell, ...]


def _train_for_kind(kind: str, train, params: dict):
    if kind == "tree":
        return train_tree(train, **params)
    if kind == "boosted":
        return train_boosted(train, **params)
    if kind == "mlp":
        p = dict(params)
        hidden = tuple(p.pop("hidden", ()))
        return train_mlp(train, (train.p, *hidden, train.k), **p)
    raise InvalidSpecError(f"unknown model kind {kind!r}")


def fold_assignments(labels: np.ndarray, n_folds: int, stratified: bool,
                     seed: int) -> np.ndarray:
    """Fold index per row; stratified folds deal each class round-robin."""
    labels = np.asarray(labels)
    n = labels.shape[0]
    rng = generator(seed, "cv.folds")
    folds = np.empty(n, dtype=int)
    if not stratified:
        perm = rng.permutation(n)
        folds[perm] = np.arange(n) % n_folds
        return folds
    counts = np.bincount(labels)
    if (counts[counts > 0] < n_folds).any():
        raise InvalidSpecError(f"stratified CV with {n_folds} folds needs at least "
                               f"{n_folds} samples in every class")
    for cls in np.flatnonzero(counts):
        members = np.flatnonzero(labels == cls)
        perm = rng.permutation(len(members))
        folds[members[perm]] = np.arange(len(members)) % n_folds
    return folds


def grid_search(train, model_kind: str, spec: GridSearchSpec) -> GridSearchResult:
    """Mean CV accuracy over the full grid; ties keep the first-listed cell."""
    spec.validate()
    folds = fold_assignments(train.labels, spec.n_folds, spec.stratified, spec.seed)
    keys = list(spec.grids.keys())
    cells = []
    best_cell = None
    for combo in itertools.product(*(spec.grids[k] for k in keys)):
        params = dict(zip(keys, combo))
        accs = []
        for f in range(spec.n_folds):
            model = _train_for_kind(model_kind, train.take(np.flatnonzero(folds != f)), params)
            accs.append(evaluate(model, train.take(np.flatnonzero(folds == f))).accuracy)
        cell = CvCell(params=params, fold_accuracies=tuple(accs))
        cells.append(cell)
        if best_cell is None or cell.mean_accuracy > best_cell.mean_accuracy:
            best_cell = cell
    return GridSearchResult(best_params=dict(best_cell.params), table=tuple(cells))
