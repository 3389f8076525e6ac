"""Classifiers sharing one per-class margin interface.

Every model exposes ``predict_margin(X) -> (n, k)`` raw scores and
``predict_class(X)`` as their argmax (lowest index wins ties), plus
``n_features`` / ``n_classes``. Decision-tree margins are leaf
class-frequency vectors; the boosted ensemble and the network report
logits.
"""

from typing import Protocol, runtime_checkable

import numpy as np

from .boosted import BoostedEnsemble, log_loss, softmax, train_boosted
from .io import load_model, model_from_dict, model_to_dict, save_model
from .metrics import EvalReport, evaluate
from .mlp import Mlp, init_mlp, loss_and_grads, train_mlp
from .search import CvCell, GridSearchResult, GridSearchSpec, fold_assignments, grid_search
from .tree import DecisionTree, leaf_id, train_tree


@runtime_checkable
class MarginModel(Protocol):
    n_features: int
    n_classes: int

    def predict_margin(self, X: np.ndarray) -> np.ndarray: ...

    def predict_class(self, X: np.ndarray) -> np.ndarray: ...


__all__ = [
    "BoostedEnsemble", "CvCell", "DecisionTree", "EvalReport", "GridSearchResult",
    "GridSearchSpec", "MarginModel", "Mlp", "evaluate", "fold_assignments",
    "grid_search", "init_mlp", "leaf_id", "load_model", "log_loss", "loss_and_grads",
    "model_from_dict", "model_to_dict", "save_model", "softmax", "train_boosted",
    "train_mlp", "train_tree",
]
