"""Model-agnostic Shapley estimation by kernel-weighted least squares.

A coalition z in {0,1}^p is valued interventionally: masked-off features
are replaced by background rows and the model outputs averaged over the
background. The attributions solve the Shapley-kernel-weighted regression
over sampled coalitions subject to two exact constraints, eliminated by
substitution: the intercept equals the empty-coalition value (the mean
background margin, stored as the tensor's base) and the attributions sum
to margin(x) - base. When the budget covers all 2^p - 2 proper coalitions
they are enumerated and the result is the exact interventional Shapley
value.

Coalition sampling follows the symmetric-kernel heuristic: complete
size strata are enumerated from the outside in while the budget allows;
the remainder is sampled by kernel weight, each coalition paired with its
complement.
"""

from __future__ import annotations

import logging
import math

import numpy as np

from ..errors import DataError, InvalidSpecError, NumericalError
from ..rng import generator
from .tensor import Background, ShapTensor

log = logging.getLogger(__name__)

DEFAULT_COALITIONS = 2048
DEFAULT_BACKGROUND = 100
_BLOCK_FLOATS = 2 ** 24  # chunk model evaluation around ~128 MB of masked rows


def kernel_weight(p: int, size: int) -> float:
    """Shapley kernel weight of a proper coalition of the given size."""
    return (p - 1) / (math.comb(p, size) * size * (p - size))


def _enumerate_size(p: int, size: int) -> np.ndarray:
    """All coalitions of one size as a (count, p) 0/1 matrix, lexicographic."""
    from itertools import combinations

    rows = np.zeros((math.comb(p, size), p))
    for i, combo in enumerate(combinations(range(p), size)):
        rows[i, list(combo)] = 1.0
    return rows


def sample_coalitions(p: int, budget: int, rng: np.random.Generator):
    """(coalitions, weights): enumerated strata get exact kernel weights,
    the sampled remainder splits the leftover kernel mass evenly."""
    sizes = np.arange(1, p)
    stratum_weight = np.array([kernel_weight(p, s) * math.comb(p, s) for s in sizes])
    paired: list[tuple[int, ...]] = []
    seen = set()
    for s in sizes[: (p - 1 + 1) // 2]:
        pair = (s,) if 2 * s == p else (s, p - s)
        if pair not in seen:
            paired.append(pair)
            seen.add(pair)

    blocks, weights = [], []
    remaining = budget
    enumerated_sizes = set()
    for pair in paired:
        count = sum(math.comb(p, s) for s in pair)
        if count > remaining:
            break
        for s in pair:
            block = _enumerate_size(p, s)
            blocks.append(block)
            weights.append(np.full(block.shape[0], kernel_weight(p, s)))
            enumerated_sizes.add(s)
        remaining -= count

    leftover_sizes = np.array([s for s in sizes if s not in enumerated_sizes])
    if leftover_sizes.size and remaining >= 2:
        mass = np.array([stratum_weight[s - 1] for s in leftover_sizes])
        probs = mass / mass.sum()
        drawn = []
        for _ in range(remaining // 2):
            s = int(rng.choice(leftover_sizes, p=probs))
            members = rng.choice(p, size=s, replace=False)
            z = np.zeros(p)
            z[members] = 1.0
            drawn.append(z)
            drawn.append(1.0 - z)
        drawn = np.array(drawn)
        uniq, inverse, counts = np.unique(drawn, axis=0,
                                          return_inverse=True, return_counts=True)
        blocks.append(uniq)
        weights.append(mass.sum() * counts / counts.sum())
    if not blocks:
        raise InvalidSpecError(f"coalition budget {budget} cannot cover the smallest "
                               f"stratum pair for p={p} (needs {2 * p} rows)")
    return np.vstack(blocks), np.concatenate(weights)


def _coalition_values(model, x: np.ndarray, coalitions: np.ndarray,
                      background: np.ndarray) -> np.ndarray:
    """(n_coalitions, k) mean margins with masked features drawn from background."""
    n_coal, p = coalitions.shape
    m = background.shape[0]
    per_block = max(1, _BLOCK_FLOATS // (m * p))
    outputs = []
    for start in range(0, n_coal, per_block):
        z = coalitions[start:start + per_block]
        mixed = np.where(z[:, None, :] == 1.0, x[None, None, :], background[None, :, :])
        margins = model.predict_margin(mixed.reshape(-1, p))
        outputs.append(margins.reshape(z.shape[0], m, -1).mean(axis=1))
    return np.vstack(outputs)


def _solve_constrained(coalitions, weights, values, base, fx):
    """Weighted least squares with the sum constraint eliminated on the
    last feature; returns (p, k) attributions."""
    p = coalitions.shape[1]
    delta = fx - base                      # (k,)
    z_last = coalitions[:, -1:]            # (C, 1)
    design = coalitions[:, :-1] - z_last   # (C, p-1)
    target = values - base - z_last * delta[None, :]
    w = weights / weights.sum()
    a = design.T @ (design * w[:, None])
    b = design.T @ (target * w[:, None])
    try:
        head = np.linalg.solve(a, b)
    except np.linalg.LinAlgError:
        scale = float(np.trace(a)) / max(a.shape[0], 1)
        log.warning("singular kernel regression; adding ridge %.1e", 1e-6 * scale)
        try:
            head = np.linalg.solve(a + 1e-6 * scale * np.eye(a.shape[0]), b)
        except np.linalg.LinAlgError as exc:
            raise NumericalError(f"kernel regression is singular: {exc}") from exc
    if not np.isfinite(head).all():
        raise NumericalError("kernel regression produced non-finite attributions")
    phi = np.empty((p, head.shape[1]))
    phi[:-1] = head
    phi[-1] = delta - head.sum(axis=0)
    return phi


def kernel_shap(model, X: np.ndarray, background: Background,
                n_coalitions: int = DEFAULT_COALITIONS, seed: int = 0,
                max_model_evals: int | None = 50_000_000,
                feature_names=None, class_names=None,
                sample_ids=None) -> ShapTensor:
    """Sampled (or fully enumerated) Kernel SHAP tensor for any margin model.

    The base values are the mean background margins -- the exact quantity
    the attributions sum against. Deterministic given the seed and budget.
    """
    X = np.atleast_2d(np.asarray(X, dtype=float))
    n, p = X.shape
    if p < 1:
        raise DataError("need at least one feature")
    if background.data.shape[1] != p:
        raise DataError(f"background has {background.data.shape[1]} features, data has {p}")
    total = 2 ** p - 2 if p < 63 else np.inf
    exact = total <= n_coalitions
    if exact:
        coalitions = np.vstack([_enumerate_size(p, s) for s in range(1, p)]) \
            if p > 1 else np.zeros((0, p))
        weights = np.array([kernel_weight(p, int(z.sum())) for z in coalitions])
    else:
        coalitions, weights = sample_coalitions(p, n_coalitions, generator(seed, "shap.kernel"))
    evals = (coalitions.shape[0] + 1) * background.m * n
    if max_model_evals is not None and evals > max_model_evals:
        raise InvalidSpecError(
            f"kernel explanation needs {evals} model evaluations, over the "
            f"budget of {max_model_evals}; lower n_coalitions or the background size")

    base = model.predict_margin(background.data).mean(axis=0)
    k = base.shape[0]
    margins = model.predict_margin(X)
    values = np.zeros((n, p, k))
    if p == 1:
        # additivity pins the single attribution down exactly
        values[:, 0, :] = margins - base
    else:
        for i in range(n):
            v = _coalition_values(model, X[i], coalitions, background.data)
            values[i] = _solve_constrained(coalitions, weights, v, base, margins[i])
    return ShapTensor(
        values=values, base=base,
        sample_ids=np.arange(n) if sample_ids is None else np.asarray(sample_ids),
        feature_names=tuple(feature_names) if feature_names
        else tuple(f"feature_{j}" for j in range(p)),
        class_names=tuple(class_names) if class_names
        else tuple(f"class_{c}" for c in range(k)),
        method="kernel_shap_exact" if exact else "kernel_shap",
        model_kind=type(model).__name__.lower(),
        background=background.label or f"rows:{background.m}")


def sample_background(X: np.ndarray, size: int = DEFAULT_BACKGROUND,
                      seed: int = 0) -> Background:
    """A seeded row subsample (all rows when there are fewer than ``size``)."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    if X.shape[0] <= size:
        return Background(X, label=f"all:{X.shape[0]}")
    rng = generator(seed, "shap.background")
    rows = np.sort(rng.choice(X.shape[0], size=size, replace=False))
    return Background(X[rows], label=f"sample:{size}:seed{seed}")
