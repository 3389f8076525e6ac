import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from shappaths import Dataset, SimulationSpec, SplitSpec, simulate, split


@pytest.fixture(scope="session")
def sim_small():
    """600-sample simulated dataset, 6 features: fast but structured."""
    return simulate(SimulationSpec(n_samples=600, n_features=6, seed=11))


@pytest.fixture(scope="session")
def sim_small_split(sim_small):
    return split(sim_small, SplitSpec(train_fraction=0.7, seed=11))


@pytest.fixture(scope="session")
def two_class_ds():
    """Linearly separable two-class data with a margin on feature 0."""
    rng = np.random.default_rng(5)
    X = rng.uniform(-2, 2, size=(120, 3))
    X[:, 0] = np.sign(X[:, 0]) * (0.2 + np.abs(X[:, 0]))
    y = (X[:, 0] > 0).astype(int)
    return Dataset(X, y, ("a", "b", "c"), ("neg", "pos"))
