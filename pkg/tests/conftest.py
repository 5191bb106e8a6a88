import numpy as np
import pytest

from crosslearn.data import Dataset, TaskKind


@pytest.fixture
def separable4() -> Dataset:
    """Four linearly separable points in the plane."""
    X = np.array([[-2.0, -1.0], [-1.5, -2.0], [1.5, 2.0], [2.0, 1.0]])
    y = np.array([0, 0, 1, 1])
    return Dataset(X, y, TaskKind.binary())


@pytest.fixture
def xor200() -> Dataset:
    g = np.random.default_rng(3)
    X = g.normal(size=(200, 2))
    y = ((X[:, 0] * X[:, 1]) > 0).astype(np.int64)
    return Dataset(X, y, TaskKind.binary())


def flip_labels(d: Dataset) -> Dataset:
    return Dataset(d.features, (d.task.n_classes - 1) - d.labels, d.task)
