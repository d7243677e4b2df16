"""Shared oracles and dataset helpers for the test suite."""

import numpy as np
import pytest

from emstbench import Dataset
from emstbench.core import sq_dists


def brute_knn(coords: np.ndarray, ids, q, k: int) -> list[tuple[int, float]]:
    """Reference k-NN: full scan over the given ids, ordered by (distance, id)."""
    ids = list(ids)
    if not ids:
        return []
    arr = np.array(ids, dtype=np.intp)
    dists = np.sqrt(sq_dists(coords[arr], np.asarray(q, dtype=np.float64)))
    ranked = sorted(zip(dists.tolist(), ids))
    return [(i, d) for d, i in ranked[:k]]


def random_dataset(rng: np.random.Generator, n: int, d: int) -> Dataset:
    return Dataset(rng.random((n, d)))


@pytest.fixture
def rng():
    return np.random.default_rng(20110215)
