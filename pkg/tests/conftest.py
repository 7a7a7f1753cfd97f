import numpy as np
import pytest

from tiescan.graph import build_graph, pairwise_distances
from tiescan.sequence import categorize


def random_tied_observations(rng, n, d=2, levels=3):
    """Small integer vectors so that exact repeats are common."""
    while True:
        X = rng.integers(0, levels, size=(n, d))
        if len({tuple(r) for r in X}) >= 3:
            return X


def seq_and_graph(X, kind="nnl", metric="euclidean"):
    seq = categorize(list(np.asarray(X)))
    g = build_graph(pairwise_distances(seq.representatives, metric), kind)
    return seq, g


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
