"""Batched incremental evaluation of within-group edge weights."""

import numpy as np


def prefix_edge_weights(labels, scheme):
    """Running ``R1`` and linear term for every prefix of every row.

    Parameters
    ----------
    labels : ndarray of shape (B, L)
        Category labels; the value ``scheme.K`` is an inert padding label.
    scheme : PairWeightScheme

    Returns
    -------
    r1 : ndarray of shape (B, L)
        ``r1[b, j]`` is the weight of pairs among the first ``j + 1`` labels.
    lam : ndarray of shape (B, L)
        Cumulative sum of single-observation weighted degrees; the weight of
        pairs among the remaining observations is ``W - lam + r1``.
    """
    labels = np.atleast_2d(np.asarray(labels, dtype=np.int64))
    B, L = labels.shape
    K = scheme.K
    tables = (
        scheme.padded_neighbors(),
        np.append(scheme.within_float(), 0.0),
        np.append([float(d) for d in scheme.node_weights], 0.0),
    )
    step = max(1, _CELL_BUDGET // (K + 1))
    if B <= step:
        return _prefix(labels, K, *tables)
    parts = [_prefix(labels[i : i + step], K, *tables) for i in range(0, B, step)]
    return np.vstack([p[0] for p in parts]), np.vstack([p[1] for p in parts])


_CELL_BUDGET = 4_000_000


def _prefix(labels, K, neighbors, within, deg):
    nbr, wt = neighbors
    B, L = labels.shape
    N = np.zeros((B, K + 1))
    rows = np.arange(B)
    rows2 = rows[:, None]
    r1 = np.empty((B, L))
    acc = np.zeros(B)
    for j in range(L):
        c = labels[:, j]
        acc += within[c] * N[rows, c] + (N[rows2, nbr[c]] * wt[c]).sum(axis=1)
        N[rows, c] += 1.0
        r1[:, j] = acc
    lam = np.cumsum(deg[labels], axis=1)
    return r1, lam


def permutation_rng(random_state, index):
    """Independent generator for permutation number ``index``."""
    return np.random.default_rng([int(random_state), int(index)])


def permuted_labels(labels, n_permutations, random_state, start=0):
    """Rows ``start .. start + n_permutations - 1`` of the permutation stream."""
    seed = 0 if random_state is None else int(random_state)
    labels = np.asarray(labels)
    out = np.empty((n_permutations, labels.size), dtype=np.int64)
    for i in range(n_permutations):
        out[i] = labels[permutation_rng(seed, start + i).permutation(labels.size)]
    return out
