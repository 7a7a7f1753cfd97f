"""Permutation null distributions of the scan maxima."""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from math import factorial

import numpy as np

from ._kernel import permuted_labels, prefix_edge_weights
from .exceptions import ConfigError, InputError
from .scan import combine, interval_matrix, standardize_arrays

_BATCH = 256


@dataclass(frozen=True)
class PermutationPlan:
    n_permutations: int = 1000
    random_state: int = 0
    statistic: str = "S"
    n_jobs: int = 1

    def __post_init__(self):
        if self.n_permutations < 1:
            raise ConfigError("need at least one permutation")


def tie_tolerance(observed):
    return 1e-9 * max(1.0, abs(float(observed)))


def scan_maxima(labels, scheme, moments, windows, statistics):
    """Window maxima for a batch of label sequences.

    Returns a dict keyed by ``(statistic, (n0, n1))`` of arrays of length ``B``.
    """
    labels = np.atleast_2d(labels)
    n = labels.shape[1]
    lo = min(w[0] for w in windows)
    hi = max(w[1] for w in windows)
    ts = np.arange(lo, hi + 1)
    r1, lam = prefix_edge_weights(labels[:, :hi], scheme)
    W = float(scheme.total_weight)
    R1 = r1[:, ts - 1]
    R2 = W - lam[:, ts - 1] + R1
    Zw, Zd = standardize_arrays(R1, R2, moments, ts)
    out = {}
    for stat in statistics:
        vals = combine(Zw, Zd, stat)
        for n0, n1 in windows:
            out[(stat, (n0, n1))] = vals[:, n0 - lo : n1 - lo + 1].max(axis=1)
    return out


def _run_batches(fn, total, n_jobs):
    starts = list(range(0, total, _BATCH))
    sizes = [min(_BATCH, total - s) for s in starts]
    if n_jobs is not None and n_jobs > 1 and len(starts) > 1:
        with ThreadPoolExecutor(max_workers=n_jobs) as pool:
            parts = list(pool.map(fn, starts, sizes))
    else:
        parts = [fn(s, k) for s, k in zip(starts, sizes)]
    return parts


def permutation_samples(seq, scheme, moments, windows, statistics, n_permutations=1000, random_state=0, n_jobs=1):
    """Permuted window maxima for several windows and statistics at once.

    Permutation ``i`` always uses the generator seeded by
    ``(random_state, i)``, so samples do not depend on ``n_jobs``.
    """
    windows = [tuple(int(v) for v in w) for w in windows]

    def batch(start, size):
        lab = permuted_labels(seq.labels, size, random_state, start)
        return scan_maxima(lab, scheme, moments, windows, statistics)

    parts = _run_batches(batch, n_permutations, n_jobs)
    return {key: np.concatenate([p[key] for p in parts]) for key in parts[0]}


def add_one_pvalue(observed, sample):
    """``(1 + #{sample >= observed}) / (1 + len(sample))``."""
    sample = np.asarray(sample)
    hits = int(np.sum(sample >= observed - tie_tolerance(observed)))
    return (1 + hits) / (1 + sample.size)


def permutation_pvalue(seq, scheme, moments, window, plan):
    """Monte-Carlo p-value of the observed window maximum.

    Returns
    -------
    p : float
    observed : float
    sample : ndarray
        Maxima over the permuted sequences.
    """
    key = (plan.statistic, tuple(window))
    observed = scan_maxima(seq.labels, scheme, moments, [window], [plan.statistic])[key][0]
    sample = permutation_samples(
        seq, scheme, moments, [window], [plan.statistic], plan.n_permutations, plan.random_state, plan.n_jobs
    )[key]
    return add_one_pvalue(observed, sample), float(observed), sample


def permutation_critical_value(sample, alpha):
    """Empirical ``1 - alpha`` quantile (linear interpolation, type 7)."""
    if not 0 < alpha < 1:
        raise ConfigError("alpha must lie in (0, 1)")
    return float(np.quantile(np.asarray(sample, dtype=float), 1 - alpha, method="linear"))


def multiset_permutations(labels):
    """All distinct arrangements of ``labels`` in lexicographic order."""
    values, counts = np.unique(np.asarray(labels), return_counts=True)
    counts = counts.tolist()
    n = int(sum(counts))
    current = [0] * n

    def rec(pos):
        if pos == n:
            yield list(current)
            return
        for i, v in enumerate(values):
            if counts[i]:
                counts[i] -= 1
                current[pos] = v
                yield from rec(pos + 1)
                counts[i] += 1

    yield from rec(0)


def exhaustive_pvalue(seq, scheme, moments, window, statistic="S", max_n=9):
    """Exact permutation tail probability by full enumeration.

    Returns ``(p, observed, n_arrangements)``.
    """
    n = seq.n
    if n > max_n:
        raise InputError(f"n={n} too large for enumeration (max {max_n})")
    total = factorial(n)
    for c in seq.counts:
        total //= factorial(int(c))
    arr = np.array(list(multiset_permutations(seq.labels)), dtype=np.int64)
    assert arr.shape[0] == total
    key = (statistic, tuple(window))
    observed = scan_maxima(seq.labels, scheme, moments, [window], [statistic])[key][0]
    sample = scan_maxima(arr, scheme, moments, [window], [statistic])[key]
    hits = int(np.sum(sample >= observed - tie_tolerance(observed)))
    return hits / total, float(observed), total


def interval_permutation_pvalue(seq, scheme, moments, n0, n1, statistic="S", n_permutations=200, random_state=0, n_jobs=1):
    """Monte-Carlo p-value for the changed-interval scan maximum.

    Returns ``(p, observed, sample)``.
    """
    observed = float(np.max(interval_matrix(seq.labels, scheme, moments, n0, n1, statistic)))

    def batch(start, size):
        lab = permuted_labels(seq.labels, size, random_state, start)
        return np.array([np.max(interval_matrix(row, scheme, moments, n0, n1, statistic)) for row in lab])

    sample = np.concatenate(_run_batches(batch, n_permutations, n_jobs))
    return add_one_pvalue(observed, sample), observed, sample
