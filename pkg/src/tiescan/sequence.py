"""Collapsing a sequence of observations into categories of exact repeats."""

from dataclasses import dataclass, field

import numpy as np

from .exceptions import InputError


def canonical_key(obs):
    """Hashable encoding used to decide exact equality of two observations.

    Arrays are compared entry-wise on their shape, dtype kind and raw values;
    anything else must already be hashable.
    """
    if isinstance(obs, (list, tuple)):
        obs = np.asarray(obs)
    if isinstance(obs, np.ndarray):
        arr = np.ascontiguousarray(obs)
        if arr.dtype.kind in "biu":
            arr = arr.astype(np.int64)
        elif arr.dtype.kind == "f":
            # +0.0 and -0.0 are the same value
            arr = arr.astype(np.float64) + 0.0
        return (arr.shape, arr.dtype.str, arr.tobytes())
    return obs


@dataclass(frozen=True)
class CategorizedSequence:
    """Time-ordered category labels together with category multiplicities.

    Attributes
    ----------
    labels : ndarray of shape (n,)
        Category index of each observation, categories numbered by first
        appearance.
    counts : ndarray of shape (K,)
        ``counts[k]`` is the number of observations in category ``k``.
    representatives : list
        One observation per category.
    """

    labels: np.ndarray
    counts: np.ndarray
    representatives: list = field(repr=False)

    @property
    def n(self):
        return int(self.labels.shape[0])

    @property
    def K(self):
        return int(self.counts.shape[0])

    def expand(self):
        """Observations reconstructed from representatives and labels."""
        return [self.representatives[k] for k in self.labels]

    def subsequence(self, start, stop):
        """Categorized view of observations ``start..stop-1`` (0-based)."""
        return categorize(
            [self.representatives[k] for k in self.labels[start:stop]]
        )


def categorize(observations, key=canonical_key):
    """Group exactly repeated observations.

    Parameters
    ----------
    observations : sequence
        Ordered observations. Arrays are compared entry-wise.
    key : callable
        Maps an observation to a hashable canonical encoding; two
        observations are repeats when their keys are equal.

    Returns
    -------
    CategorizedSequence
    """
    observations = list(observations)
    if len(observations) == 0:
        raise InputError("empty sequence")
    index = {}
    labels = np.empty(len(observations), dtype=np.int64)
    reps = []
    for i, obs in enumerate(observations):
        k = key(obs)
        j = index.get(k)
        if j is None:
            j = index[k] = len(reps)
            reps.append(obs)
        labels[i] = j
    counts = np.bincount(labels, minlength=len(reps)).astype(np.int64)
    return CategorizedSequence(labels, counts, reps)


def from_labels(labels, representatives=None):
    """Build a sequence directly from integer labels (relabelled by first appearance)."""
    labels = np.asarray(labels)
    if labels.ndim != 1 or labels.size == 0:
        raise InputError("empty sequence")
    _, first, inverse = np.unique(labels, return_index=True, return_inverse=True)
    order = np.argsort(first, kind="stable")
    rank = np.empty_like(order)
    rank[order] = np.arange(order.size)
    new = rank[inverse.ravel()].astype(np.int64)
    if representatives is None:
        reps = [labels[first[j]].item() for j in order]
    else:
        reps = [representatives[labels[first[j]]] for j in order]
    counts = np.bincount(new, minlength=order.size).astype(np.int64)
    return CategorizedSequence(new, counts, reps)


def contingency_at(seq, t=None, interval=None):
    """Per-category group counts for a split.

    Either ``t`` (group 1 = observations 1..t) or ``interval=(t1, t2)``
    (group 1 = observations t1..t2-1, 1-based) must be given.

    Returns
    -------
    n1, n2 : ndarray of shape (K,)
    """
    n = seq.n
    if (t is None) == (interval is None):
        raise InputError("give exactly one of t or interval")
    if t is not None:
        if not 0 <= t <= n:
            raise InputError(f"split t={t} outside [0, {n}]")
        group = seq.labels[:t]
    else:
        t1, t2 = interval
        if not 1 <= t1 < t2 <= n + 1:
            raise InputError(f"interval {interval} outside 1 <= t1 < t2 <= {n + 1}")
        group = seq.labels[t1 - 1 : t2 - 1]
    n1 = np.bincount(group, minlength=seq.K).astype(np.int64)
    return n1, seq.counts - n1


def reverse(seq):
    """The same sequence read backwards; category numbering is kept."""
    return CategorizedSequence(seq.labels[::-1].copy(), seq.counts, seq.representatives)
