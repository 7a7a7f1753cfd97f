"""Scan processes over single split points and over intervals."""

from dataclasses import dataclass
from math import ceil

import numpy as np

from ._kernel import prefix_edge_weights
from .exceptions import ConfigError, DegenerateStatisticError

STATISTICS = ("Zw", "S", "M")


def default_window(n, n0=None, n1=None, fraction=0.05):
    """Scan window, ``n0 = ceil(fraction * n)`` and ``n1 = n - n0`` by default,
    clamped so that both groups keep at least two observations."""
    if n0 is None:
        n0 = int(ceil(fraction * n))
    if n1 is None:
        n1 = n - n0
    n0, n1 = max(int(n0), 2), min(int(n1), n - 2)
    if n0 > n1:
        raise ConfigError(f"window too narrow: n0={n0} > n1={n1} for n={n}")
    return n0, n1


def basic_quantity_profile(seq, scheme):
    """``R1(t)`` and ``R2(t)`` for ``t = 0..n`` (index ``t``), built incrementally."""
    r1, lam = prefix_edge_weights(seq.labels[None, :], scheme)
    W = float(scheme.total_weight)
    R1 = np.concatenate([[0.0], r1[0]])
    lam = np.concatenate([[0.0], lam[0]])
    R2 = W - lam + R1
    return R1, R2


def direct_basic_quantities(n1, scheme):
    """``(R1, R2)`` evaluated from scratch from group-1 category counts."""
    m = scheme.counts
    n1 = np.asarray(n1, dtype=float)
    n2 = m - n1
    within = scheme.within_float()
    cross = scheme.cross_float()
    u, v = scheme.edges[:, 0], scheme.edges[:, 1]
    r1 = np.sum(within * n1 * (n1 - 1) / 2) + np.sum(cross * n1[u] * n1[v])
    r2 = np.sum(within * n2 * (n2 - 1) / 2) + np.sum(cross * n2[u] * n2[v])
    return float(r1), float(r2)


@dataclass
class ScanProfile:
    """Standardized processes on the window ``t = n0..n1`` (arrays aligned with ``t``)."""

    n0: int
    n1: int
    t: np.ndarray
    R1: np.ndarray
    R2: np.ndarray
    Zw: np.ndarray
    Zd: np.ndarray
    S: np.ndarray
    M: np.ndarray

    def values(self, statistic):
        if statistic not in STATISTICS + ("Zd",):
            raise ConfigError(f"unknown statistic {statistic!r}")
        return getattr(self, statistic)

    def as_records(self):
        return [
            {"t": int(t), "Zw": float(a), "Zd": float(b), "S": float(c), "M": float(d)}
            for t, a, b, c, d in zip(self.t, self.Zw, self.Zd, self.S, self.M)
        ]


def standardize_arrays(R1, R2, moments, ts):
    """Zw and Zd at split sizes ``ts`` (vectorized over leading axes of R1/R2)."""
    n = moments.n
    ts = np.asarray(ts)
    w = (ts - 1) / (n - 2)
    Rw = (1 - w) * R1 + w * R2
    Rd = R1 - R2
    Vw, Vd = moments.Vw[ts], moments.Vd[ts]
    if np.any(~(Vw > 0)) or np.any(~(Vd > 0)):
        bad = ts[~((Vw > 0) & (Vd > 0))][0]
        raise DegenerateStatisticError(f"degenerate statistic: zero permutation variance at t={int(bad)}")
    Zw = (Rw - moments.Ew[ts]) / np.sqrt(Vw)
    Zd = (Rd - moments.Ed[ts]) / np.sqrt(Vd)
    return Zw, Zd


def standardize(R1, R2, moments, n0, n1):
    """Assemble the window profile from full-length ``R1``/``R2`` (indexed by t)."""
    ts = np.arange(n0, n1 + 1)
    Zw, Zd = standardize_arrays(R1[ts], R2[ts], moments, ts)
    return ScanProfile(
        n0=n0,
        n1=n1,
        t=ts,
        R1=R1[ts],
        R2=R2[ts],
        Zw=Zw,
        Zd=Zd,
        S=Zw**2 + Zd**2,
        M=np.maximum(Zw, np.abs(Zd)),
    )


def combine(Zw, Zd, statistic):
    if statistic == "Zw":
        return Zw
    if statistic == "S":
        return Zw**2 + Zd**2
    if statistic == "M":
        return np.maximum(Zw, np.abs(Zd))
    raise ConfigError(f"unknown statistic {statistic!r}")


@dataclass
class ChangePointEstimate:
    statistic: str
    mode: str
    max_value: float
    tau: object  # int, or (t1, t2) for an interval

    def as_dict(self):
        tau = list(self.tau) if isinstance(self.tau, tuple) else self.tau
        return {"statistic": self.statistic, "mode": self.mode, "max": self.max_value, "tau": tau}


def single_change_scan(profile, statistic="S", mode=None):
    """Maximum over the window; ties go to the smallest ``t``."""
    vals = profile.values(statistic)
    j = int(np.argmax(vals))
    return ChangePointEstimate(statistic, mode, float(vals[j]), int(profile.t[j]))


def interval_statistic(seq, scheme, moments, t1, t2, statistic="S"):
    """Statistic for group 1 = observations ``t1 .. t2 - 1`` (1-based)."""
    from .sequence import contingency_at

    n1, _ = contingency_at(seq, interval=(t1, t2))
    r1, r2 = direct_basic_quantities(n1, scheme)
    L = t2 - t1
    Zw, Zd = standardize_arrays(np.array(r1), np.array(r2), moments, np.array(L))
    return float(combine(Zw, Zd, statistic))


def interval_matrix(labels, scheme, moments, n0, n1, statistic="S"):
    """Statistic for every interval, batched over start points.

    Returns an ``(n, n1 - n0 + 1)`` array whose entry ``[t1 - 1, L - n0]`` is
    the statistic for the interval ``[t1, t1 + L)``; impossible intervals
    (``t2 > n``) are ``-inf``.
    """
    labels = np.asarray(labels)
    n = labels.size
    K = scheme.K
    # row i: labels[i:] padded with the inert label
    idx = np.arange(n)[:, None] + np.arange(n1)[None, :]
    padded = np.append(labels, K)[np.minimum(idx, n)]
    r1, lam = prefix_edge_weights(padded, scheme)
    W = float(scheme.total_weight)
    lens = np.arange(n0, n1 + 1)
    R1 = r1[:, lens - 1]
    R2 = W - lam[:, lens - 1] + R1
    Zw, Zd = standardize_arrays(R1, R2, moments, lens)
    out = combine(Zw, Zd, statistic)
    starts = np.arange(1, n + 1)[:, None]
    out = np.where(starts + lens[None, :] <= n, out, -np.inf)
    return out


def interval_max(values, n0):
    """Argmax of an interval matrix, smallest ``(t1, t2)`` on ties."""
    best = np.max(values)
    rows, cols = np.nonzero(values == best)
    cand = sorted((int(r) + 1, int(r) + 1 + int(c) + n0) for r, c in zip(rows, cols))
    return float(best), cand[0]


def changed_interval_scan(seq, scheme, moments, n0, n1, statistic="S", mode=None):
    """Scan all intervals ``[t1, t2)`` with ``n0 <= t2 - t1 <= n1``."""
    vals = interval_matrix(seq.labels, scheme, moments, n0, n1, statistic)
    best, tau = interval_max(vals, n0)
    return ChangePointEstimate(statistic, mode, best, tau)
