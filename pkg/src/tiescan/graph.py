"""Similarity graphs on the distinct values and their structural aggregates."""

from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import cdist

from .exceptions import InputError

METRICS = ("euclidean", "l1", "hamming", "normalized-frobenius")
GRAPHS = ("mst", "union-msts", "nnl")


@dataclass(frozen=True)
class BaseGraph:
    """Undirected simple graph on ``K`` category nodes.

    ``edges`` is an ``(E, 2)`` integer array with ``u < v`` in each row,
    sorted lexicographically.
    """

    K: int
    edges: np.ndarray

    def __post_init__(self):
        e = np.asarray(self.edges, dtype=np.int64).reshape(-1, 2)
        if e.size:
            if np.any(e[:, 0] == e[:, 1]):
                raise InputError("self-loop in graph")
            if e.min() < 0 or e.max() >= self.K:
                raise InputError("edge endpoint out of range")
            e = np.sort(e, axis=1)
            e = np.unique(e, axis=0)
        object.__setattr__(self, "edges", e)

    @property
    def n_edges(self):
        return int(self.edges.shape[0])

    @property
    def degree(self):
        return np.bincount(self.edges.ravel(), minlength=self.K).astype(np.int64)

    def neighbors(self):
        """List of neighbor index arrays, one per node."""
        nb = [[] for _ in range(self.K)]
        for u, v in self.edges:
            nb[u].append(v)
            nb[v].append(u)
        return [np.array(sorted(x), dtype=np.int64) for x in nb]

    def closed_neighborhoods(self):
        """``nbr[u]``: node ``u`` together with its neighbors."""
        return [np.union1d(x, [u]) for u, x in enumerate(self.neighbors())]

    def two_hop_edge_counts(self):
        """Number of edges with at least one endpoint in the closed neighborhood of each node."""
        incident = [[] for _ in range(self.K)]
        for j, (u, v) in enumerate(self.edges):
            incident[u].append(j)
            incident[v].append(j)
        out = np.zeros(self.K, dtype=np.int64)
        for u, nb in enumerate(self.closed_neighborhoods()):
            seen = set()
            for w in nb:
                seen.update(incident[w])
            out[u] = len(seen)
        return out

    def triangles(self):
        """All node triples ``(u, v, w)``, ``u < v < w``, forming a triangle."""
        nbsets = [set(x.tolist()) for x in self.neighbors()]
        tri = []
        for u, v in self.edges:
            for w in nbsets[u] & nbsets[v]:
                if w > v:
                    tri.append((u, v, w))
        return np.array(tri, dtype=np.int64).reshape(-1, 3)


def _flat(representatives):
    try:
        arr = np.asarray([np.asarray(r, dtype=float).ravel() for r in representatives])
    except ValueError as exc:
        raise InputError("observations do not share a common shape") from exc
    if arr.ndim != 2:
        raise InputError("observations do not share a common shape")
    return arr


def pairwise_distances(representatives, metric="euclidean"):
    """Distance matrix between category representatives.

    Parameters
    ----------
    representatives : sequence of array-like
        One observation per category, all of one shape.
    metric : {"euclidean", "l1", "hamming", "normalized-frobenius"}
        ``hamming`` counts differing entries (for 0/1 matrices this is the
        squared Frobenius distance). ``normalized-frobenius`` divides the
        Frobenius distance by the geometric mean of the two Frobenius norms.
    """
    X = _flat(representatives)
    if metric == "euclidean":
        D = cdist(X, X, "euclidean")
    elif metric == "l1":
        D = cdist(X, X, "cityblock")
    elif metric == "hamming":
        D = (X[:, None, :] != X[None, :, :]).sum(axis=2).astype(float)
    elif metric == "normalized-frobenius":
        norms = np.linalg.norm(X, axis=1)
        if np.any(norms == 0):
            raise InputError("zero-norm observation")
        D = cdist(X, X, "euclidean") / np.sqrt(np.outer(norms, norms))
    else:
        raise InputError(f"unknown metric {metric!r}")
    D = 0.5 * (D + D.T)
    np.fill_diagonal(D, 0.0)
    return D


def check_distance_matrix(dist):
    D = np.asarray(dist, dtype=float)
    if D.ndim != 2 or D.shape[0] != D.shape[1]:
        raise InputError("distance matrix must be square")
    if not np.all(np.isfinite(D)):
        raise InputError("distance matrix has non-finite entries")
    if not np.array_equal(D, D.T):
        raise InputError("distance matrix must be symmetric")
    if D.shape[0] < 2:
        raise InputError("at least two distinct values are needed")
    return D


def _sorted_pairs(D):
    iu, iv = np.triu_indices(D.shape[0], k=1)
    w = D[iu, iv]
    # lexsort keys from last to first: weight, then u, then v
    order = np.lexsort((iv, iu, w))
    return iu[order], iv[order], w[order]


class _DisjointSet:
    def __init__(self, size):
        self.parent = list(range(size))

    def find(self, x):
        parent = self.parent
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def union(self, a, b):
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        self.parent[max(ra, rb)] = min(ra, rb)
        return True


def mst(dist):
    """Minimum spanning tree by Kruskal with ties broken on ``(weight, u, v)``."""
    D = check_distance_matrix(dist)
    K = D.shape[0]
    ds = _DisjointSet(K)
    chosen = []
    for u, v, _ in zip(*_sorted_pairs(D)):
        if ds.union(u, v):
            chosen.append((u, v))
            if len(chosen) == K - 1:
                break
    return BaseGraph(K, np.array(chosen, dtype=np.int64))


def union_of_msts(dist):
    """Every edge that belongs to at least one minimum spanning tree.

    An edge of weight ``w`` qualifies when its endpoints are disconnected in
    the subgraph of strictly lighter edges.
    """
    D = check_distance_matrix(dist)
    K = D.shape[0]
    ds = _DisjointSet(K)
    iu, iv, w = _sorted_pairs(D)
    chosen = []
    start = 0
    m = len(w)
    while start < m:
        stop = start
        while stop < m and w[stop] == w[start]:
            stop += 1
        group = range(start, stop)
        for j in group:
            if ds.find(iu[j]) != ds.find(iv[j]):
                chosen.append((iu[j], iv[j]))
        for j in group:
            ds.union(iu[j], iv[j])
        start = stop
    return BaseGraph(K, np.array(chosen, dtype=np.int64))


def nearest_neighbor_link(dist):
    """Link every node to all of its (tied) nearest neighbors."""
    D = check_distance_matrix(dist).copy()
    K = D.shape[0]
    np.fill_diagonal(D, np.inf)
    rows, cols = np.nonzero(D == D.min(axis=1, keepdims=True))
    return BaseGraph(K, np.column_stack([rows, cols]))


def from_edge_list(K, edges):
    """Graph from a user-supplied list of category pairs."""
    return BaseGraph(int(K), np.asarray(edges, dtype=np.int64).reshape(-1, 2))


def build_graph(dist, kind="nnl"):
    if kind == "mst":
        return mst(dist)
    if kind == "union-msts":
        return union_of_msts(dist)
    if kind == "nnl":
        return nearest_neighbor_link(dist)
    raise InputError(f"unknown graph kind {kind!r}")


def quantize_distances(dist, decimals):
    """Round distances so that near ties become exact ties."""
    if decimals is None:
        return np.asarray(dist, dtype=float)
    return np.round(np.asarray(dist, dtype=float), int(decimals))


@dataclass
class ConditionEntry:
    name: str
    value: float
    normalizer: float
    ratio: float
    ok: bool

    def as_dict(self):
        return {
            "name": self.name,
            "value": self.value,
            "normalizer": self.normalizer,
            "ratio": self.ratio,
            "ok": self.ok,
        }


def condition_diagnostics(g, counts, n=None, threshold=10.0):
    """Evaluate the sums that the asymptotic theory requires to be small.

    Each entry reports the left-hand sum, its normalizer (``n`` for the
    O(n) conditions, ``n**1.5`` for the o(n^{3/2}) ones), their ratio and
    whether ``|ratio| <= threshold``. Entries 1-4 concern the averaging
    statistic, entries 5-8 the union statistic.
    """
    m = np.asarray(counts, dtype=float)
    if m.shape[0] != g.K:
        raise InputError("counts length does not match graph size")
    n = float(m.sum()) if n is None else float(n)
    K = g.K
    E = g.edges
    eu, ev = E[:, 0], E[:, 1]
    deg = g.degree.astype(float)
    e2 = g.two_hop_edge_counts().astype(float)
    closed = g.closed_neighborhoods()
    open_nb = g.neighbors()
    mV = np.array([m[c].sum() for c in closed])  # sum of m over closed neighborhood

    c1a = float(g.n_edges)
    c1b = float(np.sum(1.0 / (m[eu] * m[ev]))) if g.n_edges else 0.0
    c2 = float(np.sum(m * (m + deg) * (mV + e2)))
    c3 = 0.0
    for u, v in E:
        both = np.union1d(closed[u], closed[v])
        c3 += (m[u] + m[v] + deg[u] + deg[v]) * (m[both].sum() + e2[u] + e2[v])
    c4 = float(np.sum((deg - 2.0) ** 2 / (4.0 * m)) - (g.n_edges - K) ** 2 / n)

    union_total = float(np.sum(m * (m - 1) / 2) + np.sum(m[eu] * m[ev]))
    open_sum = np.array([m[x].sum() for x in open_nb])
    inner = np.array([np.sum(m[c] * (m[c] + open_sum[c])) for c in closed])
    c6 = float(np.sum(m**3 * mV * inner))
    c7 = 0.0
    for u, v in E:
        both = np.union1d(closed[u], closed[v])
        tail = sum(np.sum(m[w] * (m[w] + m[open_nb[w]])) for w in both)
        c7 += m[u] * m[v] * (m[u] * mV[u] + m[v] * mV[v]) * tail
    union_deg = (m - 1) + open_sum
    c8 = float(np.sum(m * union_deg**2) - 4.0 * union_total**2 / n)

    n32 = n**1.5
    rows = [
        ("C1: |C0|", c1a, n),
        ("C1: sum 1/(m_u m_v)", c1b, n),
        ("C2", c2, n32),
        ("C3", c3, n32),
        ("C4", c4, n),
        ("C5: |Gbar|", union_total, n),
        ("C6", c6, n32),
        ("C7", c7, n32),
        ("C8", c8, n),
    ]
    out = []
    for name, val, norm in rows:
        ratio = val / norm
        out.append(ConditionEntry(name, float(val), float(norm), float(ratio), abs(ratio) <= threshold))
    return out
