"""Exact permutation moments of the weighted edge counts.

Both edge counts are quadratic forms in the group-1 category counts
``x_k = n_{1k}(t)``, which follow a multivariate hypergeometric law under the
permutation null. Its factorial moments are

    E prod_k (x_k)_{r_k} = (t)_R / (n)_R * prod_k (m_k)_{r_k},   R = sum r_k,

i.e. the factorial moments of independent ``Binomial(m_k, z)`` variables with
``z**R`` replaced by ``(t)_R / (n)_R``. Moments are therefore computed once as
polynomials in ``z`` under the independent binomial model, where centring
kills all but a handful of overlap patterns (single categories, single
edges, triangles), and then mapped to any ``t``. Everything is carried out in
exact rational arithmetic; floats appear only in the returned profile.
"""

from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from itertools import combinations
from math import comb

import numpy as np

from .exceptions import DegenerateStatisticError, InputError

try:  # gmpy2 rationals are an order of magnitude faster than Fraction
    from gmpy2 import mpq as _Q
except ImportError:  # pragma: no cover
    _Q = Fraction

MODES = ("averaging", "union")


@dataclass(frozen=True)
class PairWeightScheme:
    """Observation-pair weights induced by a category graph.

    Every pair of observations in category ``k`` carries weight
    ``within[k]`` and every pair across a graph edge ``(u, v)`` carries
    ``cross[e]``. ``R1(t)`` is the total weight of pairs inside group 1.
    """

    mode: str
    counts: np.ndarray
    edges: np.ndarray
    within: tuple = field(repr=False)
    cross: tuple = field(repr=False)

    @property
    def K(self):
        return int(self.counts.shape[0])

    @property
    def n(self):
        return int(self.counts.sum())

    @property
    def total_weight(self):
        """Sum of all pair weights (exact)."""
        m = self.counts
        tot = sum((w * comb(int(mk), 2) for w, mk in zip(self.within, m)), _Q(0))
        for (u, v), b in zip(self.edges, self.cross):
            tot += b * int(m[u]) * int(m[v])
        return tot

    @property
    def node_weights(self):
        """Weighted degree of a single observation of each category (exact)."""
        m = self.counts
        D = [w * (int(mk) - 1) for w, mk in zip(self.within, m)]
        for (u, v), b in zip(self.edges, self.cross):
            D[u] += b * int(m[v])
            D[v] += b * int(m[u])
        return D

    def within_float(self):
        return np.array([float(w) for w in self.within])

    def cross_float(self):
        return np.array([float(b) for b in self.cross])

    def padded_neighbors(self):
        """Neighbor table for the scan kernel; row ``K`` is an inert padding node."""
        K = self.K
        nb = [[] for _ in range(K + 1)]
        wt = [[] for _ in range(K + 1)]
        for (u, v), b in zip(self.edges, self.cross_float()):
            nb[u].append(v)
            wt[u].append(b)
            nb[v].append(u)
            wt[v].append(b)
        width = max(1, max(len(x) for x in nb))
        nbr = np.full((K + 1, width), K, dtype=np.int64)
        w = np.zeros((K + 1, width))
        for k in range(K + 1):
            nbr[k, : len(nb[k])] = nb[k]
            w[k, : len(wt[k])] = wt[k]
        return nbr, w


def scheme_from(g, counts, mode="averaging"):
    """Pair weights for the averaging or the union statistic.

    Averaging uses ``2/m_k`` within a category and ``1/(m_u m_v)`` across a
    graph edge; union weights every such pair by one.
    """
    counts = np.asarray(counts, dtype=np.int64)
    if counts.shape[0] != g.K:
        raise InputError("counts length does not match graph size")
    if np.any(counts <= 0):
        raise InputError("every category needs a positive count")
    if mode == "averaging":
        within = tuple(_Q(2, int(mk)) for mk in counts)
        cross = tuple(_Q(1, int(counts[u]) * int(counts[v])) for u, v in g.edges)
    elif mode == "union":
        within = tuple(_Q(1) for _ in counts)
        cross = tuple(_Q(1) for _ in g.edges)
    else:
        raise InputError(f"unknown mode {mode!r}")
    return PairWeightScheme(mode, counts, g.edges, within, cross)


# -- polynomials in z, coefficient lists, lowest degree first ------------------


def _padd(*ps):
    size = max(len(p) for p in ps)
    out = [_Q(0)] * size
    for p in ps:
        for i, c in enumerate(p):
            out[i] += c
    return out


def _pscale(p, c):
    return [c * x for x in p]


def _pmul(p, r):
    out = [_Q(0)] * (len(p) + len(r) - 1)
    for i, a in enumerate(p):
        if a:
            for j, b in enumerate(r):
                out[i + j] += a * b
    return out


def _stirling2(j, r):
    if j == r:
        return 1
    if r == 0 or r > j:
        return 0
    return r * _stirling2(j - 1, r) + _stirling2(j - 1, r - 1)


def _falling(a, r):
    out = 1
    for i in range(r):
        out *= a - i
    return out


@lru_cache(maxsize=None)
def _binomial_central(m):
    """Central moments 2..6 of Binomial(m, z) as integer polynomials in z."""
    raw = [[_Q(1)]]
    for j in range(1, 7):
        p = [_Q(0)] * (j + 1)
        for r in range(1, j + 1):
            p[r] += _stirling2(j, r) * _falling(m, r)
        raw.append(p)
    minus_mu = [_Q(0), _Q(-m)]
    powers = [[_Q(1)]]
    for _ in range(6):
        powers.append(_pmul(powers[-1], minus_mu))
    cen = {}
    for j in range(2, 7):
        acc = [_Q(0)]
        for i in range(j + 1):
            acc = _padd(acc, _pscale(_pmul(raw[i], powers[j - i]), comb(j, i)))
        cen[j] = acc
    s, t3, e4, e5, e6 = (cen[j] for j in range(2, 7))
    k4 = _padd(e4, _pscale(_pmul(s, s), -1))
    k5 = _padd(e5, _pscale(_pmul(s, t3), -2))
    k6 = _padd(e6, _pscale(_pmul(s, e4), -3), _pscale(_pmul(_pmul(s, s), s), 2))
    return s, t3, k4, k5, k6


_Q_POLY = [0, 1, -1]  # z(1 - z)


def _binomial_model_moments(scheme, A, B, third):
    """Mean, variance and third central moment of ``A*R1 + B*L`` under
    independent Binomial(m_k, z) counts, as polynomials in z.

    ``L = sum_k D_k x_k`` is the linear part that links ``R1`` and ``R2``:
    ``R2 = W - L + R1`` where ``W`` is the total weight.
    """
    m = [int(x) for x in scheme.counts]
    K = len(m)
    alpha = [w / 2 for w in scheme.within]
    D = scheme.node_weights
    nb_mass = [_Q(0)] * K  # sum over neighbours of beta * m_v
    for (u, v), b in zip(scheme.edges, scheme.cross):
        nb_mass[u] += b * m[v]
        nb_mass[v] += b * m[u]

    a_poly = []
    bcoef = []
    for k in range(K):
        a0 = -A * alpha[k] + B * D[k]
        a1 = A * (2 * alpha[k] * m[k] + nb_mass[k])
        a_poly.append([a0, a1])
        bcoef.append(A * alpha[k])

    mean = [_Q(0), B * sum((D[k] * m[k] for k in range(K)), _Q(0)), A * scheme.total_weight]

    # per-multiplicity accumulators
    acc = {}
    for k in range(K):
        a, b = a_poly[k], bcoef[k]
        slot = acc.setdefault(m[k], {})
        a2 = _pmul(a, a)
        terms = {"a2": a2, "ab": _pscale(a, b), "b2": [b * b]}
        if third:
            terms.update(
                {
                    "a3": _pmul(a2, a),
                    "a2b": _pscale(a2, b),
                    "ab2": _pscale(a, b * b),
                    "b3": [b * b * b],
                }
            )
        for key, val in terms.items():
            slot[key] = _padd(slot.get(key, [_Q(0)]), val)

    var = [_Q(0)]
    third_m = [_Q(0)]
    for mk, slot in acc.items():
        s, t3, k4, k5, k6 = _binomial_central(mk)
        var = _padd(var, _pmul(slot["a2"], s), _pscale(_pmul(slot["ab"], t3), 2), _pmul(slot["b2"], k4))
        if third:
            third_m = _padd(
                third_m,
                _pmul(slot["a3"], t3),
                _pscale(_pmul(slot["a2b"], k4), 3),
                _pscale(_pmul(slot["ab2"], k5), 3),
                _pmul(slot["b3"], k6),
            )

    q = [_Q(c) for c in _Q_POLY]
    q2 = _pmul(q, q)
    edge_sq = sum((b * b * m[u] * m[v] for (u, v), b in zip(scheme.edges, scheme.cross)), _Q(0))
    var = _padd(var, _pscale(q2, A * A * edge_sq))
    if not third:
        return mean, var, None

    r_poly = []
    c_poly = []
    for k in range(K):
        s, t3, k4, _, _ = _binomial_central(m[k])
        r_poly.append(_padd(_pmul(a_poly[k], s), _pscale(t3, bcoef[k])))
        c_poly.append(_padd(_pmul(a_poly[k], t3), _pscale(k4, bcoef[k])))

    rr = [_Q(0)]
    sq_mass = [_Q(0)] * K
    cube = _Q(0)
    for (u, v), b in zip(scheme.edges, scheme.cross):
        rr = _padd(rr, _pscale(_pmul(r_poly[u], r_poly[v]), b))
        sq_mass[u] += b * b * m[v]
        sq_mass[v] += b * b * m[u]
        cube += b * b * b * m[u] * m[v]
    cs = [_Q(0)]
    for k in range(K):
        if sq_mass[k]:
            cs = _padd(cs, _pscale(c_poly[k], sq_mass[k]))
    third_m = _padd(third_m, _pscale(rr, 6 * A), _pscale(_pmul(cs, q), 3 * A * A))
    one_minus_2z = [_Q(1), _Q(-2)]
    t3_unit = _pmul(q, one_minus_2z)
    third_m = _padd(third_m, _pscale(_pmul(t3_unit, t3_unit), A**3 * cube))

    tri = _triangles(scheme)
    if tri:
        bmap = {(int(u), int(v)): b for (u, v), b in zip(scheme.edges, scheme.cross)}
        tri_mass = _Q(0)
        for u, v, w in tri:
            tri_mass += bmap[(u, v)] * bmap[(v, w)] * bmap[(u, w)] * m[u] * m[v] * m[w]
        third_m = _padd(third_m, _pscale(_pmul(q2, q), 6 * A**3 * tri_mass))
    return mean, var, third_m


def _triangles(scheme):
    nb = [set() for _ in range(scheme.K)]
    for u, v in scheme.edges:
        nb[int(u)].add(int(v))
        nb[int(v)].add(int(u))
    out = []
    for u, v in scheme.edges:
        u, v = int(u), int(v)
        for w in nb[u] & nb[v]:
            if w > v:
                out.append((u, v, w))
    return out


def _raw_polys(scheme, A, B, third):
    mu, var, cm3 = _binomial_model_moments(scheme, _Q(A), _Q(B), third)
    mu2 = _pmul(mu, mu)
    m1 = mu
    m2 = _padd(var, mu2)
    m3 = _padd(cm3, _pscale(_pmul(mu, var), 3), _pmul(mu2, mu)) if third else None
    return m1, m2, m3


@dataclass
class MixedMomentPolys:
    """Polynomials in z whose image under ``z**R -> (t)_R/(n)_R`` gives
    ``E[R1**a * L**b]`` at split ``t``; keys are ``(a, b)``."""

    n: int
    total_weight: object
    polys: dict

    def at(self, t):
        """Exact mixed raw moments at split ``t``."""
        n = self.n
        p = [_Q(1)]
        for r in range(1, 7):
            p.append(p[-1] * _Q(t - r + 1, n - r + 1) if t - r + 1 > 0 else _Q(0))
        out = {}
        for key, poly in self.polys.items():
            out[key] = sum((c * p[i] for i, c in enumerate(poly)), _Q(0))
        return out


def mixed_moment_polys(scheme, third=True):
    """Precompute everything that does not depend on the split point."""
    polys = {}
    q10 = _raw_polys(scheme, 1, 0, third)
    q01 = _raw_polys(scheme, 0, 1, third)
    q11 = _raw_polys(scheme, 1, 1, third)
    polys[(1, 0)], polys[(0, 1)] = q10[0], q01[0]
    polys[(2, 0)], polys[(0, 2)] = q10[1], q01[1]
    polys[(1, 1)] = _pscale(_padd(q11[1], _pscale(q10[1], -1), _pscale(q01[1], -1)), _Q(1, 2))
    if third:
        qm = _raw_polys(scheme, 1, -1, True)
        polys[(3, 0)], polys[(0, 3)] = q10[2], q01[2]
        polys[(2, 1)] = _pscale(_padd(q11[2], _pscale(qm[2], -1), _pscale(q01[2], -2)), _Q(1, 6))
        polys[(1, 2)] = _pscale(_padd(q11[2], qm[2], _pscale(q10[2], -2)), _Q(1, 6))
    return MixedMomentPolys(scheme.n, scheme.total_weight, polys)


def weight_w(n, t):
    """Weight on R2 in the weighted statistic; ``(t-1)/(n-2)``."""
    return _Q(t - 1, n - 2)


def exact_moments_at(mp, t, third=True):
    """Exact moments at split ``t`` as a dict of rationals.

    Keys: ``E1, E2, V1, V2, C12`` (edge counts), ``Ew, Vw, Ed, Vd, Cwd``
    (weighted and difference statistics) and, when ``third``, the third
    central moments ``K3w, K3d``.
    """
    n = mp.n
    W = mp.total_weight
    r = mp.at(t)
    EQ, EL = r[(1, 0)], r[(0, 1)]
    VQ = r[(2, 0)] - EQ * EQ
    VL = r[(0, 2)] - EL * EL
    CQL = r[(1, 1)] - EQ * EL
    w = weight_w(n, t)
    out = {
        "E1": EQ,
        "E2": W - EL + EQ,
        "V1": VQ,
        "V2": VQ - 2 * CQL + VL,
        "C12": VQ - CQL,
        # R_w = R1 - w L + w W ;  R_d = L - W
        "Ew": EQ - w * EL + w * W,
        "Vw": VQ - 2 * w * CQL + w * w * VL,
        "Ed": EL - W,
        "Vd": VL,
        "Cwd": CQL - w * VL,
    }
    if third:
        # central third moment of X = R1 - w L
        ex = EQ - w * EL
        ex2 = r[(2, 0)] - 2 * w * r[(1, 1)] + w * w * r[(0, 2)]
        ex3 = r[(3, 0)] - 3 * w * r[(2, 1)] + 3 * w * w * r[(1, 2)] - w**3 * r[(0, 3)]
        out["K3w"] = ex3 - 3 * ex * ex2 + 2 * ex**3
        out["K3d"] = r[(0, 3)] - 3 * EL * r[(0, 2)] + 2 * EL**3
    return out


@dataclass
class MomentProfile:
    """Float moments indexed by split ``t`` (arrays of length ``n + 1``;
    entries outside ``1 <= t <= n - 1`` are NaN)."""

    n: int
    mode: str
    E1: np.ndarray
    E2: np.ndarray
    V1: np.ndarray
    V2: np.ndarray
    C12: np.ndarray
    Ew: np.ndarray
    Vw: np.ndarray
    Ed: np.ndarray
    Vd: np.ndarray
    Cwd: np.ndarray
    gamma_w: np.ndarray
    gamma_d: np.ndarray
    total_weight: float

    def check_window(self, n0, n1):
        ts = np.arange(n0, n1 + 1)
        bad = ts[(self.Vw[ts] <= 0) | (self.Vd[ts] <= 0) | ~np.isfinite(self.Vw[ts])]
        if bad.size:
            raise DegenerateStatisticError(
                f"degenerate statistic: zero permutation variance at t={int(bad[0])}"
            )


def moment_profile(scheme, ts=None, skew=True):
    """Exact moment profile over the split points ``ts`` (default ``1..n-1``)."""
    n = scheme.n
    if n < 3:
        raise InputError("need at least three observations")
    ts = range(1, n) if ts is None else ts
    mp = mixed_moment_polys(scheme, third=skew)
    keys = ("E1", "E2", "V1", "V2", "C12", "Ew", "Vw", "Ed", "Vd", "Cwd")
    arrs = {k: np.full(n + 1, np.nan) for k in keys}
    gw = np.full(n + 1, np.nan)
    gd = np.full(n + 1, np.nan)
    for t in ts:
        if not 1 <= t <= n - 1:
            raise InputError(f"split t={t} outside [1, {n - 1}]")
        mo = exact_moments_at(mp, t, third=skew)
        for k in keys:
            arrs[k][t] = float(mo[k])
        if skew:
            gw[t] = _skew(mo["K3w"], mo["Vw"])
            gd[t] = _skew(mo["K3d"], mo["Vd"])
    return MomentProfile(n, scheme.mode, gamma_w=gw, gamma_d=gd, total_weight=float(mp.total_weight), **arrs)


def _skew(k3, var):
    if var <= 0:
        return np.nan
    return float(k3) / float(var) ** 1.5


def mean_var(scheme, t):
    """``(E[R1], E[R2], Var[R1], Var[R2], Cov[R1, R2])`` at split ``t`` as floats."""
    _check_t(scheme.n, t)
    mo = exact_moments_at(mixed_moment_polys(scheme, third=False), t, third=False)
    return tuple(float(mo[k]) for k in ("E1", "E2", "V1", "V2", "C12"))


def moments_rw_rd(scheme, t):
    """``(E[Rw], Var[Rw], E[Rd], Var[Rd])`` at split ``t``."""
    n = scheme.n
    if n < 3:
        raise InputError("need at least three observations")
    _check_t(n, t)
    mo = exact_moments_at(mixed_moment_polys(scheme, third=False), t, third=False)
    if mo["Vw"] <= 0 or mo["Vd"] <= 0:
        raise DegenerateStatisticError(f"degenerate statistic at t={t}")
    return tuple(float(mo[k]) for k in ("Ew", "Vw", "Ed", "Vd"))


def skewness(scheme, t):
    """``(gamma_w, gamma_d)``: third moments of the standardized statistics at ``t``."""
    _check_t(scheme.n, t)
    mo = exact_moments_at(mixed_moment_polys(scheme, third=True), t, third=True)
    if mo["Vw"] <= 0 or mo["Vd"] <= 0:
        raise DegenerateStatisticError(f"degenerate statistic at t={t}")
    return _skew(mo["K3w"], mo["Vw"]), _skew(mo["K3d"], mo["Vd"])


def _check_t(n, t):
    if not 1 <= t <= n - 1:
        raise InputError(f"split t={t} outside [1, {n - 1}]")


def monte_carlo_skewness(seq, scheme, n_permutations=2000, random_state=None, ts=None):
    """Permutation estimate of ``(gamma_w, gamma_d)`` profiles (length ``n + 1``)."""
    from ._kernel import permuted_labels, prefix_edge_weights

    n = seq.n
    ts = np.arange(1, n) if ts is None else np.asarray(ts)
    labels = permuted_labels(seq.labels, n_permutations, random_state)
    r1, lam = prefix_edge_weights(labels, scheme)
    W = float(scheme.total_weight)
    t = np.arange(1, n + 1)
    w = (t - 1) / (n - 2)
    rw = r1 - w * lam + w * W
    rd = lam - W
    gw = np.full(n + 1, np.nan)
    gd = np.full(n + 1, np.nan)
    for arr, out in ((rw, gw), (rd, gd)):
        c = arr - arr.mean(axis=0)
        sd = c.std(axis=0)
        with np.errstate(invalid="ignore", divide="ignore"):
            g = (c**3).mean(axis=0) / sd**3
        out[1 : n + 1] = g
        out[n] = np.nan
    mask = np.zeros(n + 1, dtype=bool)
    mask[ts] = True
    gw[~mask] = np.nan
    gd[~mask] = np.nan
    return gw, gd


# -- exhaustive enumeration --------------------------------------------------


def observation_weights(labels, g, mode):
    """Dense observation-level pair-weight matrix (small ``n`` only)."""
    labels = np.asarray(labels)
    n = labels.size
    counts = np.bincount(labels, minlength=g.K)
    adj = set()
    for u, v in g.edges:
        adj.add((int(u), int(v)))
        adj.add((int(v), int(u)))
    A = [[Fraction(0)] * n for _ in range(n)]
    for i in range(n):
        for j in range(n):
            if i == j:
                continue
            a, b = int(labels[i]), int(labels[j])
            if a == b:
                A[i][j] = Fraction(2, int(counts[a])) if mode == "averaging" else Fraction(1)
            elif (a, b) in adj:
                A[i][j] = Fraction(1, int(counts[a] * counts[b])) if mode == "averaging" else Fraction(1)
    return A


@dataclass
class ExhaustiveDistribution:
    """All equally likely values of ``(R1, R2)`` at one split, as exact rationals."""

    n: int
    t: int
    r1: list
    r2: list

    def moments(self):
        N = len(self.r1)
        E1 = sum(self.r1, Fraction(0)) / N
        E2 = sum(self.r2, Fraction(0)) / N
        V1 = sum(((x - E1) ** 2 for x in self.r1), Fraction(0)) / N
        V2 = sum(((x - E2) ** 2 for x in self.r2), Fraction(0)) / N
        C = sum(((x - E1) * (y - E2) for x, y in zip(self.r1, self.r2)), Fraction(0)) / N
        return {"E1": E1, "E2": E2, "V1": V1, "V2": V2, "C12": C}

    def statistic_moments(self):
        """Exact mean/variance/skewness of the weighted and difference statistics."""
        n, t = self.n, self.t
        w = Fraction(t - 1, n - 2)
        rw = [(1 - w) * a + w * b for a, b in zip(self.r1, self.r2)]
        rd = [a - b for a, b in zip(self.r1, self.r2)]
        out = {}
        for name, vals in (("w", rw), ("d", rd)):
            N = len(vals)
            mu = sum(vals, Fraction(0)) / N
            var = sum(((x - mu) ** 2 for x in vals), Fraction(0)) / N
            k3 = sum(((x - mu) ** 3 for x in vals), Fraction(0)) / N
            out["E" + name] = mu
            out["V" + name] = var
            out["gamma_" + name] = float(k3) / float(var) ** 1.5 if var > 0 else float("nan")
        return out


def exhaustive_oracle(labels, g, mode, t, max_n=12):
    """Enumerate all ``C(n, t)`` group-1 position sets at split ``t``.

    Works from the observation-level weight matrix and shares no code with
    the closed-form engine.
    """
    labels = np.asarray(labels)
    n = labels.size
    if n > max_n:
        raise InputError(f"n={n} too large for enumeration (max {max_n})")
    A = observation_weights(labels, g, mode)
    r1, r2 = [], []
    everyone = set(range(n))
    for grp in combinations(range(n), t):
        rest = sorted(everyone.difference(grp))
        r1.append(sum((A[i][j] for i, j in combinations(grp, 2)), Fraction(0)))
        r2.append(sum((A[i][j] for i, j in combinations(rest, 2)), Fraction(0)))
    return ExhaustiveDistribution(n, t, r1, r2)
