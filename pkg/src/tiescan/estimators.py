"""Scikit-learn style front end.

>>> import numpy as np
>>> from tiescan import GraphChangePointDetector
>>> rng = np.random.default_rng(0)
>>> X = np.vstack([rng.multinomial(10, [0.2, 0.3, 0.3, 0.2], 50),
...                rng.multinomial(10, [0.4, 0.3, 0.2, 0.1], 50)])
>>> det = GraphChangePointDetector(statistic="S").fit(X)
>>> abs(det.change_point_ - 50) <= 5
True
"""

from collections import deque

import numpy as np
from sklearn.base import BaseEstimator, clone

from . import analytic
from ._validation import (
    GRAPHS,
    INFERENCE,
    METRICS,
    MODES,
    check_alpha,
    check_choice,
    check_observations,
    check_statistics,
)
from .exceptions import ConfigError, DegenerateStatisticError, InputError
from .graph import build_graph, condition_diagnostics, from_edge_list, pairwise_distances, quantize_distances
from .moments import monte_carlo_skewness, moment_profile, scheme_from
from .permutation import exhaustive_pvalue, interval_permutation_pvalue, permutation_samples, add_one_pvalue
from .scan import (
    basic_quantity_profile,
    changed_interval_scan,
    default_window,
    single_change_scan,
    standardize,
)
from .sequence import categorize


def _tail_name(stat):
    return "Zw" if stat == "Zw" else stat


class _GraphBase(BaseEstimator):
    def _prepare(self, X):
        check_choice(self.mode, MODES, "mode")
        check_choice(self.graph, GRAPHS + ("user-edges",), "graph")
        check_choice(self.metric, METRICS, "metric")
        obs = check_observations(X)
        seq = categorize(obs)
        if seq.K < 2:
            raise DegenerateStatisticError("degenerate statistic: all observations are identical")
        if self.graph == "user-edges":
            if self.edges is None:
                raise ConfigError("graph='user-edges' requires edges")
            g = from_edge_list(seq.K, self.edges)
        else:
            dist = quantize_distances(pairwise_distances(seq.representatives, self.metric), self.quantize)
            g = build_graph(dist, self.graph)
        return seq, g


class GraphChangePointDetector(_GraphBase):
    """Single change-point detection for sequences with repeated observations.

    Parameters
    ----------
    statistic : {"Zw", "S", "M"}, list of them, or "all"
        Scan statistic(s). The first one drives ``change_point_``.
    mode : {"averaging", "union"}
        How optimal graphs induced by repeated observations are combined.
    graph : {"nnl", "mst", "union-msts", "user-edges"}
        Similarity graph on the distinct values.
    metric : {"euclidean", "l1", "hamming", "normalized-frobenius"}
    n0, n1 : int, optional
        Scan window; defaults to ``ceil(0.05 n)`` and ``n - n0``.
    inference : {"analytic", "analytic-skew", "permutation", "exhaustive"}
    n_permutations : int
    alpha : float
        Level used by :meth:`fit_predict`.
    exact_skewness : bool
        If False, skewness is estimated from ``skew_permutations`` permutations.
    quantize : int, optional
        Round distances to this many decimals before building the graph.
    edges : array-like, optional
        Category pairs for ``graph="user-edges"``.

    Attributes
    ----------
    change_point_ : int
        Estimated change point ``t``: observations ``1..t`` form group 1.
    max_statistic_ : float
    pvalue_ : float
    results_ : dict
        Per statistic: ``max``, ``tau``, ``pvalue`` and all computed p-values.
    profile_ : ScanProfile
    moments_ : MomentProfile
    """

    def __init__(
        self,
        statistic="S",
        mode="averaging",
        graph="nnl",
        metric="euclidean",
        n0=None,
        n1=None,
        inference="analytic-skew",
        n_permutations=1000,
        alpha=0.05,
        random_state=0,
        n_jobs=1,
        exact_skewness=True,
        skew_permutations=2000,
        quantize=None,
        edges=None,
        panels=1024,
    ):
        self.statistic = statistic
        self.mode = mode
        self.graph = graph
        self.metric = metric
        self.n0 = n0
        self.n1 = n1
        self.inference = inference
        self.n_permutations = n_permutations
        self.alpha = alpha
        self.random_state = random_state
        self.n_jobs = n_jobs
        self.exact_skewness = exact_skewness
        self.skew_permutations = skew_permutations
        self.quantize = quantize
        self.edges = edges
        self.panels = panels

    def fit(self, X, y=None):
        stats = check_statistics(self.statistic)
        check_choice(self.inference, INFERENCE, "inference")
        check_alpha(self.alpha)
        seq, g = self._prepare(X)
        n = seq.n
        n0, n1 = default_window(n, self.n0, self.n1)
        scheme = scheme_from(g, seq.counts, self.mode)
        want_skew = self.inference == "analytic-skew" and any(s != "S" for s in stats)
        moments = moment_profile(scheme, range(1, n), skew=want_skew and self.exact_skewness)
        if want_skew and not self.exact_skewness:
            moments.gamma_w, moments.gamma_d = monte_carlo_skewness(
                seq, scheme, self.skew_permutations, self.random_state
            )
        moments.check_window(n0, n1)
        R1, R2 = basic_quantity_profile(seq, scheme)
        profile = standardize(R1, R2, moments, n0, n1)

        results = {}
        perm = None
        if self.inference == "permutation":
            perm = permutation_samples(
                seq, scheme, moments, [(n0, n1)], stats, self.n_permutations, self.random_state, self.n_jobs
            )
        for stat in stats:
            est = single_change_scan(profile, stat, self.mode)
            pvals = {}
            inapplicable = 0
            if self.inference in ("analytic", "analytic-skew"):
                b = est.max_value
                if b > 0:
                    pvals["analytic"] = analytic.pvalue_single(stat, b, n, n0, n1, panels=self.panels).value
                    if self.inference == "analytic-skew" and stat != "S":
                        ap = analytic.pvalue_single(
                            stat, b, n, n0, n1, moments.gamma_w, moments.gamma_d, panels=self.panels
                        )
                        pvals["analytic_skew"] = ap.value
                        inapplicable = ap.inapplicable
                else:
                    pvals["analytic"] = 1.0
                    if self.inference == "analytic-skew" and stat != "S":
                        pvals["analytic_skew"] = 1.0
                p = pvals.get("analytic_skew", pvals["analytic"])
            elif self.inference == "permutation":
                sample = perm[(stat, (n0, n1))]
                p = pvals["permutation"] = add_one_pvalue(est.max_value, sample)
            else:
                p, _, _ = exhaustive_pvalue(seq, scheme, moments, (n0, n1), stat)
                pvals["exhaustive"] = p
            results[stat] = {
                "max": est.max_value,
                "tau": est.tau,
                "pvalue": p,
                "pvalues": pvals,
                "skew_inapplicable": inapplicable,
            }

        self.sequence_ = seq
        self.graph_ = g
        self.scheme_ = scheme
        self.moments_ = moments
        self.window_ = (n0, n1)
        self.profile_ = profile
        self.results_ = results
        self.n_, self.K_ = n, seq.K
        first = results[stats[0]]
        self.change_point_ = first["tau"]
        self.max_statistic_ = first["max"]
        self.pvalue_ = first["pvalue"]
        return self

    def fit_predict(self, X, y=None):
        """Segment labels: 0 up to the change point, 1 after it (all 0 if not significant)."""
        self.fit(X)
        labels = np.zeros(self.n_, dtype=np.int64)
        if self.pvalue_ < self.alpha:
            labels[self.change_point_ :] = 1
        return labels

    def transform(self, X):
        """``(n, 4)`` array of ``Zw, Zd, S, M`` per split ``t = 1..n``; NaN outside the window."""
        self.fit(X)
        out = np.full((self.n_, 4), np.nan)
        p = self.profile_
        out[p.t - 1] = np.column_stack([p.Zw, p.Zd, p.S, p.M])
        return out

    def conditions(self, threshold=10.0):
        return condition_diagnostics(self.graph_, self.sequence_.counts, self.n_, threshold)


class ChangedIntervalDetector(_GraphBase):
    """Changed-interval detection; inference by permutation only.

    The estimated interval ``(t1, t2)`` means observations ``t1..t2-1``
    (1-based) differ from the rest.
    """

    def __init__(
        self,
        statistic="S",
        mode="averaging",
        graph="nnl",
        metric="euclidean",
        n0=None,
        n1=None,
        n_permutations=200,
        alpha=0.05,
        random_state=0,
        n_jobs=1,
        quantize=None,
        edges=None,
    ):
        self.statistic = statistic
        self.mode = mode
        self.graph = graph
        self.metric = metric
        self.n0 = n0
        self.n1 = n1
        self.n_permutations = n_permutations
        self.alpha = alpha
        self.random_state = random_state
        self.n_jobs = n_jobs
        self.quantize = quantize
        self.edges = edges

    def fit(self, X, y=None):
        (stat,) = check_statistics(self.statistic)
        check_alpha(self.alpha)
        seq, g = self._prepare(X)
        n = seq.n
        n0, n1 = default_window(n, self.n0, self.n1)
        scheme = scheme_from(g, seq.counts, self.mode)
        moments = moment_profile(scheme, range(1, n), skew=False)
        moments.check_window(n0, n1)
        est = changed_interval_scan(seq, scheme, moments, n0, n1, stat, self.mode)
        p, _, _ = interval_permutation_pvalue(
            seq, scheme, moments, n0, n1, stat, self.n_permutations, self.random_state, self.n_jobs
        )
        self.sequence_, self.graph_, self.scheme_, self.moments_ = seq, g, scheme, moments
        self.window_ = (n0, n1)
        self.n_, self.K_ = n, seq.K
        self.interval_ = est.tau
        self.max_statistic_ = est.max_value
        self.pvalue_ = p
        return self

    def fit_predict(self, X, y=None):
        """1 inside the detected interval, 0 elsewhere (all 0 if not significant)."""
        self.fit(X)
        labels = np.zeros(self.n_, dtype=np.int64)
        if self.pvalue_ < self.alpha:
            t1, t2 = self.interval_
            labels[t1 - 1 : t2 - 1] = 1
        return labels


class BinarySegmentation(BaseEstimator):
    """Recursive single change-point detection.

    Parameters
    ----------
    detector : GraphChangePointDetector
        Template; cloned for every segment. Window parameters are
        recomputed per segment unless set explicitly on the template.
    threshold : float
        A segment is split when its p-value is below this.
    min_segment_length : int, optional
        Segments shorter than this are not tested; defaults to
        ``2 * ceil(0.05 n)``.

    Attributes
    ----------
    change_points_ : list of int
        Global change points in detection order.
    tree_ : list of dict
        One node per tested segment: ``start``, ``stop`` (0-based,
        half-open), ``depth``, ``tau``, ``pvalue``, ``split``, ``order``.
    """

    def __init__(self, detector=None, threshold=0.001, min_segment_length=None):
        self.detector = detector
        self.threshold = threshold
        self.min_segment_length = min_segment_length

    def fit(self, X, y=None):
        obs = check_observations(X)
        n = len(obs)
        base = self.detector if self.detector is not None else GraphChangePointDetector()
        min_len = self.min_segment_length or 2 * int(np.ceil(0.05 * n))
        min_len = max(min_len, 4)
        queue = deque([(0, n, 0)])
        tree, found = [], []
        while queue:
            start, stop, depth = queue.popleft()
            if stop - start < min_len:
                continue
            node = {"start": start, "stop": stop, "depth": depth, "tau": None, "pvalue": None, "split": False}
            try:
                det = clone(base).fit(obs[start:stop])
            except (DegenerateStatisticError, ConfigError, InputError) as exc:
                node["error"] = str(exc)
                tree.append(node)
                continue
            node["tau"] = start + det.change_point_
            node["pvalue"] = det.pvalue_
            if det.pvalue_ < self.threshold:
                node["split"] = True
                node["order"] = len(found) + 1
                found.append(node["tau"])
                queue.append((start, node["tau"], depth + 1))
                queue.append((node["tau"], stop, depth + 1))
            tree.append(node)
        self.change_points_ = found
        self.tree_ = tree
        self.depth_ = max((nd["depth"] + 1 for nd in tree if nd["split"]), default=0)
        return self

    def fit_predict(self, X, y=None):
        """Segment index of each observation."""
        self.fit(X)
        n = len(check_observations(X))
        labels = np.zeros(n, dtype=np.int64)
        for cp in sorted(self.change_points_):
            labels[cp:] += 1
        return labels


def shared_change_points(first, second, radius=2):
    """Change points found by both approaches.

    A pair ``(a, b)`` is shared when both lie within ``radius`` of
    ``floor((a + b) / 2)``, which becomes the shared location. Each point
    is used at most once; closest pairs are matched first.
    """
    pairs = []
    for i, a in enumerate(first):
        for j, b in enumerate(second):
            loc = (a + b) // 2
            if abs(a - loc) <= radius and abs(b - loc) <= radius:
                pairs.append((abs(a - b), i, j, loc))
    used_a, used_b, out = set(), set(), []
    for _, i, j, loc in sorted(pairs):
        if i not in used_a and j not in used_b:
            used_a.add(i)
            used_b.add(j)
            out.append(loc)
    return sorted(out)
