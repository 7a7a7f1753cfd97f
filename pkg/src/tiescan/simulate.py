"""Synthetic sequences with planted changes and power studies."""

import csv
import io
import json
from dataclasses import asdict, dataclass, field

import numpy as np

from .exceptions import ConfigError, TiescanError


@dataclass(frozen=True)
class MultinomialSpec:
    """Multinomial count vectors whose cell probabilities switch at a change.

    ``tau`` is a single change point (observations ``tau+1..n`` use
    ``probs_after``), an interval ``(t1, t2)`` (observations ``t1..t2-1``
    use ``probs_after``) or ``None`` for the null.
    """

    size: int = 10
    probs_before: tuple = (0.2, 0.3, 0.3, 0.2)
    probs_after: tuple = (0.4, 0.3, 0.2, 0.1)
    n: int = 100
    tau: object = 50

    def __post_init__(self):
        for p in (self.probs_before, self.probs_after):
            p = np.asarray(p, dtype=float)
            if np.any(p < 0) or not np.isclose(p.sum(), 1.0):
                raise ConfigError("invalid probs: must be non-negative and sum to 1")
        if len(self.probs_before) != len(self.probs_after):
            raise ConfigError("invalid probs: length mismatch")
        _check_tau(self.tau, self.n)


ENCODINGS = ("binary-loops", "simple", "multigraph")


@dataclass(frozen=True)
class ConfigModelSpec:
    """Sequence of configuration-model networks with a degree change.

    ``change`` is ``"equal"`` (two nodes get degree 4) or ``"random"`` (two
    nodes get degrees drawn from {3, 4, 5}, redrawn until the degree sum is
    even). All other degrees are ``base_degree``. ``encoding`` selects how
    the stub multigraph becomes an adjacency matrix, see
    :func:`config_model_graph`.
    """

    v: int = 6
    n: int = 200
    tau: object = 100
    change: str = "equal"
    base_degree: int = 2
    encoding: str = "binary-loops"

    def __post_init__(self):
        if self.v < 2:
            raise ConfigError("need at least two vertices")
        if self.change not in ("equal", "random"):
            raise ConfigError(f"unknown degree change {self.change!r}")
        if self.encoding not in ENCODINGS:
            raise ConfigError(f"unknown encoding {self.encoding!r}")
        _check_tau(self.tau, self.n)


def _check_tau(tau, n):
    if tau is None:
        return
    if isinstance(tau, (tuple, list)):
        t1, t2 = tau
        if not 1 <= t1 < t2 <= n + 1:
            raise ConfigError("interval outside the sequence")
    elif not 0 < int(tau) < n:
        raise ConfigError("change point must satisfy 0 < tau < n")


def _after_mask(n, tau):
    idx = np.arange(1, n + 1)
    if tau is None:
        return np.zeros(n, dtype=bool)
    if isinstance(tau, (tuple, list)):
        return (idx >= tau[0]) & (idx < tau[1])
    return idx > tau


def gen_multinomial_sequence(spec, rng=None):
    """``(n, d)`` integer array of multinomial draws."""
    rng = np.random.default_rng(rng)
    after = _after_mask(spec.n, spec.tau)
    out = np.empty((spec.n, len(spec.probs_before)), dtype=np.int64)
    out[~after] = rng.multinomial(spec.size, spec.probs_before, size=int((~after).sum()))
    out[after] = rng.multinomial(spec.size, spec.probs_after, size=int(after.sum()))
    return out


def stub_matching(degrees, rng):
    """Uniform perfect matching of degree stubs; returns an ``(E, 2)`` array of pairs."""
    degrees = np.asarray(degrees, dtype=np.int64)
    if degrees.sum() % 2:
        raise ConfigError("odd degree sum")
    stubs = np.repeat(np.arange(degrees.size), degrees)
    rng.shuffle(stubs)
    return stubs.reshape(-1, 2)


def config_model_graph(degrees, rng=None, encoding="binary-loops"):
    """Adjacency matrix of one configuration-model draw.

    Parameters
    ----------
    degrees : array-like of int
    rng : seed or Generator
    encoding : {"binary-loops", "simple", "multigraph"}
        ``"binary-loops"`` merges parallel edges into 0/1 entries and keeps
        a self-loop as a 1 on the diagonal. ``"simple"`` additionally drops
        self-loops. ``"multigraph"`` keeps pairing counts, with the diagonal
        holding twice the number of self-loops so row sums equal degrees.
    """
    if encoding not in ENCODINGS:
        raise ConfigError(f"unknown encoding {encoding!r}")
    rng = np.random.default_rng(rng)
    v = len(degrees)
    pairs = stub_matching(degrees, rng)
    A = np.zeros((v, v), dtype=np.int64)
    np.add.at(A, (pairs[:, 0], pairs[:, 1]), 1)
    np.add.at(A, (pairs[:, 1], pairs[:, 0]), 1)
    if encoding != "multigraph":
        A = (A > 0).astype(np.int64)
        if encoding == "simple":
            np.fill_diagonal(A, 0)
    return A


def degree_sequences(spec, rng):
    before = np.full(spec.v, spec.base_degree, dtype=np.int64)
    after = before.copy()
    if spec.change == "equal":
        after[:2] = 4
    else:
        while True:
            after[:2] = rng.integers(3, 6, size=2)
            if after.sum() % 2 == 0:
                break
    return before, after


def gen_config_model_sequence(spec, rng=None):
    """``(n, v, v)`` stack of adjacency matrices."""
    rng = np.random.default_rng(rng)
    before, after = degree_sequences(spec, rng)
    mask = _after_mask(spec.n, spec.tau)
    return np.stack([config_model_graph(after if a else before, rng, spec.encoding) for a in mask])


SCENARIOS = {
    "S1": ConfigModelSpec(tau=100, change="equal"),
    "S2": ConfigModelSpec(tau=100, change="random"),
    "S3": ConfigModelSpec(tau=170, change="equal"),
    "S4": ConfigModelSpec(tau=170, change="random"),
    "null": ConfigModelSpec(tau=None),
}


@dataclass
class PowerRow:
    scenario: str
    statistic: str
    mode: str
    replicates: int
    rejections: int
    located: int
    failures: int = 0

    @property
    def power(self):
        return self.rejections / self.replicates if self.replicates else float("nan")

    @property
    def loc_acc(self):
        return self.located / self.replicates if self.replicates else float("nan")


@dataclass
class PowerTable:
    rows: list = field(default_factory=list)
    errors: list = field(default_factory=list)

    def get(self, scenario, statistic, mode):
        for r in self.rows:
            if (r.scenario, r.statistic, r.mode) == (scenario, statistic, mode):
                return r
        raise KeyError((scenario, statistic, mode))

    def to_csv(self):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["scenario", "statistic", "mode", "power", "loc_acc"])
        for r in self.rows:
            w.writerow([r.scenario, r.statistic, r.mode, f"{r.power:.4f}", f"{r.loc_acc:.4f}"])
        return buf.getvalue()

    def to_json(self):
        rows = [dict(asdict(r), power=r.power, loc_acc=r.loc_acc) for r in self.rows]
        return json.dumps({"schema_version": "1", "rows": rows, "errors": self.errors}, indent=2, sort_keys=True)


def power_study(
    scenarios,
    replicates=100,
    random_state=0,
    alpha=0.05,
    inference="analytic-skew",
    statistics=("Zw", "S", "M"),
    modes=("averaging", "union"),
    tolerance=20,
    n_permutations=500,
):
    """Rejection and location-accuracy counts for each scenario.

    Parameters
    ----------
    scenarios : dict
        Name to :class:`ConfigModelSpec` or :class:`MultinomialSpec`.
    inference : {"analytic", "analytic-skew", "permutation"}
        How the 0.05-level decision is made. The generalized statistic is
        never skewness corrected.
    tolerance : int
        A rejection counts as located when ``|tau_hat - tau| <= tolerance``.

    Replicate ``r`` of scenario ``j`` uses ``default_rng([random_state, j, r])``.
    Replicates that raise are reported in ``errors`` and count as
    non-rejections.
    """
    from .estimators import GraphChangePointDetector

    table = PowerTable()
    for j, (name, spec) in enumerate(scenarios.items()):
        counts = {(s, m): [0, 0] for s in statistics for m in modes}
        failures = 0
        for rep in range(replicates):
            rng = np.random.default_rng([int(random_state), j, rep])
            try:
                if isinstance(spec, ConfigModelSpec):
                    X = gen_config_model_sequence(spec, rng)
                    metric = "normalized-frobenius"
                else:
                    X = gen_multinomial_sequence(spec, rng)
                    metric = "euclidean"
                seed = int(rng.integers(2**32))
                outcome = {}
                for mode in modes:
                    det = GraphChangePointDetector(
                        statistic=list(statistics),
                        mode=mode,
                        metric=metric,
                        graph="nnl",
                        inference=inference,
                        n_permutations=n_permutations,
                        random_state=seed,
                    ).fit(X)
                    for stat in statistics:
                        res = det.results_[stat]
                        rejected = res["pvalue"] < alpha
                        located = rejected and spec.tau is not None and abs(res["tau"] - spec.tau) <= tolerance
                        outcome[(stat, mode)] = (rejected, located)
            except TiescanError as exc:
                failures += 1
                table.errors.append({"scenario": name, "replicate": rep, "error": str(exc)})
                continue
            # commit only once every mode went through
            for key, (rejected, located) in outcome.items():
                counts[key][0] += int(rejected)
                counts[key][1] += int(located)
        for (stat, mode), (rej, loc) in counts.items():
            table.rows.append(PowerRow(name, stat, mode, replicates, rej, loc, failures))
    return table
