from fractions import Fraction

import numpy as np
import pytest

from conftest import random_tied_observations, seq_and_graph
from tiescan import DegenerateStatisticError, InputError
from tiescan.graph import BaseGraph
from tiescan.moments import (
    exact_moments_at,
    exhaustive_oracle,
    mean_var,
    mixed_moment_polys,
    moment_profile,
    moments_rw_rd,
    monte_carlo_skewness,
    scheme_from,
    skewness,
    weight_w,
)
from tiescan.sequence import from_labels


def frac(x):
    return Fraction(int(x.numerator), int(x.denominator))


def path(K):
    return BaseGraph(K, np.array([[i, i + 1] for i in range(K - 1)]))


def _oracle_cov_wd(dist):
    n, t = dist.n, dist.t
    w = Fraction(t - 1, n - 2)
    rw = [(1 - w) * a + w * b for a, b in zip(dist.r1, dist.r2)]
    rd = [a - b for a, b in zip(dist.r1, dist.r2)]
    N = len(rw)
    mw, md = sum(rw) / N, sum(rd) / N
    return sum((a - mw) * (b - md) for a, b in zip(rw, rd)) / N


def test_scheme_weights_example():
    seq = from_labels([0, 0, 1, 2])
    s = scheme_from(path(3), seq.counts, "averaging")
    assert s.within_float().tolist() == [1.0, 2.0, 2.0]
    assert s.cross_float().tolist() == [0.5, 1.0]
    u = scheme_from(path(3), seq.counts, "union")
    assert u.within_float().tolist() == [1.0, 1.0, 1.0]
    assert u.cross_float().tolist() == [1.0, 1.0]


def test_total_weight_identities():
    m = np.array([3, 1, 2, 4])
    g = BaseGraph(4, np.array([[0, 1], [1, 2], [1, 3], [2, 3]]))
    n, K = m.sum(), 4
    assert scheme_from(g, m, "averaging").total_weight == (n - K) + g.n_edges
    union = sum(int(k) * (int(k) - 1) // 2 for k in m) + sum(int(m[a] * m[b]) for a, b in g.edges)
    assert scheme_from(g, m, "union").total_weight == union


def test_single_category_total_weight():
    g = BaseGraph(1, np.zeros((0, 2), dtype=int))
    assert scheme_from(g, [7], "averaging").total_weight == 6
    assert scheme_from(g, [7], "union").total_weight == 21


def test_zero_count_rejected():
    with pytest.raises(InputError):
        scheme_from(path(2), [0, 2], "averaging")


def test_no_repeats_schemes_coincide():
    m = np.ones(5, dtype=int)
    a = mixed_moment_polys(scheme_from(path(5), m, "averaging"))
    u = mixed_moment_polys(scheme_from(path(5), m, "union"))
    for t in range(1, 5):
        assert exact_moments_at(a, t) == exact_moments_at(u, t)


@pytest.mark.parametrize("mode", ["averaging", "union"])
def test_n6_example_against_enumeration(mode):
    labels = [0, 0, 1, 1, 2, 2]
    g = path(3)
    seq = from_labels(labels)
    mp = mixed_moment_polys(scheme_from(g, seq.counts, mode))
    t = 3
    exact = exact_moments_at(mp, t)
    dist = exhaustive_oracle(labels, g, mode, t)
    for k, v in dist.moments().items():
        assert frac(exact[k]) == v
    sm = dist.statistic_moments()
    gw, gd = skewness(scheme_from(g, seq.counts, mode), t)
    assert gw == pytest.approx(sm["gamma_w"], abs=1e-12)
    assert gd == pytest.approx(sm["gamma_d"], abs=1e-12)
    # symmetric split: the difference statistic is centred
    assert exact["Ed"] == 0
    assert weight_w(6, 3) == Fraction(2, 4)


def test_n7_union_skewness_against_enumeration():
    labels = [0, 0, 0, 1, 1, 2, 2]
    seq, g = seq_and_graph(np.array([0, 0, 0, 1, 1, 3, 3])[:, None], "nnl")
    assert seq.labels.tolist() == labels
    gw, gd = skewness(scheme_from(g, seq.counts, "union"), 2)
    sm = exhaustive_oracle(labels, g, "union", 2).statistic_moments()
    assert gw == pytest.approx(sm["gamma_w"], abs=1e-10)
    assert gd == pytest.approx(sm["gamma_d"], abs=1e-10)


def test_averaging_mean_formula():
    seq = from_labels([0, 1, 0, 2, 1, 1, 3, 0])
    g = BaseGraph(4, np.array([[0, 1], [1, 2], [2, 3], [0, 3]]))
    s = scheme_from(g, seq.counts, "averaging")
    n, K, E = 8, 4, 4
    for t in range(1, n):
        E1 = mean_var(s, t)[0]
        assert E1 == pytest.approx(t * (t - 1) * (n - K + E) / (n * (n - 1)), abs=1e-12)


def test_t_equals_one():
    seq = from_labels([0, 1, 0, 2, 1])
    s = scheme_from(path(3), seq.counts, "union")
    E1, _, V1, _, _ = mean_var(s, 1)
    assert E1 == 0 and V1 == 0


def test_endpoint_weights():
    assert weight_w(10, 1) == 0
    assert weight_w(10, 9) == 1


@pytest.mark.parametrize("seed", range(12))
def test_random_small_sequences_match_enumeration(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(5, 10))
    X = random_tied_observations(rng, n)
    kind = ("mst", "nnl", "union-msts")[seed % 3]
    seq, g = seq_and_graph(X, kind)
    for mode in ("averaging", "union"):
        scheme = scheme_from(g, seq.counts, mode)
        mp = mixed_moment_polys(scheme)
        for t in range(1, n):
            exact = exact_moments_at(mp, t)
            dist = exhaustive_oracle(seq.labels, g, mode, t)
            for k, v in dist.moments().items():
                assert frac(exact[k]) == v
            assert frac(exact["Cwd"]) == _oracle_cov_wd(dist)
            sm = dist.statistic_moments()
            if sm["Vw"] > 0:
                g3 = float(exact["K3w"]) / float(exact["Vw"]) ** 1.5
                assert g3 == pytest.approx(sm["gamma_w"], abs=1e-10)


def test_reflection_antisymmetry_of_gamma_d(rng):
    X = random_tied_observations(rng, 30, levels=3)
    seq, g = seq_and_graph(X, "union-msts")
    for mode in ("averaging", "union"):
        mp = moment_profile(scheme_from(g, seq.counts, mode))
        t = np.arange(2, 29)
        np.testing.assert_allclose(mp.gamma_d[t], -mp.gamma_d[30 - t], atol=1e-12)
        np.testing.assert_allclose(mp.Ed[t], -mp.Ed[30 - t], atol=1e-9)


def test_mean_monotone_and_variances_positive(rng):
    X = random_tied_observations(rng, 40, levels=3)
    seq, g = seq_and_graph(X, "nnl")
    for mode in ("averaging", "union"):
        mp = moment_profile(scheme_from(g, seq.counts, mode), skew=False)
        t = np.arange(1, 40)
        assert np.all(np.diff(mp.E1[t]) >= -1e-12)
        assert np.all(np.diff(mp.E2[t]) <= 1e-12)
        assert np.all(mp.Vw[2:39] > 0) and np.all(mp.Vd[2:39] > 0)


def test_moments_rw_rd_combination():
    seq = from_labels([0, 1, 1, 2, 0, 2, 2, 3, 1])
    g = BaseGraph(4, np.array([[0, 1], [1, 2], [2, 3]]))
    s = scheme_from(g, seq.counts, "averaging")
    for t in range(2, 8):
        E1, E2, V1, V2, C = mean_var(s, t)
        w = (t - 1) / 7
        Ew, Vw, Ed, Vd = moments_rw_rd(s, t)
        assert Ew == pytest.approx((1 - w) * E1 + w * E2)
        assert Vw == pytest.approx((1 - w) ** 2 * V1 + w**2 * V2 + 2 * w * (1 - w) * C)
        assert Ed == pytest.approx(E1 - E2)
        assert Vd == pytest.approx(V1 + V2 - 2 * C)


def test_degenerate_variance():
    # one category only: every split has the same R values
    g = BaseGraph(1, np.zeros((0, 2), dtype=int))
    s = scheme_from(g, [6], "union")
    with pytest.raises(DegenerateStatisticError):
        moments_rw_rd(s, 3)
    with pytest.raises(InputError):
        mean_var(s, 6)


def test_cov_wd_recorded():
    # finite-n covariance of the two standardized statistics is not zero in
    # general; record its size on a tied example
    seq = from_labels([0, 0, 1, 1, 1, 2, 3, 3, 0])
    g = path(4)
    mp = mixed_moment_polys(scheme_from(g, seq.counts, "averaging"))
    corr = []
    for t in range(2, 8):
        mo = exact_moments_at(mp, t, third=False)
        corr.append(float(mo["Cwd"]) / np.sqrt(float(mo["Vw"]) * float(mo["Vd"])))
    assert np.all(np.isfinite(corr))
    assert max(abs(c) for c in corr) < 1


def test_monte_carlo_skewness_close_to_exact(rng):
    X = random_tied_observations(rng, 60, d=2, levels=3)
    seq, g = seq_and_graph(X, "nnl")
    scheme = scheme_from(g, seq.counts, "union")
    exact = moment_profile(scheme)
    R = 4000
    gw, gd = monte_carlo_skewness(seq, scheme, R, random_state=1)
    t = np.array([10, 20, 30, 40, 50])
    # standard error of a sample skewness is about sqrt(6 / R)
    se = np.sqrt(6 / R)
    assert np.all(np.abs(gw[t] - exact.gamma_w[t]) < 4 * se)
    assert np.all(np.abs(gd[t] - exact.gamma_d[t]) < 4 * se)


def test_oracle_size_limit():
    with pytest.raises(InputError):
        exhaustive_oracle(np.zeros(13, dtype=int), BaseGraph(1, np.zeros((0, 2))), "union", 3)
