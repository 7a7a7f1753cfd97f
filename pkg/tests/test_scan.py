import numpy as np
import pytest

from conftest import random_tied_observations, seq_and_graph
from tiescan import ConfigError
from tiescan.moments import exhaustive_oracle, moment_profile, scheme_from
from tiescan.scan import (
    ScanProfile,
    basic_quantity_profile,
    changed_interval_scan,
    default_window,
    direct_basic_quantities,
    interval_matrix,
    interval_statistic,
    single_change_scan,
    standardize,
)
from tiescan.sequence import categorize, contingency_at, reverse
from tiescan.simulate import MultinomialSpec, gen_multinomial_sequence


def _profile(seq, g, mode, n0=2, n1=None):
    scheme = scheme_from(g, seq.counts, mode)
    mom = moment_profile(scheme, skew=False)
    R1, R2 = basic_quantity_profile(seq, scheme)
    return standardize(R1, R2, mom, n0, n1 or seq.n - 2), scheme, mom


def test_default_window():
    assert default_window(100) == (5, 95)
    assert default_window(1000) == (50, 950)
    assert default_window(10) == (2, 8)
    with pytest.raises(ConfigError, match="window too narrow"):
        default_window(10, 7, 5)


@pytest.mark.parametrize("mode", ["averaging", "union"])
def test_boundary_values(rng, mode):
    X = random_tied_observations(rng, 20)
    seq, g = seq_and_graph(X, "nnl")
    scheme = scheme_from(g, seq.counts, mode)
    R1, R2 = basic_quantity_profile(seq, scheme)
    assert R1[1] == 0
    if mode == "averaging":
        assert R1[seq.n] == pytest.approx((seq.n - seq.K) + g.n_edges, abs=1e-12)


@pytest.mark.parametrize("seed", range(20))
def test_incremental_equals_direct(seed):
    rng = np.random.default_rng(seed)
    X = random_tied_observations(rng, 8 + seed)
    kind = ("mst", "nnl", "union-msts")[seed % 3]
    seq, g = seq_and_graph(X, kind)
    for mode in ("averaging", "union"):
        scheme = scheme_from(g, seq.counts, mode)
        R1, R2 = basic_quantity_profile(seq, scheme)
        for t in range(0, seq.n + 1):
            n1, _ = contingency_at(seq, t=t)
            r1, r2 = direct_basic_quantities(n1, scheme)
            assert abs(R1[t] - r1) < 1e-10 and abs(R2[t] - r2) < 1e-10


@pytest.mark.parametrize("mode", ["averaging", "union"])
def test_standardized_moments_by_enumeration(mode):
    rng = np.random.default_rng(8)
    X = random_tied_observations(rng, 8)
    seq, g = seq_and_graph(X, "nnl")
    mom = moment_profile(scheme_from(g, seq.counts, mode), skew=False)
    for t in range(2, 7):
        dist = exhaustive_oracle(seq.labels, g, mode, t)
        r1 = np.array([float(x) for x in dist.r1])
        r2 = np.array([float(x) for x in dist.r2])
        w = (t - 1) / (seq.n - 2)
        zw = ((1 - w) * r1 + w * r2 - mom.Ew[t]) / np.sqrt(mom.Vw[t])
        zd = (r1 - r2 - mom.Ed[t]) / np.sqrt(mom.Vd[t])
        for z in (zw, zd):
            assert abs(z.mean()) < 1e-10
            assert abs(z.var() - 1) < 1e-10


def test_identities_exact(rng):
    X = random_tied_observations(rng, 50)
    seq, g = seq_and_graph(X, "union-msts")
    prof, _, _ = _profile(seq, g, "union")
    assert np.array_equal(prof.S, prof.Zw**2 + prof.Zd**2)
    assert np.array_equal(prof.M, np.maximum(prof.Zw, np.abs(prof.Zd)))


def test_argmax_ties_smallest_t():
    t = np.arange(5, 11)
    flat = np.ones(t.size)
    prof = ScanProfile(5, 10, t, flat, flat, flat, flat, flat, flat)
    assert single_change_scan(prof, "S").tau == 5
    peak = flat.copy()
    peak[3] = 4.0
    prof = ScanProfile(5, 10, t, flat, flat, peak, flat, peak, flat)
    est = single_change_scan(prof, "S")
    assert est.tau == 8 and est.max_value == 4.0


def test_reversal_symmetry(rng):
    X = random_tied_observations(rng, 40, levels=3)
    seq, g = seq_and_graph(X, "nnl")
    n = seq.n
    for mode in ("averaging", "union"):
        p, _, _ = _profile(seq, g, mode)
        r, _, _ = _profile(reverse(seq), g, mode)
        # r at t corresponds to p at n - t
        np.testing.assert_allclose(r.Zw, p.Zw[::-1], atol=1e-9)
        np.testing.assert_allclose(r.Zd, -p.Zd[::-1], atol=1e-9)
        ep, er = single_change_scan(p, "S"), single_change_scan(r, "S")
        assert er.max_value == pytest.approx(ep.max_value, abs=1e-9)
        if np.sum(np.isclose(p.S, ep.max_value, atol=1e-9)) == 1:
            assert er.tau == n - ep.tau


def test_tie_free_modes_identical(rng):
    X = rng.normal(size=(40, 3))
    seq, g = seq_and_graph(X, "mst")
    assert seq.K == 40
    a, _, _ = _profile(seq, g, "averaging")
    u, _, _ = _profile(seq, g, "union")
    for k in ("R1", "R2", "Zw", "Zd", "S", "M"):
        assert np.array_equal(getattr(a, k), getattr(u, k))


def test_fig1_peak_near_change():
    hits = 0
    for rep in range(20):
        X = gen_multinomial_sequence(MultinomialSpec(), np.random.default_rng([1, rep]))
        seq, g = seq_and_graph(X, "nnl")
        prof, _, _ = _profile(seq, g, "averaging", 5, 95)
        hits += 45 <= single_change_scan(prof, "S").tau <= 55
    assert hits > 10


def test_null_profile_has_smaller_peak():
    rng = np.random.default_rng(4)
    spec = MultinomialSpec(tau=None)
    peaks = []
    for X in (gen_multinomial_sequence(spec, rng), gen_multinomial_sequence(MultinomialSpec(), rng)):
        seq, g = seq_and_graph(X, "nnl")
        prof, _, _ = _profile(seq, g, "averaging", 5, 95)
        peaks.append(prof.S.max())
    assert peaks[0] < peaks[1]


def test_interval_matrix_matches_direct(rng):
    X = random_tied_observations(rng, 8)
    seq, g = seq_and_graph(X, "nnl")
    for mode in ("averaging", "union"):
        scheme = scheme_from(g, seq.counts, mode)
        mom = moment_profile(scheme, skew=False)
        vals = interval_matrix(seq.labels, scheme, mom, 2, 6, "S")
        for t1 in range(1, 9):
            for L in range(2, 7):
                t2 = t1 + L
                if t2 > 8:
                    assert vals[t1 - 1, L - 2] == -np.inf
                    continue
                direct = interval_statistic(seq, scheme, mom, t1, t2, "S")
                assert vals[t1 - 1, L - 2] == pytest.approx(direct, abs=1e-10)


def test_interval_from_start_equals_single_change(rng):
    X = random_tied_observations(rng, 30)
    seq, g = seq_and_graph(X, "nnl")
    for mode in ("averaging", "union"):
        prof, scheme, mom = _profile(seq, g, mode, 2, 28)
        for stat in ("Zw", "S", "M"):
            vals = interval_matrix(seq.labels, scheme, mom, 2, 28, stat)
            single = prof.values(stat)
            assert np.array_equal(vals[0, :], single)


def test_changed_interval_scan_recovers_block():
    rng = np.random.default_rng(2)
    X = np.vstack(
        [
            rng.multinomial(10, [0.25] * 4, 40),
            rng.multinomial(10, [0.7, 0.1, 0.1, 0.1], 30),
            rng.multinomial(10, [0.25] * 4, 40),
        ]
    )
    seq = categorize(list(X))
    _, g = seq_and_graph(X, "nnl")
    scheme = scheme_from(g, seq.counts, "averaging")
    mom = moment_profile(scheme, skew=False)
    est = changed_interval_scan(seq, scheme, mom, 6, 104, "S")
    t1, t2 = est.tau
    assert abs(t1 - 41) <= 3 and abs(t2 - 71) <= 3
