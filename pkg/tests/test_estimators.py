import numpy as np
import pytest
from sklearn.base import clone

from tiescan import (
    BinarySegmentation,
    ChangedIntervalDetector,
    ConfigError,
    DegenerateStatisticError,
    GraphChangePointDetector,
    InputError,
    shared_change_points,
)
from tiescan.simulate import MultinomialSpec, gen_multinomial_sequence


@pytest.fixture(scope="module")
def fig1():
    return gen_multinomial_sequence(MultinomialSpec(), np.random.default_rng(2))


def test_params_and_clone():
    det = GraphChangePointDetector(statistic="M", mode="union", n0=7)
    params = det.get_params()
    assert params["statistic"] == "M" and params["n0"] == 7
    other = clone(det).set_params(mode="averaging")
    assert other.mode == "averaging" and det.mode == "union"


def test_fit_attributes(fig1):
    det = GraphChangePointDetector(statistic="all").fit(fig1)
    assert set(det.results_) == {"Zw", "S", "M"}
    n0, n1 = det.window_
    assert (n0, n1) == (5, 95)
    for res in det.results_.values():
        assert n0 <= res["tau"] <= n1
        assert 0 <= res["pvalue"] <= 1
    assert det.results_["S"]["pvalues"].keys() == {"analytic"}
    assert det.results_["M"]["pvalues"].keys() == {"analytic", "analytic_skew"}
    assert det.change_point_ == det.results_["Zw"]["tau"]
    assert abs(det.results_["S"]["tau"] - 50) <= 5
    assert det.results_["S"]["pvalue"] < 0.01


def test_fit_predict_and_transform(fig1):
    det = GraphChangePointDetector()
    labels = det.fit_predict(fig1)
    assert labels[: det.change_point_].sum() == 0 and np.all(labels[det.change_point_ :] == 1)
    Z = det.transform(fig1)
    assert Z.shape == (100, 4)
    assert np.isnan(Z[:4]).all() and np.isnan(Z[95:]).all()
    t = det.change_point_
    assert Z[t - 1, 2] == pytest.approx(det.max_statistic_)


@pytest.mark.parametrize("inference", ["analytic", "analytic-skew", "permutation"])
def test_inference_choices(fig1, inference):
    det = GraphChangePointDetector(statistic="M", inference=inference, n_permutations=200).fit(fig1)
    assert det.pvalue_ < 0.05


def test_exhaustive_inference():
    X = np.array([[0], [0], [1], [1], [2], [2], [0], [1]])
    det = GraphChangePointDetector(statistic="S", inference="exhaustive", n0=2, graph="mst").fit(X)
    assert det.results_["S"]["pvalues"]["exhaustive"] == det.pvalue_
    with pytest.raises(InputError):
        GraphChangePointDetector(inference="exhaustive").fit(np.arange(12)[:, None] % 3)


def test_monte_carlo_skewness_option(fig1):
    a = GraphChangePointDetector(statistic="M").fit(fig1)
    b = GraphChangePointDetector(statistic="M", exact_skewness=False, skew_permutations=3000).fit(fig1)
    assert b.pvalue_ == pytest.approx(a.pvalue_, rel=0.5)


def test_tie_free_modes_agree():
    X = np.random.default_rng(0).normal(size=(60, 2))
    a = GraphChangePointDetector(statistic="all", mode="averaging").fit(X)
    u = GraphChangePointDetector(statistic="all", mode="union").fit(X)
    assert a.results_ == u.results_


def test_user_edges(fig1):
    det = GraphChangePointDetector(graph="user-edges", edges=[[0, 1]]).fit(fig1[:50])
    assert det.graph_.n_edges == 1
    with pytest.raises(ConfigError):
        GraphChangePointDetector(graph="user-edges").fit(fig1)


def test_errors():
    with pytest.raises(DegenerateStatisticError):
        GraphChangePointDetector().fit(np.ones((10, 2)))
    with pytest.raises(InputError):
        GraphChangePointDetector().fit(np.arange(3)[:, None])
    with pytest.raises(ConfigError):
        GraphChangePointDetector(mode="mean").fit(np.arange(10)[:, None])
    with pytest.raises(ConfigError):
        GraphChangePointDetector(statistic="Zd").fit(np.arange(10)[:, None])
    with pytest.raises(ConfigError):
        GraphChangePointDetector(alpha=0).fit(np.arange(10)[:, None])
    with pytest.raises(ConfigError, match="window too narrow"):
        GraphChangePointDetector(n0=8, n1=4).fit(np.arange(12)[:, None])


def test_changed_interval_detector():
    rng = np.random.default_rng(6)
    X = np.vstack(
        [rng.multinomial(10, [0.25] * 4, 30), rng.multinomial(10, [0.7, 0.1, 0.1, 0.1], 20), rng.multinomial(10, [0.25] * 4, 30)]
    )
    det = ChangedIntervalDetector(n_permutations=50)
    labels = det.fit_predict(X)
    t1, t2 = det.interval_
    assert abs(t1 - 31) <= 3 and abs(t2 - 51) <= 3
    assert det.pvalue_ == 1 / 51
    assert labels.sum() == t2 - t1


def test_segmentation_null_mostly_empty():
    empty = 0
    for rep in range(10):
        X = np.random.default_rng([31, rep]).multinomial(10, [0.25] * 4, 120)
        seg = BinarySegmentation(GraphChangePointDetector(statistic="S")).fit(X)
        empty += not seg.change_points_
    assert empty >= 8


def test_segmentation_two_changes():
    ok = 0
    for rep in range(10):
        rng = np.random.default_rng([32, rep])
        X = np.vstack(
            [
                rng.multinomial(10, [0.2, 0.3, 0.3, 0.2], 100),
                rng.multinomial(10, [0.45, 0.3, 0.15, 0.1], 100),
                rng.multinomial(10, [0.1, 0.2, 0.3, 0.4], 100),
            ]
        )
        seg = BinarySegmentation(GraphChangePointDetector(statistic="S")).fit(X)
        cps = seg.change_points_
        ok += any(abs(c - 100) <= 10 for c in cps) and any(abs(c - 200) <= 10 for c in cps)
        orders = [nd["order"] for nd in seg.tree_ if nd["split"]]
        assert orders == list(range(1, len(cps) + 1))
    assert ok > 5


def test_segmentation_single_change_depth_one():
    depth_one = 0
    for rep in range(10):
        rng = np.random.default_rng([33, rep])
        X = np.vstack([rng.multinomial(10, [0.2, 0.3, 0.3, 0.2], 100), rng.multinomial(10, [0.5, 0.3, 0.1, 0.1], 100)])
        seg = BinarySegmentation(GraphChangePointDetector(statistic="S")).fit(X)
        depth_one += seg.depth_ == 1
    assert depth_one > 5


def test_segmentation_fit_predict():
    rng = np.random.default_rng(4)
    X = np.vstack([rng.multinomial(10, [0.2, 0.3, 0.3, 0.2], 80), rng.multinomial(10, [0.6, 0.2, 0.1, 0.1], 80)])
    seg = BinarySegmentation(GraphChangePointDetector(), min_segment_length=40)
    labels = seg.fit_predict(X)
    assert labels.max() == len(seg.change_points_)


@pytest.mark.parametrize(
    "a,b,expected", [(53, 52, [52]), (68, 66, [67]), (289, 293, [291]), (140, 140, [140]), (100, 106, [])]
)
def test_shared_rule(a, b, expected):
    assert shared_change_points([a], [b]) == expected


def test_shared_rule_matching():
    assert shared_change_points([53, 140, 289], [52, 141, 293, 400]) == [52, 140, 291]
    assert shared_change_points([10, 11], [12]) == [11]
