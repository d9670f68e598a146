import math

import numpy as np
import pytest

from bipolarmaps.rng import make_rng
from bipolarmaps.sewing import LatticePath, build_map
from bipolarmaps.stats import (
    RescaledPath,
    TestReport,
    ball_around,
    discrete_endpoints,
    empirical_tv,
    finite_ball_codes,
    frequency_table,
    hill_tail_index,
    infinite_ball_codes,
    ks_two_sample,
    map_adjacency,
    scaling_experiment,
)
from bipolarmaps.stepdist import EDGE, FaceMove, power_law_distribution

D = power_law_distribution(1.5)


@pytest.mark.parametrize("alpha", [1.2, 1.5, 1.8])
def test_hill_on_pareto(alpha):
    x = (1.0 - make_rng(1).random(10**5)) ** (-1.0 / alpha)
    est = hill_tail_index(x, k_fraction=0.05)
    assert abs(est.alpha - alpha) <= 4 * est.stderr
    assert est.k == 5000


def test_hill_input_checks():
    with pytest.raises(ValueError):
        hill_tail_index(np.ones(10))
    with pytest.raises(ValueError):
        hill_tail_index(np.ones(1000))
    with pytest.raises(ValueError):
        hill_tail_index(-np.ones(1000) - 1)


def test_ks_two_sample():
    rng = make_rng(2)
    a, b = rng.normal(size=5000), rng.normal(size=5000)
    stat, p = ks_two_sample(a, b)
    assert p > 0.01 and 0 <= stat <= 1
    _, p2 = ks_two_sample(a, b + 0.2)
    assert p2 < 1e-6
    with pytest.raises(ValueError):
        ks_two_sample([], [1.0])


def test_tv():
    assert empirical_tv({"a": 1.0}, {"a": 1.0}) == 0.0
    assert empirical_tv({"a": 1.0}, {"b": 1.0}) == 1.0
    assert empirical_tv({"a": 0.5, "b": 0.5}, {"a": 0.25, "b": 0.25, "c": 0.5}) == pytest.approx(0.5)
    with pytest.raises(ValueError):
        empirical_tv({"a": 0.5}, {"a": 1.0})


def test_frequency_table():
    t = frequency_table("aabc")
    assert t == {"a": 0.5, "b": 0.25, "c": 0.25}
    with pytest.raises(ValueError):
        frequency_table([])


def test_rescaled_path():
    p = LatticePath((0, 0), np.array([[1, -1], [-1, 2], [0, 0], [1, -1]]))
    rp = RescaledPath.from_path(p, 2.0)
    assert rp(1.0).tolist() == pytest.approx([1 / 2, 0.0])
    assert rp(0.5).tolist() == pytest.approx([0.0, 0.5])
    assert rp(0.0).tolist() == [0.0, 0.0]


def test_report():
    r = TestReport("x", 0.1, 0.02, (3, 4), 7)
    assert r.passed
    assert not TestReport("x", 0.1, 0.005, (3, 4), 7).passed
    assert r.to_dict()["sizes"] == [3, 4]


def test_discrete_endpoints_chunks():
    a = discrete_endpoints(100, 500, D, make_rng(3))
    b = discrete_endpoints(100, 500, D, make_rng(3))
    assert np.array_equal(a[0], b[0]) and np.array_equal(a[1], b[1])
    assert a[0].shape == (500,)
    # one step of each walk: first coordinate changes by +1 (edge) or -i (face)
    x, y = discrete_endpoints(1, 2000, D, make_rng(4))
    edge = (x == 1) & (y == -1)
    assert (x[~edge] <= 0).all() and (y[~edge] >= 0).all()


def test_scaling_experiment_small():
    rep = scaling_experiment(200, 2000, 1.5, seed=1)
    names = [t["test"] for t in rep["tests"]]
    assert names == ["X_vs_W1", "Y_vs_W2", "X_vs_minus_Y", "W1_vs_minus_W2"]
    assert all(0 <= t["p_value"] <= 1 for t in rep["tests"])
    assert rep["levy"]["delta"] > 0


def test_ball_helpers():
    m = build_map([EDGE, FaceMove(1, 0), EDGE])
    adj = map_adjacency(m)
    assert sum(map(len, adj.values())) == 2 * m.n_edges
    b0 = ball_around(adj, 0, 0)
    assert b0 == {0: []}
    b1 = ball_around(adj, 0, 1)
    assert set(b1) == {0} | set(adj[0])


def test_ball_code_tables():
    fin = finite_ball_codes(10, 0.5, 0.5, D, 50, make_rng(5))
    assert len(fin["move"]) == 50 and len(fin["vertex"]) == 50
    assert fin["attempts"] >= 50
    inf = infinite_ball_codes(range(40), 1, D, m_max=2**10)
    assert len(inf["codes"]) + len(inf["failed"]) == 40
    assert all(m <= 2**10 for m in inf["m_used"])
    assert math.isfinite(empirical_tv(frequency_table(fin["move"]), frequency_table(inf["codes"])))
