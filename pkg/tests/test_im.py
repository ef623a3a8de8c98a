import itertools
import math

import numpy as np
import pytest

from oracles import connected_gnp_edges, gnp_edges
from privgraph.graph import Graph
from privgraph.im import degree_discount, ic_spread

STAR = Graph(5, [(0, 1), (0, 2), (0, 3), (0, 4)])


def naive_degree_discount(g, k, p):
    n = g.node_count
    deg = g.degree().astype(float)
    chosen = []
    for _ in range(k):
        best, best_score = None, -math.inf
        for v in range(n):
            if v in chosen:
                continue
            t = sum(1 for w in g.neighbors(v).tolist() if w in chosen)
            score = deg[v] - 2 * t - (deg[v] - t) * t * p
            if score > best_score:
                best, best_score = v, score
        chosen.append(best)
    return chosen


def test_star_hub_first():
    assert degree_discount(STAR, 1) == [0]


def test_all_nodes_when_k_is_n():
    assert sorted(degree_discount(STAR, 5)) == [0, 1, 2, 3, 4]


def test_k_too_large():
    with pytest.raises(ValueError):
        degree_discount(STAR, 6)


def test_matches_naive_recomputation():
    rng = np.random.default_rng(0)
    for _ in range(20):
        n = int(rng.integers(5, 40))
        g = Graph(n, gnp_edges(n, 0.2, rng))
        k = int(rng.integers(1, n + 1))
        p = float(rng.choice([0.01, 0.1, 0.5]))
        assert degree_discount(g, k, p) == naive_degree_discount(g, k, p)


def test_spread_p_zero_and_one():
    rng = np.random.default_rng(1)
    g = Graph(30, connected_gnp_edges(30, 0.1, rng))
    assert ic_spread(g, [0, 5, 9], 0.0, 50, rng).mean == 3
    est = ic_spread(g, [4], 1.0, 50, rng)
    assert (est.mean, est.std, est.trials) == (30, 0.0, 50)


def test_single_edge_analytic_mean():
    g = Graph(2, [(0, 1)])
    est = ic_spread(g, [0], 0.3, 100_000, np.random.default_rng(2))
    assert est.mean == pytest.approx(1.3, abs=0.01)
    se = math.sqrt(0.3 * 0.7 / 100_000)
    assert abs(est.mean - 1.3) <= 3 * se


def test_spread_monotone_in_p():
    rng = np.random.default_rng(3)
    g = Graph(40, connected_gnp_edges(40, 0.08, rng))
    means = [ic_spread(g, [0, 1], p, 2000, rng).mean for p in (0.0, 0.1, 0.5, 1.0)]
    assert means == sorted(means)
    assert means[0] == 2 and means[-1] == 40


def test_spread_monotone_in_seed_set_under_coupling():
    g = Graph(40, connected_gnp_edges(40, 0.08, np.random.default_rng(4)))
    small = ic_spread(g, [0], 0.2, 3000, np.random.default_rng(7))
    large = ic_spread(g, [0, 10, 20], 0.2, 3000, np.random.default_rng(7))
    assert small.mean <= large.mean


def test_spread_bounds_and_validation():
    g = Graph(10, gnp_edges(10, 0.3, np.random.default_rng(5)))
    est = ic_spread(g, [1, 2], 0.4, 500, np.random.default_rng(6))
    assert 2 <= est.mean <= 10
    with pytest.raises(ValueError):
        ic_spread(g, [1], 1.5, 10)
    with pytest.raises(ValueError):
        ic_spread(g, [1], 0.5, 0)
    with pytest.raises(ValueError):
        ic_spread(g, [11], 0.5, 10)


def test_batches_match_one_pass(monkeypatch):
    import privgraph.im as im

    g = Graph(20, connected_gnp_edges(20, 0.2, np.random.default_rng(8)))
    a = im.ic_spread(g, [0], 0.3, 300, np.random.default_rng(9))
    monkeypatch.setattr(im, "_LIVE_CELLS", 3 * len(g.csr[1]))
    b = im.ic_spread(g, [0], 0.3, 300, np.random.default_rng(9))
    assert a == b


def test_degree_discount_near_best_pair():
    rng = np.random.default_rng(10)
    for _ in range(3):
        g = Graph(15, connected_gnp_edges(15, 0.2, rng))
        dd = ic_spread(g, degree_discount(g, 2, 0.01), 0.01, 10_000, np.random.default_rng(0)).mean
        best = max(
            ic_spread(g, pair, 0.01, 10_000, np.random.default_rng(0)).mean
            for pair in itertools.combinations(range(15), 2)
        )
        assert dd >= 0.9 * best
