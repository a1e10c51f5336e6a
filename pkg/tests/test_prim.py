import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import minimum_spanning_tree

from bipartite_prim.graph_model import Colour, GraphSpec, InputError, VertexId, WeightOracle
from bipartite_prim.percolation import UnionFind
from bipartite_prim.prim import StartPolicy, colour_ratio, ratio_trajectory, run_prim

B, W = Colour.BLACK, Colour.WHITE


def spanning_trees(n_b, n_w):
    edges = [(b, w) for b in range(n_b) for w in range(n_w)]
    for tree in itertools.combinations(edges, n_b + n_w - 1):
        uf = UnionFind(n_b + n_w)
        if all(uf.union(b, n_b + w) for b, w in tree):
            yield tree


def test_k33_has_81_spanning_trees():
    # m^(n-1) n^(m-1) spanning trees of K_{m,n}
    assert sum(1 for _ in spanning_trees(3, 3)) == 81


def test_hand_trace_two_blacks_one_white():
    table = [[0.3], [0.6]]
    spec = GraphSpec(2, 1)
    tr = run_prim(spec, WeightOracle.explicit(table), StartPolicy.fixed(VertexId(B, 1)))
    assert tr.sigma.tolist() == [1, 2, 0]
    assert tr.edge_weight.tolist() == [0.6, 0.3]
    assert tr.black_prefix.tolist() == [0, 1, 1, 2]
    assert tr.tau_b.tolist() == [1, 3]
    assert tr.tau_w.tolist() == [2]


def test_hand_trace_two_by_two():
    # b0-w0 .1, b0-w1 .4, b1-w0 .3, b1-w1 .2
    table = [[0.1, 0.4], [0.3, 0.2]]
    spec = GraphSpec(2, 2)
    tr = run_prim(spec, WeightOracle.explicit(table), StartPolicy.fixed(VertexId(W, 1)))
    # w1 -> b1 (.2) -> w0 (.3) -> b0 (.1)
    assert tr.sigma.tolist() == [3, 1, 2, 0]
    assert [tuple(e) for e, _ in tr.prim_edges()] == [(1, 1), (1, 0), (0, 0)]
    assert tr.edge_weight.tolist() == [0.2, 0.3, 0.1]
    assert [colour_ratio(tr, k) for k in range(1, 5)] == [0.0, 0.5, 1 / 3, 0.5]


def test_ties_broken_by_edge_index():
    table = [[0.5, 0.5], [0.5, 0.5]]
    tr = run_prim(GraphSpec(2, 2), WeightOracle.explicit(table), StartPolicy.fixed(VertexId(B, 0)))
    assert tr.sigma.tolist() == [0, 2, 3, 1]
    assert [tuple(e) for e, _ in tr.prim_edges()] == [(0, 0), (0, 1), (1, 0)]


def _tree_key(tr):
    return frozenset((int(b), int(w)) for b, w in zip(tr.edge_black, tr.edge_white))


def test_k33_minimum_over_all_spanning_trees():
    rng = np.random.default_rng(0)
    for _ in range(20):
        m = rng.uniform(0.01, 0.99, size=(3, 3))
        best = min(spanning_trees(3, 3), key=lambda t: math.fsum(m[b, w] for b, w in t))
        tr = run_prim(GraphSpec(3, 3), WeightOracle.explicit(m))
        assert _tree_key(tr) == frozenset(best)


@given(st.integers(1, 9), st.integers(1, 9), st.integers(0, 2**32))
@settings(max_examples=150, deadline=None)
def test_prim_weight_matches_scipy_mst(n_b, n_w, seed):
    spec = GraphSpec(n_b, n_w, seed)
    oracle = WeightOracle.implicit(spec)
    tr = run_prim(spec, oracle)
    m = oracle.matrix()
    dense = np.zeros((spec.n, spec.n))
    dense[:n_b, n_b:] = m
    ref = minimum_spanning_tree(csr_matrix(dense))
    assert math.isclose(tr.total_weight(), ref.sum(), rel_tol=1e-12, abs_tol=1e-12)
    assert sorted(tr.sigma.tolist()) == list(range(spec.n))


@given(st.integers(1, 6), st.integers(1, 6), st.integers(0, 2**32))
@settings(max_examples=150, deadline=None)
def test_each_prim_edge_is_lightest_crossing(n_b, n_w, seed):
    spec = GraphSpec(n_b, n_w, seed)
    m = WeightOracle.implicit(spec).matrix()
    tr = run_prim(spec)
    inside = np.zeros(spec.n, dtype=bool)
    for k in range(1, spec.n):
        inside[tr.sigma[k - 1]] = True
        cross = [m[b, w] for b in range(n_b) for w in range(n_w)
                 if inside[b] != inside[n_b + w]]
        assert tr.edge_weight[k - 1] == min(cross)
        b, w = tr.edge_black[k - 1], tr.edge_white[k - 1]
        assert inside[b] != inside[n_b + w]
        assert tr.sigma[k] in (b, n_b + w) and not inside[tr.sigma[k]]


@given(st.integers(1, 40), st.integers(1, 40), st.integers(0, 2**32), st.data())
@settings(max_examples=80, deadline=None)
def test_early_stop_is_prefix_of_full_run(n_b, n_w, seed, data):
    spec = GraphSpec(n_b, n_w, seed)
    full = run_prim(spec)
    k = data.draw(st.integers(1, spec.n))
    part = run_prim(spec, k_max=k)
    assert np.array_equal(part.sigma, full.sigma[:k])
    assert np.array_equal(part.edge_weight, full.edge_weight[:k - 1])
    assert np.array_equal(part.black_prefix, full.prefix(k).black_prefix)


def test_prim_edges_alternate_colours_and_form_tree():
    spec = GraphSpec(30, 45, seed=7)
    tr = run_prim(spec)
    uf = UnionFind(spec.n)
    assert all(uf.union(int(b), spec.n_b + int(w)) for b, w in zip(tr.edge_black, tr.edge_white))


def test_start_policies():
    spec = GraphSpec(5, 7, seed=3)
    assert run_prim(spec, policy=StartPolicy.uniform_black(), k_max=1).sigma[0] < 5
    assert run_prim(spec, policy=StartPolicy.uniform_white(), k_max=1).sigma[0] >= 5
    v = VertexId(W, 2)
    assert run_prim(spec, policy=StartPolicy.fixed(v), k_max=1).sigma[0] == 7
    # the start vertex is a deterministic function of the seed
    assert StartPolicy().pick(spec) == StartPolicy().pick(spec)
    with pytest.raises(InputError):
        StartPolicy("sideways")
    with pytest.raises(InputError):
        StartPolicy("fixed")


def test_uniform_start_hits_both_colours():
    starts = [StartPolicy().pick(GraphSpec(3, 3, seed=s)) for s in range(200)]
    assert set(starts) == set(range(6))


def test_run_prim_errors():
    spec = GraphSpec(2, 3)
    with pytest.raises(InputError):
        run_prim(spec, k_max=0)
    with pytest.raises(InputError):
        run_prim(spec, k_max=6)
    with pytest.raises(InputError):
        run_prim(spec, WeightOracle.implicit(GraphSpec(3, 2)))
    tr = run_prim(spec, k_max=3)
    with pytest.raises(InputError):
        colour_ratio(tr, 4)
    with pytest.raises(InputError):
        tr.prefix(0)


def test_trace_is_read_only_and_ratio_trajectory():
    tr = run_prim(GraphSpec(10, 10, seed=1))
    with pytest.raises(ValueError):
        tr.sigma[0] = 1
    traj = ratio_trajectory(tr, [1, 5, 20])
    assert traj[-1] == (20, 0.5)
    assert tr.rank_of[tr.sigma[4]] == 5
    assert len(tr) == 20 and tr.is_full
