import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from bipartite_prim.graph_model import (
    Colour,
    EdgeId,
    GraphSpec,
    InputError,
    VertexId,
    WeightOracle,
    edge_weight,
    reference_weight,
    theta_hat,
)


def test_spec_rejects_empty_sides():
    with pytest.raises(InputError):
        GraphSpec(0, 3)
    with pytest.raises(InputError):
        GraphSpec(2, 0)
    with pytest.raises(InputError):
        GraphSpec(1, 1, seed=2**64)


def test_theta_hat():
    assert theta_hat(GraphSpec(1, 3)) == 0.25


@given(st.integers(1, 50), st.integers(1, 50), st.data())
def test_global_id_round_trip(n_b, n_w, data):
    spec = GraphSpec(n_b, n_w)
    gid = data.draw(st.integers(0, spec.n - 1))
    v = spec.vertex(gid)
    assert spec.global_id(v) == gid
    assert (v.colour == Colour.BLACK) == (gid < n_b)


def test_vertex_and_edge_range_checks():
    spec = GraphSpec(2, 3)
    with pytest.raises(InputError):
        spec.global_id(VertexId(Colour.BLACK, 2))
    with pytest.raises(InputError):
        spec.vertex(5)
    with pytest.raises(InputError):
        spec.check_edge(EdgeId(0, 3))
    with pytest.raises(InputError):
        edge_weight(WeightOracle.implicit(spec), EdgeId(2, 0))


@given(st.integers(0, 2**64 - 1), st.integers(0, 10**6), st.integers(0, 10**6))
@settings(max_examples=200)
def test_implicit_weight_matches_big_int_reference(seed, row, col):
    spec = GraphSpec(10**6 + 1, 10**6 + 1, seed)
    assert edge_weight(WeightOracle.implicit(spec), EdgeId(row, col)) == reference_weight(seed, row, col)


def test_block_matches_pointwise():
    spec = GraphSpec(7, 5, seed=11)
    oracle = WeightOracle.implicit(spec)
    m = oracle.matrix()
    assert m.shape == (7, 5)
    for b in range(7):
        for w in range(5):
            assert m[b, w] == edge_weight(oracle, EdgeId(b, w))
    assert np.array_equal(oracle.block([3, 1], [4, 0]), m[np.ix_([3, 1], [4, 0])])


def test_implicit_weights_strictly_inside_unit_interval():
    m = WeightOracle.implicit(GraphSpec(300, 300, seed=5)).matrix()
    assert m.min() > 0.0 and m.max() < 1.0


def test_implicit_weight_mean():
    m = WeightOracle.implicit(GraphSpec(1000, 1000, seed=1)).matrix()
    assert abs(m.mean() - 0.5) < 0.002


def test_implicit_weights_uniform_ks():
    m = WeightOracle.implicit(GraphSpec(200, 250, seed=2)).matrix().ravel()
    assert stats.kstest(m, "uniform").pvalue > 1e-3


def test_rows_and_columns_uncorrelated():
    m = WeightOracle.implicit(GraphSpec(400, 400, seed=9)).matrix()
    r = np.corrcoef(m[:-1].ravel(), m[1:].ravel())[0, 1]
    c = np.corrcoef(m[:, :-1].ravel(), m[:, 1:].ravel())[0, 1]
    assert abs(r) < 0.01 and abs(c) < 0.01


def test_weights_distinct_at_moderate_scale():
    m = WeightOracle.implicit(GraphSpec(2000, 2000, seed=3)).matrix().ravel()
    assert np.unique(m).size == m.size


def test_different_seeds_give_different_weights():
    a = WeightOracle.implicit(GraphSpec(20, 20, seed=1)).matrix()
    b = WeightOracle.implicit(GraphSpec(20, 20, seed=2)).matrix()
    assert not np.any(a == b)


def test_transposed_oracle():
    spec = GraphSpec(4, 6, seed=8)
    base = WeightOracle.implicit(spec)
    twin = base.transposed()
    assert (twin.n_b, twin.n_w) == (6, 4)
    assert np.array_equal(twin.matrix(), base.matrix().T)
    assert np.array_equal(twin.transposed().matrix(), base.matrix())
    exp = WeightOracle.explicit(base.matrix())
    assert np.array_equal(exp.transposed().matrix(), base.matrix().T)


def test_explicit_validation():
    with pytest.raises(InputError):
        WeightOracle.explicit([[0.5, 0.0]])
    with pytest.raises(InputError):
        WeightOracle.explicit([[0.5, 1.0]])
    with pytest.raises(InputError):
        WeightOracle.explicit(np.zeros((2, 2, 2)) + 0.5)
    o = WeightOracle.explicit([[0.25, 0.5]])
    with pytest.raises(ValueError):
        o.table[0, 0] = 0.1


def test_with_weight_copies():
    o = WeightOracle.implicit(GraphSpec(2, 2, seed=4))
    m = o.with_weight(EdgeId(1, 0), 0.125)
    assert m.matrix()[1, 0] == 0.125
    assert o.matrix()[1, 0] != 0.125
