"""Bond percolation G(n_b, n_w, p) and its components.

Keeping exactly the edges of weight ``<= p`` couples the percolated graph to
the Prim run on the same weights.  Under that coupling each component is a
run of consecutive Prim ranks, cut wherever a Prim edge is heavier than
``p``.  :func:`components_bruteforce` is the independent union-find route
used to check this.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit

from .graph_model import EXPLICIT, IMPLICIT, GraphSpec, InputError, WeightOracle, _cell, row_keys
from .prim import PrimTrace
from .streams import PERC_STREAM, substream


def _check_p(p):
    if not 0.0 <= p <= 1.0:
        raise InputError(f"p must lie in [0, 1], got {p}")


@njit(cache=True)
def _implicit_edges_below(n_b, n_w, transposed, key, p):
    cap = 1024
    out = np.empty((cap, 2), dtype=np.int64)
    m = 0
    rk = row_keys(key, n_w if transposed else n_b)
    for b in range(n_b):
        for w in range(n_w):
            u = _cell(rk[w], b) if transposed else _cell(rk[b], w)
            if u <= p:
                if m == cap:
                    cap *= 2
                    grown = np.empty((cap, 2), dtype=np.int64)
                    grown[:m] = out[:m]
                    out = grown
                out[m, 0] = b
                out[m, 1] = w
                m += 1
    return out[:m].copy()


def _skip_sample(spec: GraphSpec, p: float) -> np.ndarray:
    # geometric gaps between successes over the row-major edge index
    total = spec.n_b * spec.n_w
    if p <= 0.0:
        return np.empty((0, 2), dtype=np.int64)
    if p >= 1.0:
        flat = np.arange(total, dtype=np.int64)
    else:
        rng = substream(spec.seed, PERC_STREAM)
        chunks = []
        last = -1
        batch = max(16, int(1.2 * p * total) + 64)
        while last < total:
            gaps = rng.geometric(p, size=batch)
            pos = last + np.cumsum(gaps)
            chunks.append(pos[pos < total])
            last = int(pos[-1])
        flat = np.concatenate(chunks)
    return np.column_stack((flat // spec.n_w, flat % spec.n_w))


def realized_edges(spec: GraphSpec, oracle: WeightOracle | None, p: float,
                   method: str = "exhaustive") -> np.ndarray:
    """Edges of G(n_b, n_w, p) as an ``(m, 2)`` array of (black, white) indices.

    ``method="exhaustive"`` filters the oracle's weights and is coupled to
    any Prim run on the same oracle.  ``method="skip"`` draws an independent
    Bernoulli(p) edge set in O(#edges) from the (seed, "perc") stream; it
    shares nothing with the weights and must not be used for coupled checks.
    Rows are sorted lexicographically.
    """
    _check_p(p)
    if method == "skip":
        return _skip_sample(spec, p)
    if method != "exhaustive":
        raise InputError(f"unknown method {method!r}")
    oracle = oracle or WeightOracle.implicit(spec)
    if not oracle.matches(spec):
        raise InputError("oracle dimensions do not match the graph spec")
    if oracle.mode == EXPLICIT:
        return np.argwhere(oracle.table <= p).astype(np.int64)
    return _implicit_edges_below(spec.n_b, spec.n_w, oracle.mode != IMPLICIT, oracle.key, float(p))


class UnionFind:
    """Disjoint sets over ``0 .. size-1`` with path halving and union by size."""

    def __init__(self, size: int):
        self.parent = list(range(size))
        self.size = [1] * size

    def find(self, x: int) -> int:
        parent = self.parent
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def union(self, a: int, b: int) -> bool:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        if self.size[ra] < self.size[rb]:
            ra, rb = rb, ra
        self.parent[rb] = ra
        self.size[ra] += self.size[rb]
        return True

    def groups(self) -> list[frozenset[int]]:
        out: dict[int, list[int]] = {}
        for x in range(len(self.parent)):
            out.setdefault(self.find(x), []).append(x)
        return [frozenset(g) for g in out.values()]


def components_bruteforce(edges, spec: GraphSpec) -> list[frozenset[int]]:
    """Connected components as sets of global vertex ids."""
    uf = UnionFind(spec.n)
    for b, w in np.asarray(edges, dtype=np.int64).reshape(-1, 2):
        uf.union(int(b), spec.n_b + int(w))
    return uf.groups()


@dataclass(frozen=True)
class ComponentIntervals:
    """Components as Prim-rank intervals ``[J_{j-1}+1, J_j]`` with ``J_0 = 0``."""

    p: float
    thresholds: tuple[int, ...]

    @property
    def intervals(self) -> list[tuple[int, int]]:
        starts = (0,) + self.thresholds[:-1]
        return [(a + 1, b) for a, b in zip(starts, self.thresholds)]

    @property
    def lead_ranks(self) -> list[int]:
        return [a for a, _ in self.intervals]

    def __len__(self):
        return len(self.thresholds)

    def vertex_sets(self, trace: PrimTrace) -> list[frozenset[int]]:
        return [frozenset(trace.sigma[a - 1:b].tolist()) for a, b in self.intervals]


def intervals_from_prim(trace: PrimTrace, p: float) -> ComponentIntervals:
    """Cut the Prim sequence after every rank ``i`` whose edge ``e_i`` exceeds ``p``."""
    _check_p(p)
    if not trace.is_full:
        raise InputError("interval decomposition needs a full Prim run")
    cuts = np.flatnonzero(trace.edge_weight > p) + 1
    return ComponentIntervals(float(p), tuple(int(c) for c in cuts) + (trace.spec.n,))


def verify_interval_representation(trace: PrimTrace, p: float, spec: GraphSpec | None = None,
                                   oracle: WeightOracle | None = None) -> bool:
    spec = spec or trace.spec
    intervals = intervals_from_prim(trace, p)
    edges = realized_edges(spec, oracle, p, method="exhaustive")
    return set(intervals.vertex_sets(trace)) == set(components_bruteforce(edges, spec))


@dataclass(frozen=True)
class GiantStats:
    size: int
    c_b: int
    c_w: int
    second_size: int
    k_minus: int | None = None
    k_plus: int | None = None


def giant_stats(intervals: ComponentIntervals, trace: PrimTrace) -> GiantStats:
    """Largest component read off the Prim intervals (ties: lowest start rank)."""
    spans = intervals.intervals
    sizes = [b - a + 1 for a, b in spans]
    top = max(range(len(spans)), key=lambda j: (sizes[j], -spans[j][0]))
    a, b = spans[top]
    c_b = int(trace.black_prefix[b] - trace.black_prefix[a - 1])
    rest = sizes[:top] + sizes[top + 1:]
    return GiantStats(sizes[top], c_b, sizes[top] - c_b, max(rest, default=0), a, b)


def giant_stats_from_components(components, spec: GraphSpec) -> GiantStats:
    """Largest component from a plain partition; no rank information."""
    ordered = sorted(components, key=len, reverse=True)
    giant = ordered[0]
    c_b = sum(1 for v in giant if v < spec.n_b)
    second = len(ordered[1]) if len(ordered) > 1 else 0
    return GiantStats(len(giant), c_b, len(giant) - c_b, second)
