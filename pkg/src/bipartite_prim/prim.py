"""Prim's algorithm (invasion percolation) on K_{n_b, n_w}.

Dense variant: every out-of-tree vertex keeps the lightest edge joining it to
the current tree.  When a vertex joins, only the out-of-tree vertices of the
opposite colour can gain a lighter edge, so only that side is rescanned.
The minimum is located through sqrt(n) block minima: best-edge values only
decrease while a vertex is outside the tree, so an update is O(1) and a
removal rescans one block.  A run stopped after ``m`` steps evaluates
``O(m * n)`` weights with ``O(n)`` memory.

Exact weight ties are broken by the lexicographic order of the edge
``(black_index, white_index)``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from numba import njit

from .graph_model import (
    EXPLICIT,
    IMPLICIT,
    Colour,
    EdgeId,
    GraphSpec,
    InputError,
    VertexId,
    WeightOracle,
    _cell,
    row_keys,
)
from .streams import START_STREAM, substream


@dataclass(frozen=True)
class StartPolicy:
    """How sigma(1) is chosen.

    ``kind`` is ``"uniform"`` (any vertex), ``"black"``, ``"white"`` or
    ``"fixed"`` (with ``vertex`` set).
    """

    kind: str = "uniform"
    vertex: VertexId | None = None

    def __post_init__(self):
        if self.kind not in ("uniform", "black", "white", "fixed"):
            raise InputError(f"unknown start policy {self.kind!r}")
        if (self.kind == "fixed") != (self.vertex is not None):
            raise InputError("a vertex is required exactly for the 'fixed' policy")

    @classmethod
    def uniform_all(cls):
        return cls("uniform")

    @classmethod
    def uniform_black(cls):
        return cls("black")

    @classmethod
    def uniform_white(cls):
        return cls("white")

    @classmethod
    def fixed(cls, v: VertexId):
        return cls("fixed", VertexId(Colour(v.colour), int(v.index)))

    def pick(self, spec: GraphSpec) -> int:
        """Global id of the start vertex, drawn from the (seed, "start") stream."""
        if self.kind == "fixed":
            return spec.global_id(self.vertex)
        rng = substream(spec.seed, START_STREAM)
        if self.kind == "uniform":
            return int(rng.integers(spec.n))
        if self.kind == "black":
            return int(rng.integers(spec.n_b))
        return spec.n_b + int(rng.integers(spec.n_w))


@njit(inline="always")
def _before(u1, b1, w1, u2, b2, w2):
    # lexicographic order on (weight, black_index, white_index)
    if u1 != u2:
        return u1 < u2
    if b1 != b2:
        return b1 < b2
    return w1 < w2


@njit(cache=True)
def _prim_kernel(n_b, n_w, mode, table, key, start, k_max):
    n = n_b + n_w
    sigma = np.empty(k_max, dtype=np.int64)
    e_b = np.empty(k_max - 1, dtype=np.int64)
    e_w = np.empty(k_max - 1, dtype=np.int64)
    e_u = np.empty(k_max - 1, dtype=np.float64)

    if mode == EXPLICIT:
        rk_b = np.empty(0, dtype=np.uint64)
        rk_w = np.empty(0, dtype=np.uint64)
    elif mode == IMPLICIT:
        rk_b = row_keys(key, n_b)
        rk_w = np.empty(0, dtype=np.uint64)
    else:
        rk_b = np.empty(0, dtype=np.uint64)
        rk_w = row_keys(key, n_w)

    # lightest known edge from each out-of-tree vertex (global id) to the tree
    best = np.full(n, 2.0)
    eb = np.full(n, n_b, dtype=np.int64)
    ew = np.full(n, n_w, dtype=np.int64)

    # block minima over global ids; values only ever decrease until removal
    bsize = max(1, int(np.sqrt(n)))
    nblocks = (n + bsize - 1) // bsize
    barg = np.arange(0, n, bsize)

    # out-of-tree vertices of each colour, kept compact with swap-removal
    out_b = np.arange(n_b)
    pos_b = np.arange(n_b)
    cnt_b = n_b
    out_w = np.arange(n_w)
    pos_w = np.arange(n_w)
    cnt_w = n_w

    buf = np.empty(max(n_b, n_w))
    v = start
    for k in range(k_max):
        sigma[k] = v
        best[v] = 3.0
        if v < n_b:
            i = pos_b[v]
            last = out_b[cnt_b - 1]
            out_b[i] = last
            pos_b[last] = i
            cnt_b -= 1
        else:
            w = v - n_b
            i = pos_w[w]
            last = out_w[cnt_w - 1]
            out_w[i] = last
            pos_w[last] = i
            cnt_w -= 1
        if k == k_max - 1:
            break

        blk = v // bsize
        if barg[blk] == v:
            lo = blk * bsize
            hi = min(n, lo + bsize)
            a = lo
            for j in range(lo + 1, hi):
                if _before(best[j], eb[j], ew[j], best[a], eb[a], ew[a]):
                    a = j
            barg[blk] = a

        if v < n_b:
            b = v
            # hashing in its own tight loop runs noticeably faster
            if mode == EXPLICIT:
                for i in range(cnt_w):
                    buf[i] = table[b, out_w[i]]
            elif mode == IMPLICIT:
                rk = rk_b[b]
                for i in range(cnt_w):
                    buf[i] = _cell(rk, out_w[i])
            else:
                for i in range(cnt_w):
                    buf[i] = _cell(rk_w[out_w[i]], b)
            for i in range(cnt_w):
                w = out_w[i]
                u = buf[i]
                g = n_b + w
                # exact ties are rare enough to take the slow comparison
                if u < best[g] or (u == best[g] and _before(u, b, w, best[g], eb[g], ew[g])):
                    best[g] = u
                    eb[g] = b
                    ew[g] = w
                    a = barg[g // bsize]
                    if u < best[a] or (u == best[a] and _before(u, b, w, best[a], eb[a], ew[a])):
                        barg[g // bsize] = g
        else:
            w = v - n_b
            if mode == EXPLICIT:
                for i in range(cnt_b):
                    buf[i] = table[out_b[i], w]
            elif mode == IMPLICIT:
                for i in range(cnt_b):
                    buf[i] = _cell(rk_b[out_b[i]], w)
            else:
                rk = rk_w[w]
                for i in range(cnt_b):
                    buf[i] = _cell(rk, out_b[i])
            for i in range(cnt_b):
                b = out_b[i]
                u = buf[i]
                if u < best[b] or (u == best[b] and _before(u, b, w, best[b], eb[b], ew[b])):
                    best[b] = u
                    eb[b] = b
                    ew[b] = w
                    a = barg[b // bsize]
                    if u < best[a] or (u == best[a] and _before(u, b, w, best[a], eb[a], ew[a])):
                        barg[b // bsize] = b

        nxt = barg[0]
        for j in range(1, nblocks):
            a = barg[j]
            if _before(best[a], eb[a], ew[a], best[nxt], eb[nxt], ew[nxt]):
                nxt = a
        e_b[k] = eb[nxt]
        e_w[k] = ew[nxt]
        e_u[k] = best[nxt]
        v = nxt
    return sigma, e_b, e_w, e_u


@dataclass(frozen=True, eq=False)
class PrimTrace:
    """Output of a (possibly truncated) Prim run.

    Ranks are 1-based as in the math: ``sigma[k-1]`` is the global id of the
    vertex of rank ``k``, and ``edge_*[k-1]`` describe the Prim edge e_k that
    attaches rank ``k+1``.  ``black_prefix`` has length ``L+1`` with
    ``black_prefix[k] = |Sigma^b(k)|``; ``tau_b[j-1]`` is the rank of the
    ``j``-th black vertex.
    """

    spec: GraphSpec
    sigma: np.ndarray
    edge_black: np.ndarray
    edge_white: np.ndarray
    edge_weight: np.ndarray
    black_prefix: np.ndarray = field(init=False)
    tau_b: np.ndarray = field(init=False)

    def __post_init__(self):
        is_black = self.sigma < self.spec.n_b
        prefix = np.concatenate(([0], np.cumsum(is_black)))
        object.__setattr__(self, "black_prefix", prefix)
        object.__setattr__(self, "tau_b", np.flatnonzero(is_black) + 1)
        for arr in (self.sigma, self.edge_black, self.edge_white, self.edge_weight,
                    self.black_prefix, self.tau_b):
            arr.setflags(write=False)

    def __len__(self) -> int:
        return int(self.sigma.size)

    @property
    def is_full(self) -> bool:
        return len(self) == self.spec.n

    @property
    def tau_w(self) -> np.ndarray:
        return np.flatnonzero(self.sigma >= self.spec.n_b) + 1

    @cached_property
    def rank_of(self) -> np.ndarray:
        """Rank (1-based) of every global id; 0 for vertices not yet reached."""
        ranks = np.zeros(self.spec.n, dtype=np.int64)
        ranks[self.sigma] = np.arange(1, len(self) + 1)
        return ranks

    def vertex(self, k: int) -> VertexId:
        return self.spec.vertex(self.sigma[k - 1])

    def prim_edges(self) -> list[tuple[EdgeId, float]]:
        return [(EdgeId(int(b), int(w)), float(u))
                for b, w, u in zip(self.edge_black, self.edge_white, self.edge_weight)]

    def total_weight(self) -> float:
        return float(np.sum(self.edge_weight))

    def prefix(self, m: int) -> "PrimTrace":
        if not 1 <= m <= len(self):
            raise InputError(f"prefix length {m} out of range")
        return PrimTrace(self.spec, self.sigma[:m].copy(), self.edge_black[:m - 1].copy(),
                         self.edge_white[:m - 1].copy(), self.edge_weight[:m - 1].copy())


def run_prim(spec: GraphSpec, oracle: WeightOracle | None = None,
             policy: StartPolicy | None = None, k_max: int | None = None) -> PrimTrace:
    """Run Prim's algorithm for ``k_max`` steps (all ``n`` when None)."""
    if oracle is None:
        oracle = WeightOracle.implicit(spec)
    if not oracle.matches(spec):
        raise InputError("oracle dimensions do not match the graph spec")
    policy = policy or StartPolicy()
    if k_max is None:
        k_max = spec.n
    k_max = int(k_max)
    if k_max < 1:
        raise InputError(f"k_max must be >= 1, got {k_max}")
    if k_max > spec.n:
        raise InputError(f"k_max={k_max} exceeds n={spec.n}")
    start = policy.pick(spec)
    table = oracle.table if oracle.mode == EXPLICIT else np.empty((0, 0))
    sigma, e_b, e_w, e_u = _prim_kernel(spec.n_b, spec.n_w, oracle.mode, table,
                                        oracle.key, start, k_max)
    return PrimTrace(spec, sigma, e_b, e_w, e_u)


def colour_ratio(trace: PrimTrace, k: int) -> float:
    """Fraction of black vertices among the first ``k`` Prim ranks."""
    if not 1 <= k <= len(trace):
        raise InputError(f"k={k} outside [1, {len(trace)}]")
    return trace.black_prefix[k] / k


def ratio_trajectory(trace: PrimTrace, ks) -> list[tuple[int, float]]:
    return [(int(k), colour_ratio(trace, int(k))) for k in ks]
