"""Graph exploration orders and the black 2-neighbourhood exploration.

An ordering ``pi`` of a graph's vertices is a sequence with ``pi[i-1]`` the
vertex of rank ``i``.  It is a graph exploration order (GEO) when, for any two
ranks ``i <= j`` in one component, some rank window ``[i', j]`` with
``i' <= i`` induces a connected subgraph.  Prim's order is a GEO for every
percolated graph G(n_b, n_w, p) built from the same weights.

:func:`two_neighbourhood_exploration` walks the black vertices through shared
white neighbours and records, step by step, how many vertices it discovers
and how many remain available; :func:`check_counting_identities` verifies the
exact relations between those counts.
"""
from __future__ import annotations

import csv
import heapq
from collections import deque
from dataclasses import dataclass, field
from typing import Hashable, Mapping, Sequence

import numpy as np

from .graph_model import GraphSpec, InputError, WeightOracle
from .percolation import components_bruteforce, realized_edges
from .prim import PrimTrace, StartPolicy, run_prim

TRACE_COLUMNS = ("k", "tau_b", "O_w", "O_b", "K_w", "K_b", "S_w", "S_b",
                 "A_w", "A_b", "R", "J_w", "I_b")


# ---------------------------------------------------------------------------
# generic orderings

def _ranks(adj: Mapping, pi: Sequence[Hashable]) -> dict:
    ranks = {v: i for i, v in enumerate(pi, start=1)}
    if len(ranks) != len(pi) or set(ranks) != set(adj):
        raise InputError("ordering is not a bijection onto the graph's vertex set")
    return ranks


def _components(adj: Mapping) -> list[list]:
    seen = set()
    comps = []
    for s in adj:
        if s in seen:
            continue
        seen.add(s)
        comp = [s]
        queue = deque([s])
        while queue:
            x = queue.popleft()
            for y in adj[x]:
                if y not in seen:
                    seen.add(y)
                    comp.append(y)
                    queue.append(y)
        comps.append(comp)
    return comps


def is_geo(adj: Mapping, pi: Sequence[Hashable]) -> bool:
    """GEO test through the interval characterisation.

    Each component must occupy a contiguous block of ranks, and every vertex
    other than the lowest-ranked one of its component needs a neighbour of
    lower rank (which chains into a rank-increasing path from the minimum).
    """
    ranks = _ranks(adj, pi)
    for comp in _components(adj):
        rs = [ranks[v] for v in comp]
        lo, hi = min(rs), max(rs)
        if hi - lo + 1 != len(comp):
            return False
        for v in comp:
            r = ranks[v]
            if r != lo and not any(ranks[u] < r for u in adj[v]):
                return False
    return True


def _window_connected(adj, pi, a, b) -> bool:
    window = set(pi[a - 1:b])
    start = pi[a - 1]
    seen = {start}
    stack = [start]
    while stack:
        x = stack.pop()
        for y in adj[x]:
            if y in window and y not in seen:
                seen.add(y)
                stack.append(y)
    return len(seen) == len(window)


def is_geo_definition(adj: Mapping, pi: Sequence[Hashable]) -> bool:
    """Literal quantifier check of the GEO definition; cubic, for tiny graphs."""
    _ranks(adj, pi)
    pi = list(pi)
    comp_of = {}
    for c, comp in enumerate(_components(adj)):
        for v in comp:
            comp_of[v] = c
    n = len(pi)
    for i in range(1, n + 1):
        for j in range(i, n + 1):
            if comp_of[pi[i - 1]] != comp_of[pi[j - 1]]:
                continue
            if not any(_window_connected(adj, pi, a, j) for a in range(1, i + 1)):
                return False
    return True


def explore_in_order(adj: Mapping, pi: Sequence[Hashable]) -> list:
    """Exploration that always visits the lowest-ranked frontier vertex.

    When the frontier (unvisited neighbours of visited vertices) is empty the
    lowest-ranked unvisited vertex starts a new component.  For a GEO the
    result equals ``pi``.
    """
    ranks = _ranks(adj, pi)
    pi = list(pi)
    visited = set()
    frontier: list = []
    queued = set()
    nxt = 0
    out = []
    for _ in range(len(pi)):
        if frontier:
            _, v = heapq.heappop(frontier)
        else:
            while pi[nxt] in visited:
                nxt += 1
            v = pi[nxt]
        visited.add(v)
        out.append(v)
        for u in adj[v]:
            if u not in visited and u not in queued:
                queued.add(u)
                heapq.heappush(frontier, (ranks[u], u))
    return out


# ---------------------------------------------------------------------------
# percolated bipartite graph

@dataclass(frozen=True, eq=False)
class PercolatedGraph:
    """G(n_b, n_w, p) with adjacency lists over global vertex ids."""

    spec: GraphSpec
    p: float
    edges: np.ndarray
    adj: list[list[int]] = field(repr=False)

    @classmethod
    def from_edges(cls, spec: GraphSpec, p: float, edges) -> "PercolatedGraph":
        edges = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
        adj: list[list[int]] = [[] for _ in range(spec.n)]
        for b, w in edges.tolist():
            adj[b].append(spec.n_b + w)
            adj[spec.n_b + w].append(b)
        return cls(spec, float(p), edges, adj)

    def as_mapping(self) -> dict[int, list[int]]:
        return dict(enumerate(self.adj))

    def has_edge(self, b: int, w: int) -> bool:
        return (self.spec.n_b + w) in self.adj[b]


def percolate(spec: GraphSpec, oracle: WeightOracle | None, p: float) -> PercolatedGraph:
    """Percolated graph coupled to ``oracle`` (exhaustive weight filter)."""
    return PercolatedGraph.from_edges(spec, p, realized_edges(spec, oracle, p, "exhaustive"))


def black_contraction(graph: PercolatedGraph) -> dict[int, set[int]]:
    """Blacks adjacent when they share a white neighbour in ``graph``."""
    n_b = graph.spec.n_b
    adj = {b: set() for b in range(n_b)}
    for w in range(n_b, graph.spec.n):
        nbrs = graph.adj[w]
        for x in nbrs:
            adj[x].update(y for y in nbrs if y != x)
    return adj


# ---------------------------------------------------------------------------
# 2-neighbourhood exploration

@dataclass(frozen=True, eq=False)
class ExplorationTrace:
    """Per-step counts of the black 2-neighbourhood exploration.

    Arrays indexed by step hold step ``k`` at position ``k-1``; the prefix
    sums ``S_w`` and ``S_b`` have an extra leading zero so ``S_w[k]`` is the
    sum of the first ``k`` discoveries.  ``sigma_b`` lists black indices in
    exploration order and ``tau_b`` the Prim ranks of successive blacks.
    """

    n_b: int
    n_w: int
    sigma_b: np.ndarray
    tau_b: np.ndarray
    O_w: np.ndarray
    O_b: np.ndarray
    K_w: np.ndarray
    K_b: np.ndarray
    S_w: np.ndarray
    S_b: np.ndarray
    A_w: np.ndarray
    A_b: np.ndarray
    R: np.ndarray
    J_w: np.ndarray
    I_b: np.ndarray
    lead_ranks: np.ndarray
    # membership bookkeeping (None in counters-only mode)
    white_found_at: np.ndarray | None = None
    black_found_at: np.ndarray | None = None
    white_leads: np.ndarray | None = None
    roots: np.ndarray | None = None

    def rows(self):
        for k in range(1, self.n_b + 1):
            i = k - 1
            yield (k, int(self.tau_b[i]), int(self.O_w[i]), int(self.O_b[i]), int(self.K_w[i]),
                   int(self.K_b[i]), int(self.S_w[k]), int(self.S_b[k]), int(self.A_w[i]),
                   int(self.A_b[i]), int(self.R[i]), int(self.J_w[i]), int(self.I_b[i]))

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(TRACE_COLUMNS)
            writer.writerows(self.rows())


def _check_coupling(graph: PercolatedGraph, trace: PrimTrace) -> None:
    if graph.spec.n_b != trace.spec.n_b or graph.spec.n_w != trace.spec.n_w:
        raise InputError("graph and Prim trace have different vertex counts")
    if not trace.is_full:
        raise InputError("exploration needs a full Prim run")
    # every Prim edge is present in the graph exactly when its weight is <= p
    for b, w, u in zip(trace.edge_black.tolist(), trace.edge_white.tolist(),
                       trace.edge_weight.tolist()):
        if graph.has_edge(b, w) != (u <= graph.p):
            raise InputError("graph and Prim trace come from different weights")


def explore_blacks(graph: PercolatedGraph, rank: np.ndarray) -> np.ndarray:
    """Black exploration order through shared white neighbours.

    Visit the lowest-ranked discovered black if any, otherwise the
    lowest-ranked unexplored black.
    """
    n_b = graph.spec.n_b
    adj = graph.adj
    by_rank = np.argsort(rank[:n_b], kind="stable")
    explored = np.zeros(n_b, dtype=bool)
    queued = np.zeros(n_b, dtype=bool)
    heap: list[tuple[int, int]] = []
    order = np.empty(n_b, dtype=np.int64)
    ptr = 0
    for k in range(n_b):
        if heap:
            _, v = heapq.heappop(heap)
        else:
            while explored[by_rank[ptr]]:
                ptr += 1
            v = int(by_rank[ptr])
        explored[v] = True
        order[k] = v
        for w in adj[v]:
            for u in adj[w]:
                if not explored[u] and not queued[u]:
                    queued[u] = True
                    heapq.heappush(heap, (int(rank[u]), u))
    return order


def two_neighbourhood_exploration(graph: PercolatedGraph, trace: PrimTrace,
                                  track_sets: bool | None = None) -> ExplorationTrace:
    spec = graph.spec
    _check_coupling(graph, trace)
    n_b, n_w = spec.n_b, spec.n_w
    if track_sets is None:
        track_sets = spec.n <= 10_000
    adj = graph.adj
    rank = trace.rank_of
    tau = trace.tau_b.astype(np.int64)
    white_rank = rank[n_b:]

    sigma_b = explore_blacks(graph, rank)

    # leads and roots from the graph's own components
    lead = np.zeros(spec.n, dtype=bool)
    root = np.zeros(n_b, dtype=bool)
    for comp in components_bruteforce(graph.edges, spec):
        members = list(comp)
        lead[min(members, key=lambda v: rank[v])] = True
        blacks = [v for v in members if v < n_b]
        if blacks:
            root[min(blacks, key=lambda v: rank[v])] = True
    lead_ranks = np.sort(rank[lead])
    white_lead_ranks = np.sort(white_rank[lead[n_b:]])
    root_ranks = np.sort(rank[:n_b][root])
    J_w = np.searchsorted(white_lead_ranks, tau, side="right")
    I_b = np.searchsorted(root_ranks, tau, side="right")
    R = (tau - np.arange(1, n_b + 1)) - J_w

    # whites in increasing Prim rank, consumed as tau advances
    whites_by_rank = np.argsort(white_rank, kind="stable")
    sorted_wr = white_rank[whites_by_rank]
    in_kw = np.ones(n_w, dtype=bool)
    in_kb = np.ones(n_b, dtype=bool)
    kw = n_w
    kb = n_b
    wptr = 0
    white_found = np.zeros(n_w, dtype=np.int64)
    black_found = np.zeros(n_b, dtype=np.int64)
    O_w = np.zeros(n_b, dtype=np.int64)
    O_b = np.zeros(n_b, dtype=np.int64)
    K_w = np.zeros(n_b, dtype=np.int64)
    K_b = np.zeros(n_b, dtype=np.int64)
    for k in range(1, n_b + 1):
        t = tau[k - 1]
        while wptr < n_w and sorted_wr[wptr] <= t:
            w = whites_by_rank[wptr]
            if in_kw[w]:
                in_kw[w] = False
                kw -= 1
            wptr += 1
        joined = trace.sigma[t - 1]
        if in_kb[joined]:
            in_kb[joined] = False
            kb -= 1
        K_w[k - 1] = kw
        K_b[k - 1] = kb

        v = int(sigma_b[k - 1])
        found_w = 0
        found_b = 0
        for g in adj[v]:
            w = g - n_b
            if in_kw[w]:
                in_kw[w] = False
                kw -= 1
                white_found[w] = k
                found_w += 1
        for g in adj[v]:
            for u in adj[g]:
                if u != v and in_kb[u]:
                    in_kb[u] = False
                    kb -= 1
                    black_found[u] = k
                    found_b += 1
        O_w[k - 1] = found_w
        O_b[k - 1] = found_b

    S_w = np.concatenate(([0], np.cumsum(O_w)))
    S_b = np.concatenate(([0], np.cumsum(O_b)))

    steps = np.arange(1, n_b + 1)
    explored_at = np.empty(n_b, dtype=np.int64)
    explored_at[sigma_b] = steps
    if track_sets:
        # direct evaluation of the active-set definitions
        A_w = np.array([np.count_nonzero((white_found >= 1) & (white_found <= k - 1)
                                         & (white_rank > tau[k - 1])) for k in steps])
        A_b = np.array([np.count_nonzero((black_found >= 1) & (black_found <= k)
                                         & (explored_at > k)) for k in steps])
    else:
        # same counts through difference arrays: a discovered white is active
        # for k in [found+1, #blacks ranked before it], a discovered black for
        # k in [found, explored-1]
        diff = np.zeros(n_b + 2, dtype=np.int64)
        blacks_before = trace.black_prefix[white_rank]
        sel = (white_found >= 1) & (blacks_before >= white_found + 1)
        np.add.at(diff, white_found[sel] + 1, 1)
        np.add.at(diff, blacks_before[sel] + 1, -1)
        A_w = np.cumsum(diff)[1:n_b + 1]
        diff = np.zeros(n_b + 2, dtype=np.int64)
        sel = (black_found >= 1) & (explored_at > black_found)
        np.add.at(diff, black_found[sel], 1)
        np.add.at(diff, explored_at[sel], -1)
        A_b = np.cumsum(diff)[1:n_b + 1]

    extra = {}
    if track_sets:
        extra = dict(white_found_at=white_found, black_found_at=black_found,
                     white_leads=np.flatnonzero(lead[n_b:]), roots=np.flatnonzero(root))
    return ExplorationTrace(n_b, n_w, sigma_b, tau, O_w, O_b, K_w, K_b, S_w, S_b,
                            np.asarray(A_w, dtype=np.int64), np.asarray(A_b, dtype=np.int64),
                            R, J_w, I_b, lead_ranks, **extra)


@dataclass
class IdentityReport:
    checked: int = 0
    violations: list[tuple[str, int, int, int]] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def __str__(self):
        if self.ok:
            return f"all {self.checked} identity checks hold"
        head = ", ".join(f"{name} at k={k}: {lhs} != {rhs}"
                         for name, k, lhs, rhs in self.violations[:5])
        return f"{len(self.violations)} of {self.checked} checks failed: {head}"


def check_counting_identities(trace: ExplorationTrace) -> IdentityReport:
    """Exact relations between active sets, discoveries, leads and roots.

    For every step ``k``::

        A_w(k)        = S_w[k-1] - R(k)
        A_b(k)        = S_b[k] - k + I_b(k)
        I_b(k) - 1    = -min(0, min_{1<=j<=k-1} (S_b[j] - j))
        n_w - K_w(k)  = S_w[k-1] + J_w(k)
        n_b - K_b(k)  = S_b[k-1] + I_b(k)

    In set-tracking mode the discovered sets are also checked to avoid white
    leads and roots.
    """
    report = IdentityReport()
    running_min = 0

    def expect(name, k, lhs, rhs):
        report.checked += 1
        if lhs != rhs:
            report.violations.append((name, k, int(lhs), int(rhs)))

    for k in range(1, trace.n_b + 1):
        i = k - 1
        if k >= 2:
            running_min = min(running_min, int(trace.S_b[k - 1]) - (k - 1))
        expect("A_w", k, trace.A_w[i], trace.S_w[k - 1] - trace.R[i])
        expect("A_b", k, trace.A_b[i], trace.S_b[k] - k + trace.I_b[i])
        expect("I_b", k, trace.I_b[i] - 1, -running_min)
        expect("K_w", k, trace.n_w - trace.K_w[i], trace.S_w[k - 1] + trace.J_w[i])
        expect("K_b", k, trace.n_b - trace.K_b[i], trace.S_b[k - 1] + trace.I_b[i])

    if trace.white_found_at is not None:
        hit = np.count_nonzero(trace.white_found_at[trace.white_leads] > 0)
        expect("white leads undiscovered", trace.n_b, hit, 0)
        hit = np.count_nonzero(trace.black_found_at[trace.roots] > 0)
        expect("roots undiscovered", trace.n_b, hit, 0)
    return report


def first_step_discovery(spec: GraphSpec, oracle: WeightOracle | None, p: float,
                         policy: StartPolicy | None = None) -> tuple[int, int]:
    """``(K_w(1), O_w(1))`` from a two-step Prim run.

    The first black in Prim order is sigma(1) or sigma(2); its available
    white pool is every white except a white start vertex.
    """
    oracle = oracle or WeightOracle.implicit(spec)
    trace = run_prim(spec, oracle, policy, k_max=min(2, spec.n))
    first = int(trace.sigma[0])
    if first < spec.n_b:
        black, excluded = first, -1
    else:
        black, excluded = int(trace.sigma[1]), first - spec.n_b
    weights = oracle.block([black], np.arange(spec.n_w))[0]
    pool = np.ones(spec.n_w, dtype=bool)
    if excluded >= 0:
        pool[excluded] = False
    return int(pool.sum()), int(np.count_nonzero(weights[pool] <= p))

