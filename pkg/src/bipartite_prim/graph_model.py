"""Weighted complete bipartite graph K_{n_b, n_w} with uniform edge weights.

Vertices carry a colour (black or white) and a 0-based index within their
colour.  Internally the kernels use a flat "global id": blacks occupy
``0 .. n_b-1`` and whites ``n_b .. n-1``.

Edge weights come from a :class:`WeightOracle`, either an explicit table
(hand-built tests, brute-force oracles) or an implicit counter-based hash of
``(seed, black_index, white_index)`` so that graphs with ``n_b * n_w`` in the
billions never need to be stored.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from numba import njit

MASK64 = (1 << 64) - 1

# splitmix64 constants
_GAMMA = np.uint64(0x9E3779B97F4A7C15)
_ROW_GAMMA = np.uint64(0xD1B54A32D192ED03)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_SEED_SALT = np.uint64(0x5851F42D4C957F2D)
_S30 = np.uint64(30)
_S27 = np.uint64(27)
_S31 = np.uint64(31)
_S12 = np.uint64(12)
_INV_2_52 = 1.0 / 4503599627370496.0

EXPLICIT = 0
IMPLICIT = 1
IMPLICIT_TRANSPOSED = 2


class InputError(ValueError):
    """Raised on out-of-range arguments to any public operation."""


class Colour(enum.IntEnum):
    BLACK = 0
    WHITE = 1


class VertexId(NamedTuple):
    colour: Colour
    index: int

    def __repr__(self) -> str:
        return f"{'b' if self.colour == Colour.BLACK else 'w'}{self.index}"


class EdgeId(NamedTuple):
    black_index: int
    white_index: int


@dataclass(frozen=True)
class GraphSpec:
    n_b: int
    n_w: int
    seed: int = 0

    def __post_init__(self):
        if int(self.n_b) < 1 or int(self.n_w) < 1:
            raise InputError(f"need n_b >= 1 and n_w >= 1, got ({self.n_b}, {self.n_w})")
        if not 0 <= int(self.seed) <= MASK64:
            raise InputError("seed must fit in an unsigned 64-bit integer")
        object.__setattr__(self, "n_b", int(self.n_b))
        object.__setattr__(self, "n_w", int(self.n_w))
        object.__setattr__(self, "seed", int(self.seed))

    @property
    def n(self) -> int:
        return self.n_b + self.n_w

    def swapped(self) -> "GraphSpec":
        """The same graph with colours exchanged."""
        return GraphSpec(self.n_w, self.n_b, self.seed)

    def global_id(self, v: VertexId) -> int:
        self.check_vertex(v)
        return v.index if v.colour == Colour.BLACK else self.n_b + v.index

    def vertex(self, gid: int) -> VertexId:
        gid = int(gid)
        if not 0 <= gid < self.n:
            raise InputError(f"global id {gid} out of range for n={self.n}")
        if gid < self.n_b:
            return VertexId(Colour.BLACK, gid)
        return VertexId(Colour.WHITE, gid - self.n_b)

    def check_vertex(self, v: VertexId) -> None:
        limit = self.n_b if v.colour == Colour.BLACK else self.n_w
        if not 0 <= v.index < limit:
            raise InputError(f"vertex {v!r} out of range for {self}")

    def check_edge(self, e: EdgeId) -> None:
        if not (0 <= e.black_index < self.n_b and 0 <= e.white_index < self.n_w):
            raise InputError(f"edge {tuple(e)} out of range for ({self.n_b}, {self.n_w})")


def theta_hat(spec: GraphSpec) -> float:
    """Finite-n black fraction n_b / n."""
    return spec.n_b / spec.n


# ---------------------------------------------------------------------------
# counter-based mixing

@njit(inline="always")
def _fmix64(z):
    z = (z ^ (z >> _S30)) * _M1
    z = (z ^ (z >> _S27)) * _M2
    return z ^ (z >> _S31)


@njit(inline="always")
def _to_unit(z):
    # 52 random bits -> (k + 1/2) / 2^52, strictly inside (0, 1)
    return ((z >> _S12) + 0.5) * _INV_2_52


@njit(cache=True)
def seed_key(seed):
    return _fmix64(np.uint64(seed) ^ _SEED_SALT)


@njit(cache=True)
def row_keys(key, count):
    out = np.empty(count, dtype=np.uint64)
    for i in range(count):
        out[i] = _fmix64(key + np.uint64(i + 1) * _ROW_GAMMA)
    return out


@njit(inline="always")
def _cell(row_key, col):
    return _to_unit(_fmix64(row_key + np.uint64(col + 1) * _GAMMA))


@njit(cache=True)
def _implicit_weight(key, row, col):
    rk = _fmix64(key + np.uint64(row + 1) * _ROW_GAMMA)
    return _cell(rk, col)


@njit(cache=True)
def _implicit_block(key, rows, cols):
    out = np.empty((rows.size, cols.size))
    for i in range(rows.size):
        rk = _fmix64(key + np.uint64(rows[i] + 1) * _ROW_GAMMA)
        for j in range(cols.size):
            out[i, j] = _cell(rk, cols[j])
    return out


def reference_weight(seed: int, row: int, col: int) -> float:
    """Pure-Python big-integer version of the implicit weight (test oracle)."""

    def fmix(z):
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
        return z ^ (z >> 31)

    key = fmix(seed ^ 0x5851F42D4C957F2D)
    rk = fmix((key + (row + 1) * 0xD1B54A32D192ED03) & MASK64)
    z = fmix((rk + (col + 1) * 0x9E3779B97F4A7C15) & MASK64)
    return ((z >> 12) + 0.5) / 2.0**52


@dataclass(frozen=True, eq=False)
class WeightOracle:
    """Source of edge weights for one graph.

    ``mode`` is one of ``EXPLICIT``, ``IMPLICIT`` or ``IMPLICIT_TRANSPOSED``.
    The transposed mode serves the colour-swapped graph: its weight at
    ``(b, w)`` is the base graph's weight at ``(w, b)``.
    """

    n_b: int
    n_w: int
    mode: int
    seed: int = 0
    table: np.ndarray | None = None

    @classmethod
    def implicit(cls, spec: GraphSpec) -> "WeightOracle":
        return cls(spec.n_b, spec.n_w, IMPLICIT, spec.seed)

    @classmethod
    def explicit(cls, table) -> "WeightOracle":
        table = np.array(table, dtype=np.float64, ndmin=2)
        if table.ndim != 2 or table.size == 0:
            raise InputError("explicit weight table must be a non-empty 2-D array")
        if not np.all((table > 0.0) & (table < 1.0)):
            raise InputError("explicit weights must lie strictly inside (0, 1)")
        table.setflags(write=False)
        return cls(table.shape[0], table.shape[1], EXPLICIT, 0, table)

    @property
    def key(self) -> np.uint64:
        return np.uint64(seed_key(np.uint64(self.seed)))

    def matches(self, spec: GraphSpec) -> bool:
        return (self.n_b, self.n_w) == (spec.n_b, spec.n_w)

    def transposed(self) -> "WeightOracle":
        """Oracle for the colour-swapped graph (blacks and whites exchanged)."""
        if self.mode == EXPLICIT:
            return WeightOracle.explicit(self.table.T)
        mode = IMPLICIT_TRANSPOSED if self.mode == IMPLICIT else IMPLICIT
        return WeightOracle(self.n_w, self.n_b, mode, self.seed)

    def with_weight(self, e: EdgeId, value: float) -> "WeightOracle":
        """Explicit copy of this oracle with one weight replaced."""
        table = np.array(self.matrix())
        table[e.black_index, e.white_index] = value
        return WeightOracle.explicit(table)

    def block(self, blacks, whites) -> np.ndarray:
        """Weights for the Cartesian product ``blacks x whites``."""
        blacks = np.asarray(blacks, dtype=np.int64).ravel()
        whites = np.asarray(whites, dtype=np.int64).ravel()
        if blacks.size and (blacks.min() < 0 or blacks.max() >= self.n_b):
            raise InputError("black index out of range")
        if whites.size and (whites.min() < 0 or whites.max() >= self.n_w):
            raise InputError("white index out of range")
        if self.mode == EXPLICIT:
            return self.table[np.ix_(blacks, whites)]
        if self.mode == IMPLICIT:
            return _implicit_block(self.key, blacks, whites)
        return _implicit_block(self.key, whites, blacks).T

    def matrix(self) -> np.ndarray:
        """Full ``n_b x n_w`` weight table (only sensible for small graphs)."""
        if self.mode == EXPLICIT:
            return self.table
        return self.block(np.arange(self.n_b), np.arange(self.n_w))


def edge_weight(oracle: WeightOracle, e: EdgeId) -> float:
    if not (0 <= e.black_index < oracle.n_b and 0 <= e.white_index < oracle.n_w):
        raise InputError(f"edge {tuple(e)} out of range for ({oracle.n_b}, {oracle.n_w})")
    if oracle.mode == EXPLICIT:
        return float(oracle.table[e.black_index, e.white_index])
    if oracle.mode == IMPLICIT:
        return float(_implicit_weight(oracle.key, e.black_index, e.white_index))
    return float(_implicit_weight(oracle.key, e.white_index, e.black_index))
