"""Limit theory: two-type Poisson branching process and giant-component curves.

With black fraction ``theta`` set ``gamma = sqrt((1 - theta) / theta)``.  A
black individual has Poisson(lam * gamma) white children and a white one
Poisson(lam / gamma) black children.  The extinction probabilities
``(q1, q2)`` from a black / white ancestor solve::

    q1 = exp(lam * gamma * (q2 - 1)),    q2 = exp(lam / gamma * (q1 - 1))

and the giant component of G(n_b, n_w, lam / sqrt(n_b n_w)) holds a fraction
``ell = theta (1 - q1) + (1 - theta)(1 - q2)`` of all vertices, of which a
share ``rho = theta (1 - q1) / ell`` is black.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .graph_model import InputError
from .streams import BP_STREAM, substream

NEAR_CRITICAL = 1e-6
BP_BLOCK = 4096
# a population this large dies out with probability < q^(cap) ~ 0
BP_SURVIVAL_CAP = 10_000


@dataclass(frozen=True)
class ThetaParams:
    theta: float
    gamma: float
    alpha: float

    @classmethod
    def of(cls, theta: float) -> "ThetaParams":
        if not 0.0 < theta < 1.0:
            raise InputError(f"theta must lie in (0, 1), got {theta}")
        return cls(theta, math.sqrt((1.0 - theta) / theta), 1.0 / math.sqrt(theta * (1.0 - theta)))


@dataclass(frozen=True)
class ExtinctionPair:
    q1: float
    q2: float
    lam: float


@dataclass(frozen=True)
class LimitPoint:
    lam: float
    ell: float
    rho: float


@dataclass(frozen=True)
class CurveTable:
    s: np.ndarray
    lam: np.ndarray
    rho: np.ndarray

    def rows(self):
        return zip(self.s.tolist(), self.lam.tolist(), self.rho.tolist())

    def to_csv(self, path=None) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(("s", "lambda", "rho"))
        for row in self.rows():
            writer.writerow([format(x, ".17g") for x in row])
        text = buf.getvalue()
        if path is not None:
            with open(path, "w", newline="") as fh:
                fh.write(text)
        return text


def sublinear_limit(theta: float) -> float:
    """Limiting black fraction among the first o(n) Prim ranks: 1 / (1 + gamma)."""
    par = ThetaParams.of(theta)
    return 1.0 / (1.0 + par.gamma)


def _pgf2(x, lam, gamma):
    # black extinction after two generations, as a function of itself
    return math.exp(lam * gamma * (math.exp(lam / gamma * (x - 1.0)) - 1.0))


def extinction_F(x: float, lam: float, theta: float) -> float:
    """``lam*gamma*(exp(lam/gamma*(x-1)) - 1) - log x``; its smaller root is q1."""
    g = ThetaParams.of(theta).gamma
    return lam * g * math.expm1(lam / g * (x - 1.0)) - math.log(x)


def extinction_probabilities(theta: float, lam: float) -> ExtinctionPair:
    """Extinction probabilities from a black (q1) and a white (q2) ancestor.

    The two-generation generating function iterated upward from 0 converges
    to its smallest fixed point; Newton steps on ``extinction_F`` then polish
    it.  Both stay left of the root, so the trivial root at 1 is never hit.
    """
    par = ThetaParams.of(theta)
    if not lam > 0.0:
        raise InputError(f"lambda must be positive, got {lam}")
    if lam <= 1.0 + NEAR_CRITICAL:
        return ExtinctionPair(1.0, 1.0, lam)
    g = par.gamma
    x = 0.0
    for _ in range(200):
        nx = _pgf2(x, lam, g)
        if abs(nx - x) < 1e-14:
            x = nx
            break
        x = nx
    for _ in range(100_000):
        e = math.exp(lam / g * (x - 1.0))
        f = lam * g * (e - 1.0) - math.log(x)
        df = lam * lam * e - 1.0 / x
        step = f / df
        if not step < 0.0:
            break
        x -= step
        if -step < 1e-15:
            break
    q1 = x
    q2 = math.exp(lam / g * (q1 - 1.0))
    return ExtinctionPair(q1, q2, lam)


def fixed_point_residuals(theta: float, pair: ExtinctionPair) -> tuple[float, float]:
    g = ThetaParams.of(theta).gamma
    lam = pair.lam
    return (pair.q1 - math.exp(lam * g * (pair.q2 - 1.0)),
            pair.q2 - math.exp(lam / g * (pair.q1 - 1.0)))


def ell_rho(theta: float, lam: float) -> LimitPoint:
    """Giant fraction ``ell`` and its black share ``rho`` for ``lam > 1``."""
    par = ThetaParams.of(theta)
    if not lam > 1.0:
        raise InputError(f"ell is only defined for lambda > 1, got {lam}")
    if lam <= 1.0 + NEAR_CRITICAL:
        return LimitPoint(lam, 0.0, 1.0 / (1.0 + par.gamma))
    q = extinction_probabilities(theta, lam)
    black = theta * (1.0 - q.q1)
    ell = black + (1.0 - theta) * (1.0 - q.q2)
    return LimitPoint(lam, ell, black / ell)


def giant_system_residuals(theta: float, point: LimitPoint) -> tuple[float, float]:
    """Residuals of the (ell, rho) system solved by the giant component."""
    a = ThetaParams.of(theta).alpha
    lam, ell, rho = point.lam, point.ell, point.rho
    return (rho * ell - theta * -math.expm1(-a * lam * (1.0 - rho) * ell),
            (1.0 - rho) * ell - (1.0 - theta) * -math.expm1(-a * lam * rho * ell))


def ell_inverse(theta: float, s: float) -> float:
    """The ``lam > 1`` with ``ell(lam) = s``.

    ``ell`` is continuous and strictly increasing, so the bracket
    ``[1 + 1e-9, 2]`` is doubled on the right until it straddles ``s`` and
    the root is then refined by Brent's method.
    """
    ThetaParams.of(theta)
    if not 0.0 < s < 1.0:
        raise InputError(f"s must lie in (0, 1), got {s}")
    lo, hi = 1.0 + 1e-9, 2.0
    while ell_rho(theta, hi).ell < s:
        lo, hi = hi, 2.0 * hi
        if hi > 1e6:
            raise InputError(f"s={s} too close to 1 to invert")
    return brentq(lambda lam: ell_rho(theta, lam).ell - s, lo, hi, xtol=1e-14, rtol=1e-15,
                  maxiter=500)


def default_grid(points: int = 512) -> np.ndarray:
    """``points`` equally spaced values strictly inside (0, 1)."""
    return np.arange(1, points + 1) / (points + 1)


def linear_limit_curve(theta: float, grid=None) -> CurveTable:
    """Rows ``(s, ell^{-1}(s), rho(ell^{-1}(s)))`` over ``grid``."""
    s = default_grid() if grid is None else np.asarray(grid, dtype=float)
    if s.size == 0 or np.any(s <= 0) or np.any(s >= 1) or np.any(np.diff(s) <= 0):
        raise InputError("grid must be strictly increasing inside (0, 1)")
    lam = np.array([ell_inverse(theta, x) for x in s])
    rho = np.array([ell_rho(theta, x).rho for x in lam])
    return CurveTable(s, lam, rho)


def linear_limit(theta: float, s: float) -> float:
    """Limit of the black fraction among the first ``s n`` Prim ranks."""
    return ell_rho(theta, ell_inverse(theta, s)).rho


def simulate_two_type_bp(theta: float, lam: float, max_generations: int, trials: int,
                         seed: int) -> float:
    """Fraction of trials, started from one black individual, that die out
    within ``max_generations`` generations.

    Trials run in fixed blocks of 4096, each block on its own (seed, block)
    stream, so the answer does not depend on how blocks are scheduled.
    Populations above ``BP_SURVIVAL_CAP`` are counted as surviving.
    """
    par = ThetaParams.of(theta)
    if trials < 1:
        raise InputError("trials must be >= 1")
    if max_generations < 0:
        raise InputError("max_generations must be >= 0")
    mean_white = lam * par.gamma   # white children of a black
    mean_black = lam / par.gamma   # black children of a white
    extinct = 0
    for block, start in enumerate(range(0, trials, BP_BLOCK)):
        size = min(BP_BLOCK, trials - start)
        rng = substream(seed, BP_STREAM, block)
        z1 = np.ones(size, dtype=np.int64)
        z2 = np.zeros(size, dtype=np.int64)
        for _ in range(max_generations):
            alive = (z1 + z2 > 0) & (z1 + z2 < BP_SURVIVAL_CAP)
            if not alive.any():
                break
            n1 = rng.poisson(mean_black * z2[alive])
            n2 = rng.poisson(mean_white * z1[alive])
            z1[alive] = n1
            z2[alive] = n2
        extinct += int(np.count_nonzero(z1 + z2 == 0))
    return extinct / trials
