"""Monte Carlo experiments and exact property sweeps.

Every trial gets its own graph seed derived from ``(seed, trial)``, and
results are collected in trial order before anything is summed, so output
files are byte-identical whatever the number of worker processes.  The
worker count comes from the ``BIPARTITE_PRIM_WORKERS`` environment variable.
"""
from __future__ import annotations

import csv
import io
import json
import math
import os
import re
from fractions import Fraction
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy import stats

from .exploration import (
    check_counting_identities,
    explore_blacks,
    explore_in_order,
    first_step_discovery,
    is_geo,
    percolate,
    two_neighbourhood_exploration,
)
from .graph_model import Colour, EdgeId, GraphSpec, InputError, VertexId, WeightOracle
from .limits import ell_rho, linear_limit, sublinear_limit
from .percolation import components_bruteforce, giant_stats, intervals_from_prim
from .prim import StartPolicy, run_prim
from .streams import derive_seed, trial_seed

WORKERS_ENV = "BIPARTITE_PRIM_WORKERS"
REGIMES = ("sublinear", "linear", "verify", "curve", "bp")
CSV_COLUMNS = ("theta", "n", "regime", "k_or_s", "trials", "mean", "std",
               "ci_low", "ci_high", "theory", "abs_err")
Z95 = 1.959963984540054


class ConfigError(InputError):
    """Invalid experiment configuration (CLI exit status 2)."""


# ---------------------------------------------------------------------------
# configuration

_KAPPA_RE = re.compile(r"^(sqrt|pow\(([0-9.eE+/-]+)\)|log\(([0-9.eE+/-]+)\)|\d+)$")


def kappa_value(rule: str, n: int) -> int:
    """Evaluate a kappa rule at ``n``.

    ``"sqrt"`` gives floor(sqrt n), ``"pow(a)"`` floor(n^a), ``"log(c)"``
    floor(c log n) and a bare integer is taken literally.  ``a`` and ``c``
    may be written as fractions, e.g. ``pow(2/3)``.
    """
    rule = str(rule).replace(" ", "")
    m = _KAPPA_RE.match(rule)
    if m is None:
        raise ConfigError(f"unrecognised kappa rule {rule!r}")
    try:
        if rule == "sqrt":
            k = math.isqrt(n)
        elif m.group(2) is not None:
            # nudge so that exact powers such as 1000^(2/3) are not floored down
            k = math.floor(n ** float(Fraction(m.group(2))) * (1 + 1e-12))
        elif m.group(3) is not None:
            k = math.floor(float(Fraction(m.group(3))) * math.log(n))
        else:
            k = int(rule)
    except (ValueError, ZeroDivisionError):
        raise ConfigError(f"unrecognised kappa rule {rule!r}") from None
    if not 1 <= k <= n:
        raise ConfigError(f"kappa rule {rule!r} gives {k}, outside [1, {n}]")
    return k


def target_spec(target) -> tuple[int, int]:
    """``(n_b, n_w)`` from ``{"nb", "nw"}``, ``{"n", "theta"}`` or a pair."""
    if isinstance(target, dict):
        if "nb" in target or "n_b" in target:
            n_b, n_w = target.get("nb", target.get("n_b")), target.get("nw", target.get("n_w"))
        elif "n" in target and "theta" in target:
            n, theta = int(target["n"]), float(target["theta"])
            if not 0.0 < theta < 1.0:
                raise ConfigError(f"theta must lie in (0, 1), got {theta}")
            n_b = int(round(theta * n))
            n_w = n - n_b
        else:
            raise ConfigError(f"target needs nb/nw or n/theta: {target}")
    else:
        try:
            n_b, n_w = target
        except (TypeError, ValueError):
            raise ConfigError(f"bad target {target!r}") from None
    if n_b is None or n_w is None or int(n_b) < 1 or int(n_w) < 1:
        raise ConfigError(f"target {target} needs at least one vertex of each colour")
    return int(n_b), int(n_w)


@dataclass
class ExperimentConfig:
    targets: list[tuple[int, int]] = field(default_factory=list)
    regime: str = "sublinear"
    trials: int = 100
    seed: int = 0
    policy: str = "uniform"
    kappa: str = "pow(2/3)"
    s_list: list[float] = field(default_factory=lambda: [0.2, 0.5, 0.8])
    # verify sweep
    max_size: int = 8
    sweep_seeds: int = 200
    p_values: list[float] = field(default_factory=lambda: [0.1, 0.3, 0.7, 0.9])
    corrupt: bool = False
    output: str | None = None
    format: str = "csv"

    def __post_init__(self):
        self.validate()

    def validate(self) -> None:
        if self.regime not in REGIMES:
            raise ConfigError(f"regime must be one of {REGIMES}, got {self.regime!r}")
        if int(self.trials) < 1:
            raise ConfigError("trials must be >= 1")
        if not 0 <= int(self.seed) < 2**64:
            raise ConfigError("seed must be a 64-bit unsigned integer")
        if self.policy not in ("uniform", "black", "white"):
            raise ConfigError(f"unknown start policy {self.policy!r}")
        if self.format not in ("csv", "json"):
            raise ConfigError(f"format must be csv or json, got {self.format!r}")
        self.targets = [target_spec(t) for t in self.targets]
        if self.regime in ("sublinear", "linear") and not self.targets:
            raise ConfigError("no targets given")
        if self.regime == "sublinear":
            for n_b, n_w in self.targets:
                kappa_value(self.kappa, n_b + n_w)
        if self.regime == "linear":
            if not self.s_list or any(not 0.0 < s < 1.0 for s in self.s_list):
                raise ConfigError("s_list must be non-empty and inside (0, 1)")
            for n_b, n_w in self.targets:
                if math.floor(min(self.s_list) * (n_b + n_w)) < 1:
                    raise ConfigError(f"s={min(self.s_list)} gives no vertices at n={n_b + n_w}")
        if self.regime == "verify":
            if self.max_size < 1 or self.sweep_seeds < 1 or not self.p_values:
                raise ConfigError("empty verify sweep")
            if any(not 0.0 <= p <= 1.0 for p in self.p_values):
                raise ConfigError("p values must lie in [0, 1]")

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        known = {f for f in cls.__dataclass_fields__}
        extra = set(data) - known
        if extra:
            raise ConfigError(f"unknown config keys: {sorted(extra)}")
        return cls(**data)

    @classmethod
    def from_json(cls, path) -> "ExperimentConfig":
        try:
            with open(path) as fh:
                data = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from None
        if not isinstance(data, dict):
            raise ConfigError("config must be a JSON object")
        return cls.from_dict(data)


# ---------------------------------------------------------------------------
# aggregation

@dataclass(frozen=True)
class SummaryStats:
    theta: float
    n: int
    regime: str
    k_or_s: float
    trials: int
    mean: float
    std: float
    ci_low: float
    ci_high: float
    theory: float
    abs_err: float

    @classmethod
    def from_values(cls, values, theory: float, *, theta, n, regime, k_or_s) -> "SummaryStats":
        """Summary of per-trial values given in trial order.

        Sums use ``math.fsum`` so the result is exactly reproducible.
        """
        vals = [float(v) for v in values]
        m = len(vals)
        if m == 0:
            raise InputError("no values to summarise")
        mean = math.fsum(vals) / m
        std = math.sqrt(math.fsum((v - mean) ** 2 for v in vals) / (m - 1)) if m > 1 else 0.0
        half = Z95 * std / math.sqrt(m)
        # the clamp only matters when rounding pushes mean past a bound
        return cls(float(theta), int(n), regime, k_or_s, m, mean, std,
                   min(mean - half, mean), max(mean + half, mean), float(theory),
                   abs(mean - theory))

    def row(self) -> list[str]:
        return [_fmt(getattr(self, c)) for c in CSV_COLUMNS]


def _fmt(x) -> str:
    if isinstance(x, str):
        return x
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return format(float(x), ".17g")


def write_results(results: list[SummaryStats], path=None, fmt: str = "csv") -> str:
    if fmt == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        for r in results:
            writer.writerow(r.row())
        text = buf.getvalue()
    elif fmt == "json":
        text = json.dumps([asdict(r) for r in results], indent=2) + "\n"
    else:
        raise InputError(f"unknown format {fmt!r}")
    if path is not None:
        with open(path, "w", newline="") as fh:
            fh.write(text)
    return text


def worker_count() -> int:
    raw = os.environ.get(WORKERS_ENV, "1")
    try:
        return max(1, int(raw))
    except ValueError:
        raise ConfigError(f"{WORKERS_ENV} must be an integer, got {raw!r}") from None


def map_trials(fn, jobs: list[tuple]) -> list:
    """``[fn(*job) for job in jobs]``, possibly across processes, in job order."""
    workers = min(worker_count(), max(1, len(jobs)))
    if workers == 1:
        return [fn(*job) for job in jobs]
    with ProcessPoolExecutor(workers) as pool:
        return list(pool.map(fn, *zip(*jobs), chunksize=max(1, len(jobs) // (4 * workers))))


# ---------------------------------------------------------------------------
# Monte Carlo experiments

def _black_counts(n_b, n_w, seed, policy, ks):
    spec = GraphSpec(n_b, n_w, seed)
    trace = run_prim(spec, policy=StartPolicy(policy), k_max=max(ks))
    return [int(trace.black_prefix[k]) for k in ks]


def run_sublinear_experiment(config: ExperimentConfig) -> list[SummaryStats]:
    """Colour ratio after kappa_n Prim steps, one result per target."""
    if config.regime != "sublinear":
        raise ConfigError("run_sublinear_experiment needs regime 'sublinear'")
    out = []
    for n_b, n_w in config.targets:
        n = n_b + n_w
        k = kappa_value(config.kappa, n)
        jobs = [(n_b, n_w, trial_seed(config.seed, t), config.policy, (k,))
                for t in range(config.trials)]
        counts = map_trials(_black_counts, jobs)
        theta = n_b / n
        out.append(SummaryStats.from_values([c[0] / k for c in counts], sublinear_limit(theta),
                                            theta=theta, n=n, regime="sublinear", k_or_s=k))
    return out


def run_linear_experiment(config: ExperimentConfig) -> list[SummaryStats]:
    """Colour ratio after floor(s n) steps for each s; one Prim run per trial."""
    if config.regime != "linear":
        raise ConfigError("run_linear_experiment needs regime 'linear'")
    out = []
    s_list = sorted(config.s_list)
    for n_b, n_w in config.targets:
        n = n_b + n_w
        theta = n_b / n
        ks = tuple(math.floor(s * n) for s in s_list)
        jobs = [(n_b, n_w, trial_seed(config.seed, t), config.policy, ks)
                for t in range(config.trials)]
        counts = map_trials(_black_counts, jobs)
        for j, (s, k) in enumerate(zip(s_list, ks)):
            out.append(SummaryStats.from_values([c[j] / k for c in counts],
                                                linear_limit(theta, s),
                                                theta=theta, n=n, regime="linear", k_or_s=s))
    return out


def run_experiment(config: ExperimentConfig) -> list[SummaryStats]:
    if config.regime == "sublinear":
        return run_sublinear_experiment(config)
    if config.regime == "linear":
        return run_linear_experiment(config)
    raise ConfigError(f"regime {config.regime!r} is not a Monte Carlo experiment")


def _giant_counts(n_b, n_w, seed, p):
    spec = GraphSpec(n_b, n_w, seed)
    trace = run_prim(spec)
    g = giant_stats(intervals_from_prim(trace, p), trace)
    return g.size, g.c_b


def run_giant_experiment(n_b: int, n_w: int, lam: float, trials: int,
                         seed: int) -> tuple[SummaryStats, SummaryStats]:
    """Giant component of G(n_b, n_w, lam / sqrt(n_b n_w)), read off full Prim runs.

    Returns summaries of ``C_b / n`` (theory ``theta (1 - q1)``) and of
    ``size / n`` (theory ``ell``).
    """
    n = n_b + n_w
    theta = n_b / n
    p = lam / math.sqrt(n_b * n_w)
    if p > 1.0:
        raise InputError("lam / sqrt(n_b n_w) exceeds 1")
    counts = map_trials(_giant_counts, [(n_b, n_w, trial_seed(seed, t), p) for t in range(trials)])
    point = ell_rho(theta, lam)
    black = SummaryStats.from_values([c_b / n for _, c_b in counts], point.rho * point.ell,
                                     theta=theta, n=n, regime="giant_black", k_or_s=lam)
    size = SummaryStats.from_values([s / n for s, _ in counts], point.ell,
                                    theta=theta, n=n, regime="giant_size", k_or_s=lam)
    return black, size


# ---------------------------------------------------------------------------
# colour duality

def _to_swapped(spec: GraphSpec, gid):
    # global id in the colour-swapped graph
    gid = np.asarray(gid)
    return np.where(gid < spec.n_b, gid + spec.n_w, gid - spec.n_b)


def dual_mismatches(spec: GraphSpec, oracle: WeightOracle | None = None,
                    policy: StartPolicy | None = None, mutate=None,
                    p: float | None = None) -> list[str]:
    """Differences between a Prim run and its colour-swapped twin.

    The twin uses the transposed weights and the same start vertex.
    ``mutate=(edge, value)`` overwrites one weight in the twin only, which
    should normally produce a mismatch.
    """
    oracle = oracle or WeightOracle.implicit(spec)
    base = run_prim(spec, oracle, policy)
    start = spec.vertex(base.sigma[0])
    twin_oracle = oracle.transposed()
    if mutate is not None:
        (b, w), value = mutate
        twin_oracle = twin_oracle.with_weight(EdgeId(w, b), value)
    twin_spec = spec.swapped()
    twin_start = VertexId(Colour(1 - start.colour), start.index)
    twin = run_prim(twin_spec, twin_oracle, StartPolicy.fixed(twin_start))

    problems = []
    mapped = _to_swapped(spec, base.sigma)
    if not np.array_equal(mapped, twin.sigma):
        k = int(np.flatnonzero(mapped != twin.sigma)[0]) + 1
        problems.append(f"Prim sequences differ first at rank {k}")
    if not (np.array_equal(base.edge_black, twin.edge_white)
            and np.array_equal(base.edge_white, twin.edge_black)
            and np.array_equal(base.edge_weight, twin.edge_weight)):
        problems.append("Prim edges differ")
    twin_white_prefix = np.arange(twin_spec.n + 1) - twin.black_prefix
    if not np.array_equal(twin_white_prefix, base.black_prefix):
        problems.append("white counts of the twin differ from black counts")
    if not np.array_equal(twin.tau_w, base.tau_b):
        problems.append("white ranks of the twin differ from black ranks")
    if p is not None and not problems:
        if intervals_from_prim(base, p) != intervals_from_prim(twin, p):
            problems.append(f"component intervals differ at p={p}")
    return problems


def run_dual_check(spec: GraphSpec, seed: int | None = None, p: float | None = None,
                   oracle: WeightOracle | None = None, mutate=None) -> bool:
    """True when the colour-swapped run reproduces the original one."""
    if seed is not None:
        spec = GraphSpec(spec.n_b, spec.n_w, seed)
    return not dual_mismatches(spec, oracle, mutate=mutate, p=p)


# ---------------------------------------------------------------------------
# conditional binomial test for the first exploration step

@dataclass(frozen=True)
class Stratum:
    K: int
    count: int
    statistic: float | None
    pvalue: float | None
    note: str = ""


@dataclass(frozen=True)
class BinomialReport:
    p: float
    alpha: float
    strata: tuple[Stratum, ...]

    @property
    def passed(self) -> bool:
        tested = [s for s in self.strata if s.pvalue is not None]
        return all(s.pvalue >= self.alpha for s in tested)

    def __str__(self):
        lines = [f"p={self.p:.6g} alpha={self.alpha:g} {'PASS' if self.passed else 'FAIL'}"]
        for s in self.strata:
            pv = "-" if s.pvalue is None else f"{s.pvalue:.4g}"
            lines.append(f"  K_w1={s.K} count={s.count} p-value={pv} {s.note}".rstrip())
        return "\n".join(lines)


def pooled_bins(expected: np.ndarray, min_expected: float = 5.0) -> list[tuple[int, int]]:
    """Merge outcome bins from both tails until each expects ``min_expected``.

    Returns half-open index ranges covering the whole support.
    """
    m = len(expected)
    acc = 0.0
    edges = [0]
    for j in range(m):
        acc += expected[j]
        if acc >= min_expected:
            edges.append(j + 1)
            acc = 0.0
    if edges[-1] != m:
        # leftover right tail joins the last full bin
        if len(edges) > 1:
            edges[-1] = m
        else:
            edges.append(m)
    return list(zip(edges[:-1], edges[1:]))


def _first_step(n_b, n_w, seed, p):
    return first_step_discovery(GraphSpec(n_b, n_w, seed), None, p)


def run_conditional_binomial_check(theta: float, n: int, p: float | None, trials: int,
                                   seed: int, alpha: float = 1e-3,
                                   min_expected: float = 5.0) -> BinomialReport:
    """Chi-square test of ``O_w(1) | K_w(1)`` against Bin(K_w(1), p).

    ``p=None`` means the critical value ``1 / sqrt(n_b n_w)``.  Samples are
    stratified by the realised ``K_w(1)``; strata whose pooled bins fall
    below two are skipped with a note.
    """
    n_b, n_w = target_spec({"n": n, "theta": theta})
    if p is None:
        p = 1.0 / math.sqrt(n_b * n_w)
    if not 0.0 <= p <= 1.0:
        raise InputError(f"p must lie in [0, 1], got {p}")
    samples = map_trials(_first_step, [(n_b, n_w, trial_seed(seed, t), p) for t in range(trials)])
    by_k: dict[int, list[int]] = {}
    for K, O in samples:
        by_k.setdefault(K, []).append(O)
    strata = []
    for K in sorted(by_k):
        obs = np.bincount(by_k[K], minlength=K + 1)
        count = len(by_k[K])
        if p in (0.0, 1.0):
            ok = obs[0 if p == 0.0 else K] == count
            strata.append(Stratum(K, count, 0.0, 1.0 if ok else 0.0, "degenerate"))
            continue
        expected = count * stats.binom.pmf(np.arange(K + 1), K, p)
        bins = pooled_bins(expected, min_expected)
        if len(bins) < 2:
            strata.append(Stratum(K, count, None, None, "skipped: stratum too small"))
            continue
        o = np.array([obs[a:b].sum() for a, b in bins], dtype=float)
        e = np.array([expected[a:b].sum() for a, b in bins])
        e *= count / e.sum()
        res = stats.chisquare(o, e)
        strata.append(Stratum(K, count, float(res.statistic), float(res.pvalue)))
    return BinomialReport(float(p), alpha, tuple(strata))


# ---------------------------------------------------------------------------
# exact property sweep

@dataclass(frozen=True)
class Violation:
    n_b: int
    n_w: int
    seed: int
    p: float
    check: str
    detail: str = ""

    def __str__(self):
        return (f"{self.check} failed at n_b={self.n_b} n_w={self.n_w} seed={self.seed} "
                f"p={self.p}: {self.detail}").rstrip(": ")


@dataclass
class VerifyReport:
    cases: int = 0
    checks: dict = field(default_factory=dict)
    violations: list[Violation] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def summary(self) -> str:
        parts = ", ".join(f"{k}={v}" for k, v in sorted(self.checks.items()))
        head = f"{self.cases} cases ({parts})"
        if self.ok:
            return head + ": all pass"
        return head + f": {len(self.violations)} violations, first: {self.violations[0]}"


def verify_case(n_b: int, n_w: int, seed: int, p_values, corrupt: bool = False) -> list[Violation]:
    """All exact checks on one weighted graph, for every ``p`` in ``p_values``."""
    spec = GraphSpec(n_b, n_w, seed)
    oracle = WeightOracle.implicit(spec)
    trace = run_prim(spec, oracle)
    pi = trace.sigma.tolist()
    if corrupt:
        pi = pi[::-1]
    out = []
    for p in p_values:
        def fail(check, detail=""):
            out.append(Violation(n_b, n_w, seed, p, check, detail))

        graph = percolate(spec, oracle, p)
        comps = set(components_bruteforce(graph.edges, spec))
        if corrupt:
            cuts = [i for i in range(1, spec.n) if trace.edge_weight[i - 1] > p]
            intervals = [frozenset(pi[a:b]) for a, b in zip([0] + cuts, cuts + [spec.n])]
        else:
            intervals = intervals_from_prim(trace, p).vertex_sets(trace)
        if set(intervals) != comps:
            fail("intervals", "interval decomposition differs from union-find components")
        adj = graph.as_mapping()
        hat = explore_in_order(adj, pi)
        if hat != pi:
            k = next(i for i, (a, b) in enumerate(zip(hat, pi)) if a != b) + 1
            fail("rank_order", f"explored order departs from the input at rank {k}")
        if not is_geo(adj, pi):
            fail("geo", "ordering is not a graph exploration order")
        rank = np.zeros(spec.n, dtype=np.int64)
        rank[pi] = np.arange(1, spec.n + 1)
        blacks = explore_blacks(graph, rank)
        expected = [v for v in pi if v < n_b]
        if blacks.tolist() != expected:
            fail("black_order", "black exploration order differs from Prim order of blacks")
        if not corrupt:
            report = check_counting_identities(two_neighbourhood_exploration(graph, trace))
            if not report.ok:
                fail("identities", str(report))
    return out


def _verify_block(n_b, n_w, seeds, p_values, corrupt):
    return [verify_case(n_b, n_w, s, p_values, corrupt) for s in seeds]


def run_verify_sweep(config: ExperimentConfig, stop_at_first: bool = False) -> VerifyReport:
    """Exact checks on every ``(n_b, n_w)`` up to ``max_size``, ``sweep_seeds`` graphs each."""
    if config.regime != "verify":
        raise ConfigError("run_verify_sweep needs regime 'verify'")
    p_values = tuple(float(p) for p in config.p_values)
    seeds = [derive_seed(config.seed, 5, j) for j in range(config.sweep_seeds)]
    jobs = [(n_b, n_w, seeds, p_values, config.corrupt)
            for n_b in range(1, config.max_size + 1) for n_w in range(1, config.max_size + 1)]
    report = VerifyReport()
    names = ("intervals", "rank_order", "geo", "black_order", "identities")
    for name in names:
        report.checks[name] = 0
    for block in map_trials(_verify_block, jobs):
        for found in block:
            report.cases += len(p_values)
            for name in names:
                report.checks[name] += len(p_values)
            report.violations.extend(found)
        if stop_at_first and report.violations:
            break
    return report
