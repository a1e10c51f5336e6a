"""Command-line entry point: ``bipartite-prim <subcommand> ...``.

Exit status is 0 on success, 1 when a check or tolerance fails and 2 on a
bad configuration.
"""
from __future__ import annotations

import argparse
import json
import sys

from .graph_model import GraphSpec, InputError
from .harness import (
    ConfigError,
    ExperimentConfig,
    dual_mismatches,
    run_experiment,
    run_verify_sweep,
    target_spec,
    write_results,
)
from .limits import default_grid, extinction_probabilities, linear_limit_curve, simulate_two_type_bp
from .streams import derive_seed

EXIT_OK, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2


def _add_target(p):
    p.add_argument("--theta", type=float, help="black fraction (with --n)")
    p.add_argument("--n", type=int, help="total vertex count (with --theta)")
    p.add_argument("--nb", type=int, help="black vertex count (with --nw)")
    p.add_argument("--nw", type=int, help="white vertex count (with --nb)")


def _target(args):
    if args.nb is not None or args.nw is not None:
        return target_spec({"nb": args.nb, "nw": args.nw})
    if args.n is not None and args.theta is not None:
        return target_spec({"n": args.n, "theta": args.theta})
    return None


def _emit(text: str, out):
    if out:
        with open(out, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="bipartite-prim",
                                     description="Prim / invasion percolation on random "
                                                 "complete bipartite graphs")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="colour-ratio Monte Carlo experiment")
    p.add_argument("regime", nargs="?", choices=("sublinear", "linear"))
    _add_target(p)
    p.add_argument("--kappa", help="kappa rule: sqrt, pow(a), log(c) or an integer")
    p.add_argument("--s", type=float, nargs="+", help="linear-regime fractions in (0, 1)")
    p.add_argument("--trials", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--policy", choices=("uniform", "black", "white"))
    p.add_argument("--format", choices=("csv", "json"))
    p.add_argument("--out")
    p.add_argument("--tol", type=float, help="fail (exit 1) when any abs_err exceeds this")
    p.add_argument("--config", help="JSON file with ExperimentConfig fields")

    p = sub.add_parser("curve", help="limit curve s -> rho(ell^{-1}(s)) as CSV")
    p.add_argument("--theta", type=float, required=True)
    p.add_argument("--points", type=int, default=512)
    p.add_argument("--out")

    p = sub.add_parser("verify", help="exact property sweep over small graphs")
    p.add_argument("--max-size", type=int)
    p.add_argument("--seeds", type=int, help="graphs per (n_b, n_w)")
    p.add_argument("--p", type=float, nargs="+")
    p.add_argument("--seed", type=int)
    p.add_argument("--corrupt", action="store_true", help="inject a corrupted ordering")
    p.add_argument("--config")

    p = sub.add_parser("bp", help="two-type branching process extinction")
    p.add_argument("--theta", type=float, required=True)
    p.add_argument("--lam", type=float, required=True)
    p.add_argument("--trials", type=int, default=100_000)
    p.add_argument("--generations", type=int, default=200)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--tol", type=float, help="fail when |empirical - q1| exceeds this")

    p = sub.add_parser("dual", help="colour-swap duality check")
    _add_target(p)
    p.add_argument("--trials", type=int, default=200, help="number of seeds")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--p", type=float, help="also compare component intervals at p")
    return parser


def _simulate(args) -> int:
    data = {}
    if args.config:
        data = vars(ExperimentConfig.from_json(args.config)).copy()
    target = _target(args)
    overrides = {"regime": args.regime, "kappa": args.kappa, "s_list": args.s,
                 "trials": args.trials, "seed": args.seed, "policy": args.policy,
                 "format": args.format, "output": args.out,
                 "targets": [target] if target else None}
    data.update({k: v for k, v in overrides.items() if v is not None})
    data.setdefault("regime", "sublinear")
    config = ExperimentConfig(**data)
    results = run_experiment(config)
    _emit(write_results(results, fmt=config.format), config.output)
    if args.tol is not None and any(r.abs_err > args.tol for r in results):
        print(f"abs_err above tolerance {args.tol}", file=sys.stderr)
        return EXIT_FAIL
    return EXIT_OK


def _curve(args) -> int:
    if args.points < 1:
        raise ConfigError("--points must be >= 1")
    _emit(linear_limit_curve(args.theta, default_grid(args.points)).to_csv(), args.out)
    return EXIT_OK


def _verify(args) -> int:
    data = {"regime": "verify"}
    if args.config:
        data = vars(ExperimentConfig.from_json(args.config)).copy()
        data["regime"] = "verify"
    overrides = {"max_size": args.max_size, "sweep_seeds": args.seeds, "p_values": args.p,
                 "seed": args.seed}
    data.update({k: v for k, v in overrides.items() if v is not None})
    if args.corrupt:
        data["corrupt"] = True
    config = ExperimentConfig(**data)
    report = run_verify_sweep(config, stop_at_first=config.corrupt)
    print(report.summary())
    for v in report.violations[:20]:
        print(v)
    return EXIT_OK if report.ok else EXIT_FAIL


def _bp(args) -> int:
    q = extinction_probabilities(args.theta, args.lam)
    est = simulate_two_type_bp(args.theta, args.lam, args.generations, args.trials, args.seed)
    print(json.dumps({"theta": args.theta, "lambda": args.lam, "trials": args.trials,
                      "extinction": est, "q1": q.q1, "q2": q.q2, "abs_err": abs(est - q.q1)}))
    if args.tol is not None and abs(est - q.q1) > args.tol:
        return EXIT_FAIL
    return EXIT_OK


def _dual(args) -> int:
    target = _target(args)
    if target is None:
        raise ConfigError("dual needs --nb/--nw or --n/--theta")
    if args.trials < 1:
        raise ConfigError("--trials must be >= 1")
    failures = 0
    for t in range(args.trials):
        spec = GraphSpec(*target, derive_seed(args.seed, 6, t))
        problems = dual_mismatches(spec, p=args.p)
        if problems:
            failures += 1
            print(f"seed {spec.seed}: {'; '.join(problems)}")
    print(f"{args.trials - failures}/{args.trials} seeds pass")
    return EXIT_FAIL if failures else EXIT_OK


COMMANDS = {"simulate": _simulate, "curve": _curve, "verify": _verify, "bp": _bp, "dual": _dual}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except (ConfigError, InputError, TypeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
