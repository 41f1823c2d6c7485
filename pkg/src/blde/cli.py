"""Command line entry point: bench, compare, ucp solve, mkp check."""
from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path
from typing import List, Optional

from . import experiment as ex
from .mkp import BRUTEFORCE_MAX_N, MkpParseError, load_mkp, mkp_bruteforce
from .optimizer import ALGORITHMS
from .ucp import check_constraints, hybrid_solve, load_instance


def _bench_config(args: argparse.Namespace) -> ex.ExperimentConfig:
    data = {}
    if args.config:
        path = Path(args.config)
        if not path.is_file():
            raise FileNotFoundError(f"config file not found: {path}")
        try:
            data = json.loads(path.read_text())
        except json.JSONDecodeError as exc:
            raise ex.ConfigError(f"{path}: {exc}") from None
        if not isinstance(data, dict):
            raise ex.ConfigError(f"{path}: top level must be an object")
    if args.problems:
        data["problems"] = [{"name": p} for p in args.problems]
    if args.instance:
        data.setdefault("problems", []).append({"name": "P8", "instance": args.instance})
    for key, val in (("runs", args.runs), ("base_seed", args.seed), ("mu", args.mu),
                     ("p", args.p), ("budget_multiplier", args.budget_multiplier),
                     ("algorithm", args.algorithm), ("workers", args.workers)):
        if val is not None:
            data[key] = val
    return ex.config_from_dict(data)


def cmd_bench(args: argparse.Namespace) -> int:
    cfg = _bench_config(args)
    out = ex.resolve_output_dir(cfg, args.out)
    artifacts = ex.run_experiment(cfg, str(out))
    with artifacts["summary"].open() as fh:
        sys.stdout.write(fh.read())
    print(f"wrote {len(artifacts)} file(s) to {out}", file=sys.stderr)
    return 0


def cmd_compare(args: argparse.Namespace) -> int:
    for p in (args.a, args.b):
        if not Path(p).is_file():
            raise FileNotFoundError(f"results file not found: {p}")
    rows = ex.compare_runs(args.a, args.b, alpha=args.alpha)
    for r in rows:
        print(f"{r['problem']}\t{r['symbol']}\tp={r['p_value']:.4g}")
    print(ex.verdict_table(rows))
    if args.out or os.environ.get(ex.OUTPUT_ENV):
        out = Path(args.out or os.environ[ex.OUTPUT_ENV])
        out.mkdir(parents=True, exist_ok=True)
        ex.write_verdicts(rows, out / "verdicts.csv")
    return 0


def cmd_ucp_solve(args: argparse.Namespace) -> int:
    if args.instance and not Path(args.instance).is_file():
        raise FileNotFoundError(f"instance file not found: {args.instance}")
    inst = load_instance(args.instance).with_epsilon(args.epsilon / 100.0)
    res = hybrid_solve(inst, pop_size=args.pop, iterations=args.iters, F=args.F,
                       CR=args.CR, seed=args.seed)
    report = check_constraints(res.schedule, inst)
    summary = {
        "instance": inst.name,
        "epsilon_pct": args.epsilon,
        "seed": args.seed,
        "cost": res.cost,
        "violations": report.count,
        "wall_time": res.wall_time,
        "commitment": res.schedule.u.astype(int).tolist(),
        "dispatch": res.schedule.P.tolist(),
    }
    if args.out:
        Path(args.out).write_text(json.dumps(summary, indent=2))
    print(f"cost={res.cost:.2f} violations={report.count} time={res.wall_time:.1f}s")
    return 0 if report.ok else 1


def cmd_mkp_check(args: argparse.Namespace) -> int:
    inst = load_mkp(args.instance)
    print(f"{inst.name}: n={inst.n} m={inst.m} known_opt={inst.known_opt} "
          f"penalty_factor={inst.penalty_factor:.6g}")
    if inst.n <= BRUTEFORCE_MAX_N:
        bits, best = mkp_bruteforce(inst)
        print(f"bruteforce optimum={best:g} bits={''.join(map(str, bits))}")
        if inst.known_opt is not None and best != inst.known_opt:
            print(f"warning: file optimum {inst.known_opt:g} differs", file=sys.stderr)
            return 1
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="blde", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    b = sub.add_parser("bench", help="run seeded batches and write CSV tables")
    b.add_argument("--config", help="JSON experiment config")
    b.add_argument("--problems", nargs="+", help="problem ids, e.g. P1 P4")
    b.add_argument("--instance", help="MKP instance file, run as P8")
    b.add_argument("--runs", type=int)
    b.add_argument("--seed", type=int, help="base seed; run k uses seed + k")
    b.add_argument("--mu", type=int)
    b.add_argument("--p", type=float)
    b.add_argument("--budget-multiplier", type=int)
    b.add_argument("--algorithm", choices=sorted(ALGORITHMS))
    b.add_argument("--workers", type=int)
    b.add_argument("--out", help=f"output directory (overrides ${ex.OUTPUT_ENV})")
    b.set_defaults(func=cmd_bench)

    c = sub.add_parser("compare", help="rank-sum verdicts between two runs.csv files")
    c.add_argument("a")
    c.add_argument("b")
    c.add_argument("--alpha", type=float, default=0.05)
    c.add_argument("--out", help="directory for verdicts.csv")
    c.set_defaults(func=cmd_compare)

    u = sub.add_parser("ucp", help="unit commitment tools")
    usub = u.add_subparsers(dest="ucp_command", required=True)
    s = usub.add_parser("solve", help="hybrid BLDE/DE unit commitment")
    s.add_argument("--instance", help="JSON instance (default: embedded 10-unit system)")
    s.add_argument("--epsilon", type=float, default=0.0, help="loss percentage")
    s.add_argument("--pop", type=int, default=100)
    s.add_argument("--iters", type=int, default=2500)
    s.add_argument("--F", type=float, default=0.8)
    s.add_argument("--CR", type=float, default=0.5)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out", help="write the schedule as JSON")
    s.set_defaults(func=cmd_ucp_solve)

    m = sub.add_parser("mkp", help="knapsack instance tools")
    msub = m.add_subparsers(dest="mkp_command", required=True)
    k = msub.add_parser("check", help="parse an instance and report its size")
    k.add_argument("instance")
    k.set_defaults(func=cmd_mkp_check)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (FileNotFoundError, ex.ConfigError, MkpParseError, ValueError, TypeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
