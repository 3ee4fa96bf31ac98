"""Command-line entry point: ``dcop-coord {gen,solve,run,report,bench}``."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from .bench import CampaignSpec, parse_seed_range, run_campaign
from .coordinate import (
    DEFAULT_MAX_ITERATIONS,
    KFixed,
    derive_run_seed,
    make_policy,
    run_coordination,
)
from .core import ProblemInstance
from .enumeration import DEFAULT_LIMIT, SolutionSet, enumerate_solutions
from .generator import GenerationParams, generate_instance
from .metrics import RunRecord, aggregate, read_records, write_records, write_report


def _cmd_gen(args: argparse.Namespace) -> int:
    seeds = parse_seed_range(args.seeds) if args.seeds else [args.seed]
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    for seed in seeds:
        params = GenerationParams(args.n, args.p_int, args.n_d, args.n_sol, seed)
        generate_instance(params).save(out / params.filename)
        print(out / params.filename)
    return 0


def _cmd_solve(args: argparse.Namespace) -> int:
    instance = ProblemInstance.load(args.instance)
    solset = enumerate_solutions(instance, args.limit)
    solset.save(args.out)
    print(f"{solset.count} solutions, optimal value {solset.optimal_value}")
    return 0


def _cmd_run(args: argparse.Namespace) -> int:
    instance = ProblemInstance.load(args.instance)
    if args.strategy == "k1":
        policy = KFixed(args.k)
    else:
        policy = make_policy(
            args.strategy, alpha=args.alpha, epsilon=args.epsilon,
            t_start=args.t_start, window=args.window,
        )
    solset = SolutionSet.load(args.solutions) if args.solutions else None
    meta = instance.meta or {}
    inst_seed = meta.get("seed", 0)
    records = []
    for r in range(args.runs):
        seed = derive_run_seed(inst_seed, r, args.run_seed_base)
        res = run_coordination(
            instance, policy, seed, args.max_iters, solset,
            rank_method="ordinal" if args.ordinal else "dense",
        )
        records.append(RunRecord(
            policy.name, instance.n, meta.get("n_sol", 0), inst_seed, r, seed,
            res.converged, res.iterations, res.eta, res.rank, res.regret_pct,
        ))
    write_records(args.out or sys.stdout, records)
    return 0


def _cmd_report(args: argparse.Namespace) -> int:
    reports = aggregate(read_records(args.inp), top3_mode=args.top3)
    for path in write_report(args.out_prefix, reports):
        print(path)
    return 0


def _cmd_bench(args: argparse.Namespace) -> int:
    if args.spec:
        data = json.loads(Path(args.spec).read_text())
        if args.out_dir:
            data["out_dir"] = args.out_dir
        spec = CampaignSpec.from_dict(data)
    elif args.preset:
        out_dir = args.out_dir or f"campaign_{args.preset}"
        spec = CampaignSpec.paper(out_dir) if args.preset == "paper" else CampaignSpec.desk(out_dir)
    else:
        if not (args.n and args.n_sol and args.seeds and args.out_dir):
            print("bench: give --spec, --preset, or --n/--n-sol/--seeds/--out-dir", file=sys.stderr)
            return 2
        strategies = [{"strategy": s} for s in (args.strategies or ["k1", "kall", "kada", "dsa"])]
        for s in strategies:
            if s["strategy"] == "dsa":
                s.update(alpha=args.alpha, epsilon=args.epsilon)
        spec = CampaignSpec(
            n_values=args.n, n_sol_values=args.n_sol, seeds=parse_seed_range(args.seeds),
            out_dir=args.out_dir, p_int=args.p_int, n_d=args.n_d, strategies=strategies,
            runs=args.runs, max_iterations=args.max_iters, run_seed_base=args.run_seed_base,
        )
    manifest = run_campaign(spec, workers=args.workers)
    print(Path(spec.out_dir) / "manifest.json", f"({len(manifest['runs'])} units)")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dcop-coord", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="generate planted-solution instances")
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--p-int", type=float, default=0.3)
    g.add_argument("--n-d", type=int, default=8)
    g.add_argument("--n-sol", type=int, required=True)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--seeds", help="inclusive range a..b; overrides --seed")
    g.add_argument("--out-dir", default=".")
    g.set_defaults(func=_cmd_gen)

    s = sub.add_parser("solve", help="enumerate and rank every solution of an instance")
    s.add_argument("--instance", required=True)
    s.add_argument("--out", required=True)
    s.add_argument("--limit", type=int, default=DEFAULT_LIMIT)
    s.set_defaults(func=_cmd_solve)

    r = sub.add_parser("run", help="simulate decentralised coordination on one instance")
    r.add_argument("--instance", required=True)
    r.add_argument("--strategy", choices=["k1", "kall", "kada", "dsa"], required=True)
    r.add_argument("--k", type=int, default=1, help="neighbour sample size for k1")
    r.add_argument("--alpha", type=float, default=0.9)
    r.add_argument("--epsilon", type=float, default=0.0)
    r.add_argument("--t-start", type=int, default=1000)
    r.add_argument("--window", type=int, default=10_000)
    r.add_argument("--runs", type=int, default=1)
    r.add_argument("--max-iters", type=int, default=DEFAULT_MAX_ITERATIONS)
    r.add_argument("--run-seed-base", type=int, default=0)
    r.add_argument("--solutions", help="output of `solve`, enables rank and regret")
    r.add_argument("--ordinal", action="store_true", help="ordinal instead of dense ranks")
    r.add_argument("--out", help="records CSV (stdout if omitted)")
    r.set_defaults(func=_cmd_run)

    p = sub.add_parser("report", help="aggregate a records CSV")
    p.add_argument("--in", dest="inp", required=True)
    p.add_argument("--out-prefix", required=True)
    p.add_argument("--top3", choices=["pooled", "per_instance"], default="pooled")
    p.set_defaults(func=_cmd_report)

    b = sub.add_parser("bench", help="run a full campaign")
    b.add_argument("--spec", help="CampaignSpec JSON")
    b.add_argument("--preset", choices=["desk", "paper"])
    b.add_argument("--n", type=int, nargs="+")
    b.add_argument("--n-sol", type=int, nargs="+")
    b.add_argument("--seeds")
    b.add_argument("--p-int", type=float, default=0.3)
    b.add_argument("--n-d", type=int, default=8)
    b.add_argument("--strategies", nargs="+", choices=["k1", "kall", "kada", "dsa"])
    b.add_argument("--alpha", type=float, default=0.9)
    b.add_argument("--epsilon", type=float, default=0.0)
    b.add_argument("--runs", type=int, default=100)
    b.add_argument("--max-iters", type=int, default=DEFAULT_MAX_ITERATIONS)
    b.add_argument("--run-seed-base", type=int, default=0)
    b.add_argument("--out-dir")
    b.add_argument("--workers", type=int)
    b.set_defaults(func=_cmd_bench)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
