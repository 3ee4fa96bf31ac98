"""Resumable experiment campaigns: generate, enumerate, simulate, report.

Output layout under ``out_dir``::

    instances/inst_n{n}_s{n_sol}_seed{seed}.json
    solutions/sol_n{n}_s{n_sol}_seed{seed}.json    (or .unranked.json)
    runs/{strategy}/n{n}_s{n_sol}_seed{seed}.csv    one file per (instance, strategy)
    records.csv, report.csv, report.json, manifest.json

Every file is written once, atomically, and its presence marks the work as
done, so an interrupted campaign resumes where it stopped.
"""

from __future__ import annotations

import json
import logging
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Callable, Iterable

from .coordinate import (
    DEFAULT_MAX_ITERATIONS,
    derive_run_seed,
    policy_from_dict,
    run_coordination,
)
from .core import ProblemInstance
from .enumeration import DEFAULT_LIMIT, LimitExceeded, SolutionSet, enumerate_solutions
from .generator import DistinctSolutionExhaustion, GenerationParams, generate_instance
from .metrics import RunRecord, aggregate, read_records, write_records, write_report

log = logging.getLogger(__name__)

WORKERS_ENV = "DCOP_COORD_WORKERS"
DEFAULT_STRATEGIES = (
    {"strategy": "k1"},
    {"strategy": "kall"},
    {"strategy": "kada", "t_start": 1000, "window": 10_000},
    {"strategy": "dsa", "alpha": 0.9, "epsilon": 0.0},
)


def parse_seed_range(text: str) -> list[int]:
    """``"3"`` -> [3]; ``"0..4"`` -> [0, 1, 2, 3, 4] (inclusive)."""
    if ".." in text:
        lo, hi = (int(x) for x in text.split("..", 1))
        if hi < lo:
            raise ValueError(f"empty seed range {text!r}")
        return list(range(lo, hi + 1))
    return [int(text)]


def _label(strategy: dict) -> str:
    return strategy.get("label") or policy_from_dict(_policy_fields(strategy)).name


def _policy_fields(strategy: dict) -> dict:
    return {k: v for k, v in strategy.items() if k != "label"}


@dataclass
class CampaignSpec:
    n_values: list[int]
    n_sol_values: list[int]
    seeds: list[int]
    out_dir: str
    p_int: float = 0.3
    n_d: int = 8
    strategies: list[dict] = field(default_factory=lambda: [dict(s) for s in DEFAULT_STRATEGIES])
    runs: int = 100
    max_iterations: int = DEFAULT_MAX_ITERATIONS
    run_seed_base: int = 0
    enum_limit: int = DEFAULT_LIMIT

    def __post_init__(self) -> None:
        if not (self.n_values and self.n_sol_values and self.seeds and self.strategies):
            raise ValueError("campaign grids must be non-empty")
        if self.runs < 1:
            raise ValueError("runs must be at least 1")
        labels = [_label(s) for s in self.strategies]
        if len(set(labels)) != len(labels):
            raise ValueError(f"duplicate strategy labels {labels}; set 'label' to disambiguate")

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> CampaignSpec:
        data = dict(data)
        if isinstance(data.get("seeds"), str):
            data["seeds"] = parse_seed_range(data["seeds"])
        return cls(**data)

    @classmethod
    def paper(cls, out_dir: str) -> CampaignSpec:
        return cls([10, 20, 50, 100], [3, 5, 10], list(range(100)), out_dir)

    @classmethod
    def desk(cls, out_dir: str) -> CampaignSpec:
        return cls([10, 20], [3, 5], list(range(20)), out_dir, runs=20)

    def grid(self) -> list[GenerationParams]:
        return [
            GenerationParams(n, self.p_int, self.n_d, n_sol, seed)
            for n in self.n_values
            for n_sol in self.n_sol_values
            for seed in self.seeds
        ]


def _atomic_write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(text)
    os.replace(tmp, path)


def _stem(p: GenerationParams) -> str:
    return f"n{p.n}_s{p.n_sol}_seed{p.seed}"


def prepare_instance(out_dir: str, params: GenerationParams, limit: int) -> dict:
    """Generate and enumerate one instance unless already on disk."""
    root = Path(out_dir)
    entry: dict[str, Any] = {"n": params.n, "n_sol": params.n_sol, "seed": params.seed}
    inst_path = root / "instances" / params.filename
    if not inst_path.exists():
        try:
            instance = generate_instance(params)
        except DistinctSolutionExhaustion as exc:
            entry.update(status="error", error=f"DistinctSolutionExhaustion: {exc}")
            return entry
        _atomic_write(inst_path, instance.to_json())
    entry["instance"] = str(inst_path.relative_to(root))

    sol_path = root / "solutions" / f"sol_{_stem(params)}.json"
    unranked_path = root / "solutions" / f"sol_{_stem(params)}.unranked.json"
    if unranked_path.exists():
        entry.update(status="unranked", error=json.loads(unranked_path.read_text())["error"])
        return entry
    if not sol_path.exists():
        try:
            solset = enumerate_solutions(ProblemInstance.load(inst_path), limit)
        except LimitExceeded as exc:
            msg = f"LimitExceeded: {exc}"
            _atomic_write(unranked_path, json.dumps({"error": msg}) + "\n")
            entry.update(status="unranked", error=msg)
            return entry
        _atomic_write(sol_path, json.dumps(solset.to_dict(), separators=(",", ":")) + "\n")
        entry["count"] = solset.count
    else:
        entry["count"] = json.loads(sol_path.read_text())["count"]
    entry.update(status="ok", solutions=str(sol_path.relative_to(root)))
    return entry


def run_unit(
    out_dir: str,
    entry: dict,
    strategy: dict,
    runs: int,
    max_iterations: int,
    run_seed_base: int,
) -> str:
    """Execute every run of one (instance, strategy) pair and write its CSV."""
    root = Path(out_dir)
    label = _label(strategy)
    path = root / "runs" / label / f"n{entry['n']}_s{entry['n_sol']}_seed{entry['seed']}.csv"
    if path.exists():
        return str(path.relative_to(root))
    instance = ProblemInstance.load(root / entry["instance"])
    solset = SolutionSet.load(root / entry["solutions"]) if entry.get("solutions") else None
    policy = policy_from_dict(_policy_fields(strategy))
    records = []
    for r in range(runs):
        seed = derive_run_seed(entry["seed"], r, run_seed_base)
        res = run_coordination(instance, policy, seed, max_iterations, solset)
        records.append(RunRecord(
            label, entry["n"], entry["n_sol"], entry["seed"], r, seed,
            res.converged, res.iterations, res.eta, res.rank, res.regret_pct,
        ))
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_name(path.name + ".tmp")
    write_records(tmp, records)
    os.replace(tmp, path)
    return str(path.relative_to(root))


def resolve_workers(requested: int | None = None) -> int:
    env = os.environ.get(WORKERS_ENV)
    if env:
        return max(1, int(env))
    return max(1, requested or 1)


def _map(fn: Callable, argsets: Iterable[tuple], workers: int) -> list:
    argsets = list(argsets)
    if workers <= 1:
        return [fn(*a) for a in argsets]
    with ProcessPoolExecutor(workers) as pool:
        return list(pool.map(fn, *zip(*argsets))) if argsets else []


def run_campaign(spec: CampaignSpec, workers: int | None = None) -> dict:
    """Run the whole grid and return the manifest (also written to disk)."""
    workers = resolve_workers(workers)
    root = Path(spec.out_dir)
    root.mkdir(parents=True, exist_ok=True)

    grid = spec.grid()
    log.info("preparing %d instances with %d workers", len(grid), workers)
    entries = _map(
        prepare_instance, [(spec.out_dir, p, spec.enum_limit) for p in grid], workers
    )

    usable = [e for e in entries if e["status"] != "error"]
    units = [
        (spec.out_dir, e, s, spec.runs, spec.max_iterations, spec.run_seed_base)
        for e in usable
        for s in spec.strategies
    ]
    log.info("running %d (instance, strategy) units", len(units))
    unit_files = _map(run_unit, units, workers)

    records: list[RunRecord] = []
    for f in unit_files:
        records.extend(read_records(root / f))
    write_records(root / "records.csv", records)
    reports = aggregate(records) if records else []
    write_report(root / "report", reports)

    manifest = {
        "spec": asdict(spec),
        "instances": entries,
        "runs": [
            {"strategy": _label(u[2]), "n": u[1]["n"], "n_sol": u[1]["n_sol"],
             "seed": u[1]["seed"], "file": f}
            for u, f in zip(units, unit_files)
        ],
        "records": "records.csv",
        "report": ["report.csv", "report.json"],
    }
    _atomic_write(root / "manifest.json", json.dumps(manifest, indent=1) + "\n")
    return manifest
