"""Run records and their aggregation into rank, regret and timing summaries."""

from __future__ import annotations

import csv
import json
import math
from bisect import bisect_right
from collections import defaultdict
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Iterable, Sequence, TextIO

RECORD_COLUMNS = (
    "strategy", "n", "n_sol", "instance_seed", "run_index", "run_seed",
    "converged", "iterations", "eta", "rank", "regret_pct",
)
RANK_BUCKETS = tuple(str(r) for r in range(1, 10)) + (">=10", "Fail")
MAX_DECADE = 5
BINS_PER_DECADE = 10
# [0, 1) holds runs that converged at initialisation
TIME_BIN_EDGES = (0.0,) + tuple(
    10 ** (k / BINS_PER_DECADE) for k in range(MAX_DECADE * BINS_PER_DECADE + 1)
)

GroupKey = tuple[str, int, int]


class EmptyGroup(ValueError):
    """A requested aggregation group has no records."""


@dataclass(frozen=True)
class RunRecord:
    strategy: str
    n: int
    n_sol: int
    instance_seed: int
    run_index: int
    run_seed: int
    converged: bool
    iterations: int
    eta: float
    rank: int | None = None
    regret_pct: float | None = None

    def __post_init__(self) -> None:
        if not self.converged and (self.rank is not None or self.regret_pct is not None):
            raise ValueError("a failed run cannot carry a rank or regret")

    @property
    def group(self) -> GroupKey:
        return (self.strategy, self.n, self.n_sol)

    @property
    def sort_key(self) -> tuple:
        return (self.strategy, self.n, self.n_sol, self.instance_seed, self.run_index)

    def to_row(self) -> list[str]:
        return [
            self.strategy, str(self.n), str(self.n_sol), str(self.instance_seed),
            str(self.run_index), str(self.run_seed),
            "true" if self.converged else "false", str(self.iterations),
            repr(self.eta),
            "" if self.rank is None else str(self.rank),
            "" if self.regret_pct is None else repr(self.regret_pct),
        ]

    @classmethod
    def from_row(cls, row: dict[str, str]) -> RunRecord:
        return cls(
            strategy=row["strategy"],
            n=int(row["n"]),
            n_sol=int(row["n_sol"]),
            instance_seed=int(row["instance_seed"]),
            run_index=int(row["run_index"]),
            run_seed=int(row["run_seed"]),
            converged=row["converged"] == "true",
            iterations=int(row["iterations"]),
            eta=float(row["eta"]),
            rank=int(row["rank"]) if row["rank"] else None,
            regret_pct=float(row["regret_pct"]) if row["regret_pct"] else None,
        )


def write_records(dest: str | Path | TextIO, records: Iterable[RunRecord], sort: bool = True) -> None:
    """Write records as CSV, canonically sorted unless ``sort`` is false."""
    rows = sorted(records, key=lambda r: r.sort_key) if sort else list(records)
    if hasattr(dest, "write"):
        _write_rows(dest, rows)
        return
    with open(dest, "w", newline="") as fh:
        _write_rows(fh, rows)


def _write_rows(fh: TextIO, rows: list[RunRecord]) -> None:
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(RECORD_COLUMNS)
    w.writerows(r.to_row() for r in rows)


def read_records(path: str | Path) -> list[RunRecord]:
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if tuple(reader.fieldnames or ()) != RECORD_COLUMNS:
            raise ValueError(f"{path}: unexpected header {reader.fieldnames}")
        return [RunRecord.from_row(row) for row in reader]


def nearest_rank(sorted_values: Sequence[float], q: float) -> float:
    """Nearest-rank quantile of an ascending, non-empty sequence."""
    if not sorted_values:
        raise ValueError("quantile of an empty sequence")
    idx = max(1, math.ceil(q * len(sorted_values))) - 1
    return sorted_values[idx]


def rank_bucket(record: RunRecord) -> str | None:
    if not record.converged:
        return "Fail"
    if record.rank is None:
        return None
    return str(record.rank) if record.rank < 10 else ">=10"


def time_histogram(iterations: Iterable[int]) -> list[int]:
    counts = [0] * (len(TIME_BIN_EDGES) - 1)
    for it in iterations:
        idx = min(bisect_right(TIME_BIN_EDGES, it) - 1, len(counts) - 1)
        counts[idx] += 1
    return counts


@dataclass
class AggregateReport:
    strategy: str
    n: int
    n_sol: int
    runs: int
    converged: int
    unranked: int
    rank_hist: dict[str, float]
    top3_rate: float
    regret_count: int
    regret_quantiles: dict[str, float] | None
    median_iterations: float | None
    time_hist: list[int] = field(repr=False)

    @property
    def failures(self) -> int:
        return self.runs - self.converged

    def to_row(self) -> dict:
        row = {
            "strategy": self.strategy, "n": self.n, "n_sol": self.n_sol,
            "runs": self.runs, "converged": self.converged,
            "failures": self.failures, "unranked": self.unranked,
            "top3_rate": self.top3_rate,
        }
        row.update({f"rank_{b}": self.rank_hist[b] for b in RANK_BUCKETS})
        q = self.regret_quantiles or {}
        row["regret_count"] = self.regret_count
        for name in ("q1", "median", "q3", "max"):
            row[f"regret_{name}"] = q.get(name, "")
        row["median_iterations"] = "" if self.median_iterations is None else self.median_iterations
        return row


def _aggregate_group(key: GroupKey, records: list[RunRecord], top3_mode: str) -> AggregateReport:
    records = sorted(records, key=lambda r: r.sort_key)
    converged = [r for r in records if r.converged]

    buckets = [b for b in map(rank_bucket, records) if b is not None]
    rank_hist = dict.fromkeys(RANK_BUCKETS, 0.0)
    for b in buckets:
        rank_hist[b] += 1
    for b in rank_hist:
        rank_hist[b] = rank_hist[b] / len(buckets) if buckets else 0.0

    def top3(rs: list[RunRecord]) -> float:
        ranked = [r for r in rs if rank_bucket(r) is not None]
        if not ranked:
            return 0.0
        return sum(1 for r in ranked if r.rank is not None and r.rank <= 3) / len(ranked)

    if top3_mode == "pooled":
        top3_rate = top3(records)
    elif top3_mode == "per_instance":
        per_inst: dict[int, list[RunRecord]] = defaultdict(list)
        for r in records:
            per_inst[r.instance_seed].append(r)
        top3_rate = sum(top3(v) for v in per_inst.values()) / len(per_inst)
    else:
        raise ValueError(f"unknown top3 mode {top3_mode!r}")

    regrets = sorted(
        r.regret_pct for r in converged if r.rank in (2, 3) and r.regret_pct is not None
    )
    quantiles = None
    if regrets:
        quantiles = {
            "q1": nearest_rank(regrets, 0.25),
            "median": nearest_rank(regrets, 0.5),
            "q3": nearest_rank(regrets, 0.75),
            "max": regrets[-1],
        }
    its = sorted(r.iterations for r in converged)
    return AggregateReport(
        strategy=key[0], n=key[1], n_sol=key[2],
        runs=len(records),
        converged=len(converged),
        unranked=len(records) - len(buckets),
        rank_hist=rank_hist,
        top3_rate=top3_rate,
        regret_count=len(regrets),
        regret_quantiles=quantiles,
        median_iterations=nearest_rank(its, 0.5) if its else None,
        time_hist=time_histogram(its),
    )


def aggregate(
    records: Iterable[RunRecord],
    groups: Iterable[GroupKey] | None = None,
    top3_mode: str = "pooled",
) -> list[AggregateReport]:
    """Summaries per (strategy, n, n_sol), sorted by key.

    Rank fractions and the top-3 rate are taken over runs that either failed
    or converged on a ranked instance. Regret quantiles use converged runs of
    rank 2 or 3; timing statistics use converged runs.
    """
    by_key: dict[GroupKey, list[RunRecord]] = defaultdict(list)
    for r in records:
        by_key[r.group].append(r)
    keys = sorted(by_key) if groups is None else list(groups)
    out = []
    for key in keys:
        if not by_key.get(key):
            raise EmptyGroup(f"no records for group {key}")
        out.append(_aggregate_group(key, by_key[key], top3_mode))
    return out


def write_report(prefix: str | Path, reports: list[AggregateReport]) -> tuple[Path, Path]:
    """Write ``<prefix>.csv`` and ``<prefix>.json``."""
    prefix = Path(prefix)
    csv_path = prefix.with_name(prefix.name + ".csv")
    json_path = prefix.with_name(prefix.name + ".json")
    rows = [r.to_row() for r in reports]
    with open(csv_path, "w", newline="") as fh:
        if rows:
            w = csv.DictWriter(fh, fieldnames=list(rows[0]), lineterminator="\n")
            w.writeheader()
            w.writerows(rows)
    payload = {
        "time_bin_edges": list(TIME_BIN_EDGES),
        "groups": [asdict(r) for r in reports],
    }
    json_path.write_text(json.dumps(payload, indent=1) + "\n")
    return csv_path, json_path
