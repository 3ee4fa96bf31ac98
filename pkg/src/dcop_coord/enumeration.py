"""Exact enumeration of every feasible complete assignment, and ranking."""

from __future__ import annotations

import json
from bisect import bisect_left
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Iterator

from .core import Assignment, ProblemInstance, objective, round_eta

DEFAULT_LIMIT = 10**6


class LimitExceeded(RuntimeError):
    """The instance has more solutions than the enumeration cap."""


class NotASolutionValue(ValueError):
    """An objective value that no enumerated solution attains."""


@dataclass(frozen=True)
class SolutionSet:
    solutions: tuple[tuple[Assignment, float], ...]
    distinct_values: tuple[float, ...]

    @classmethod
    def from_solutions(cls, solutions: list[tuple[Assignment, float]]) -> SolutionSet:
        ordered = sorted(solutions, key=lambda s: (-s[1], s[0]))
        distinct = sorted({eta for _, eta in ordered}, reverse=True)
        return cls(tuple(ordered), tuple(distinct))

    @property
    def count(self) -> int:
        return len(self.solutions)

    @property
    def optimal_value(self) -> float:
        if not self.distinct_values:
            raise NotASolutionValue("instance has no solution")
        return self.distinct_values[0]

    def assignments(self) -> set[Assignment]:
        return {s for s, _ in self.solutions}

    def to_dict(self) -> dict[str, Any]:
        return {
            "count": self.count,
            "optimal_value": self.optimal_value if self.solutions else None,
            "distinct_values": list(self.distinct_values),
            "solutions": [{"values": list(s), "eta": eta} for s, eta in self.solutions],
        }

    def save(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), separators=(",", ":")) + "\n")

    @classmethod
    def load(cls, path: str | Path) -> SolutionSet:
        data = json.loads(Path(path).read_text())
        return cls.from_solutions(
            [(tuple(s["values"]), float(s["eta"])) for s in data["solutions"]]
        )


def iter_solutions(instance: ProblemInstance) -> Iterator[Assignment]:
    """Depth-first backtracking with forward checking.

    Agents are assigned in index order and paths in local-index order. After
    each choice, the live candidates of every later neighbour are intersected
    with the compatible set of the chosen path; an empty set prunes the branch.
    """
    n = instance.n
    masks = instance.compat_mask
    neighbors = instance.interaction.neighbors
    later = [tuple(j for j in neighbors[i] if j > i) for i in range(n)]
    live = [(1 << len(d)) - 1 for d in instance.domains]
    values = [0] * n

    def extend(i: int) -> Iterator[Assignment]:
        if i == n:
            yield tuple(values)
            return
        cand = live[i]
        p = 0
        while cand:
            if cand & 1:
                row = masks[i][p]
                saved = []
                ok = True
                for j in later[i]:
                    saved.append(live[j])
                    live[j] &= row[j]
                    if not live[j]:
                        ok = False
                        break
                if ok:
                    values[i] = p
                    yield from extend(i + 1)
                for j, old in zip(later[i], saved):
                    live[j] = old
            cand >>= 1
            p += 1

    return extend(0)


def enumerate_solutions(
    instance: ProblemInstance, limit: int | None = DEFAULT_LIMIT
) -> SolutionSet:
    found: list[tuple[Assignment, float]] = []
    for s in iter_solutions(instance):
        if limit is not None and len(found) >= limit:
            raise LimitExceeded(f"more than {limit} solutions")
        found.append((s, round_eta(objective(instance, s))))
    return SolutionSet.from_solutions(found)


def rank_of(solset: SolutionSet, eta: float, method: str = "dense") -> int:
    """Position of ``eta`` in the ranking of solution values (1 is optimal).

    ``dense`` counts distinct values; ``ordinal`` counts solutions strictly
    better than ``eta``, plus one.
    """
    eta = round_eta(eta)
    # distinct_values is descending; search on negated values
    neg = [-v for v in solset.distinct_values]
    idx = bisect_left(neg, -eta)
    if idx == len(neg) or neg[idx] != -eta:
        raise NotASolutionValue(f"{eta} is not the value of any solution")
    if method == "dense":
        return idx + 1
    if method == "ordinal":
        return 1 + sum(1 for _, v in solset.solutions if v > eta)
    raise ValueError(f"unknown ranking method {method!r}")


def regret(solset: SolutionSet, eta: float) -> float:
    """Percentage shortfall of ``eta`` from the optimal value."""
    rank_of(solset, eta)
    best = solset.optimal_value
    return 100.0 * (best - round_eta(eta)) / best
