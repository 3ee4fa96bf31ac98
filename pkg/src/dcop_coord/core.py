"""Problem instances, assignments and the objective.

An instance is a pair of graphs: the interaction graph over agents and the
constraint graph over paths. Paths are addressed as ``(agent, local_index)``;
a complete assignment is a tuple holding one local index per agent.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterable, NamedTuple

ETA_DECIMALS = 9

Assignment = tuple[int, ...]


class InvalidInstance(ValueError):
    """Raised when an instance violates a structural invariant."""


class PathId(NamedTuple):
    owner: int
    local_index: int


def round_eta(value: float) -> float:
    """Canonical form of an objective value used for equality and ranking."""
    return round(value, ETA_DECIMALS)


def _edge(i: int, j: int) -> tuple[int, int]:
    return (i, j) if i < j else (j, i)


def _compat_key(a: PathId, b: PathId) -> tuple[PathId, PathId]:
    return (a, b) if a < b else (b, a)


@dataclass(frozen=True)
class InteractionGraph:
    n: int
    edges: frozenset[tuple[int, int]]
    neighbors: tuple[tuple[int, ...], ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        adj: list[set[int]] = [set() for _ in range(self.n)]
        for i, j in self.edges:
            if i == j:
                raise InvalidInstance(f"self-loop on agent {i}")
            if not (0 <= i < self.n and 0 <= j < self.n):
                raise InvalidInstance(f"edge ({i}, {j}) out of range for n={self.n}")
            if i > j:
                raise InvalidInstance(f"edge ({i}, {j}) not normalised")
            adj[i].add(j)
            adj[j].add(i)
        object.__setattr__(self, "neighbors", tuple(tuple(sorted(a)) for a in adj))

    @classmethod
    def from_pairs(cls, n: int, pairs: Iterable[tuple[int, int]]) -> InteractionGraph:
        return cls(n, frozenset(_edge(i, j) for i, j in pairs))

    def has_edge(self, i: int, j: int) -> bool:
        return _edge(i, j) in self.edges

    def degree(self, i: int) -> int:
        return len(self.neighbors[i])

    def is_connected(self) -> bool:
        seen = {0}
        stack = [0]
        while stack:
            for j in self.neighbors[stack.pop()]:
                if j not in seen:
                    seen.add(j)
                    stack.append(j)
        return len(seen) == self.n

    def sorted_edges(self) -> list[tuple[int, int]]:
        return sorted(self.edges)


@dataclass(frozen=True)
class ProblemInstance:
    """Immutable problem instance.

    ``domains[i][p]`` is the utility of path ``p`` of agent ``i``.
    ``compat_edges`` holds unordered pairs of compatible paths, each stored
    with the smaller :class:`PathId` first. ``compat_mask[i][p][j]`` is a
    bitmask over the paths of neighbour ``j`` that are compatible with
    ``(i, p)``.

    ``packed_cols[i][x][q]`` serves the simulation hot path: for the ``x``-th
    neighbour ``j`` of agent ``i`` holding path ``q``, it packs one
    ``lane_bits``-wide lane per path of ``i`` holding 1 where that path is
    compatible with ``(j, q)``. Summing these integers over a set of
    neighbours yields every path's agreement count at once.
    """

    interaction: InteractionGraph
    domains: tuple[tuple[float, ...], ...]
    compat_edges: frozenset[tuple[PathId, PathId]]
    meta: dict[str, Any] | None = field(default=None, compare=False)
    compat_mask: tuple[tuple[dict[int, int], ...], ...] = field(
        init=False, repr=False, compare=False
    )
    packed_cols: tuple[tuple[tuple[int, ...], ...], ...] = field(
        init=False, repr=False, compare=False
    )
    lane_bits: int = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        n = self.interaction.n
        if n < 2:
            raise InvalidInstance("an instance needs at least two agents")
        if len(self.domains) != n:
            raise InvalidInstance(f"{len(self.domains)} domains for {n} agents")
        for i, dom in enumerate(self.domains):
            if not dom:
                raise InvalidInstance(f"agent {i} has an empty domain")
            for u in dom:
                if not 0.0 < u <= 1.0:
                    raise InvalidInstance(f"utility {u} of agent {i} outside (0, 1]")
        masks: list[list[dict[int, int]]] = [
            [dict.fromkeys(self.interaction.neighbors[i], 0) for _ in dom]
            for i, dom in enumerate(self.domains)
        ]
        for a, b in self.compat_edges:
            if a.owner == b.owner:
                raise InvalidInstance(f"compat edge {a}-{b} joins paths of one agent")
            if not self.interaction.has_edge(a.owner, b.owner):
                raise InvalidInstance(f"compat edge {a}-{b} joins non-neighbour agents")
            for x in (a, b):
                if not 0 <= x.local_index < len(self.domains[x.owner]):
                    raise InvalidInstance(f"path {x} outside its agent's domain")
            masks[a.owner][a.local_index][b.owner] |= 1 << b.local_index
            masks[b.owner][b.local_index][a.owner] |= 1 << a.local_index
        object.__setattr__(
            self, "compat_mask", tuple(tuple(per_path) for per_path in masks)
        )
        lane = max(8, max(map(len, self.interaction.neighbors)).bit_length())
        packed = []
        for i, dom in enumerate(self.domains):
            per_nbr = []
            for j in self.interaction.neighbors[i]:
                per_nbr.append(tuple(
                    sum(1 << (lane * p) for p in range(len(dom)) if (masks[i][p][j] >> q) & 1)
                    for q in range(len(self.domains[j]))
                ))
            packed.append(tuple(per_nbr))
        object.__setattr__(self, "packed_cols", tuple(packed))
        object.__setattr__(self, "lane_bits", lane)

    @property
    def n(self) -> int:
        return self.interaction.n

    def domain_sizes(self) -> list[int]:
        return [len(d) for d in self.domains]

    def utility(self, path: PathId) -> float:
        return self.domains[path.owner][path.local_index]

    def compat_degree(self, path: PathId) -> int:
        return sum(m.bit_count() for m in self.compat_mask[path.owner][path.local_index].values())

    def check_path_degrees(self) -> None:
        """Raise :class:`InvalidInstance` if some path has no compatible partner."""
        for i, dom in enumerate(self.domains):
            for p in range(len(dom)):
                if self.compat_degree(PathId(i, p)) == 0:
                    raise InvalidInstance(f"path ({i}, {p}) has no compatible partner")

    # serialisation

    def to_dict(self) -> dict[str, Any]:
        out: dict[str, Any] = {
            "n": self.n,
            "interaction_edges": [list(e) for e in self.interaction.sorted_edges()],
            "domains": [[{"utility": u} for u in dom] for dom in self.domains],
            "compat_edges": [
                [list(a), list(b)] for a, b in sorted(self.compat_edges)
            ],
        }
        if self.meta is not None:
            out["meta"] = {k: self.meta[k] for k in ("p_int", "n_d", "n_sol", "seed")}
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), separators=(",", ":")) + "\n"

    @classmethod
    def from_dict(cls, data: dict[str, Any], check_degrees: bool = True) -> ProblemInstance:
        graph = InteractionGraph.from_pairs(
            data["n"], (tuple(e) for e in data["interaction_edges"])
        )
        domains = tuple(tuple(float(p["utility"]) for p in dom) for dom in data["domains"])
        compat = frozenset(
            _compat_key(PathId(*a), PathId(*b)) for a, b in data["compat_edges"]
        )
        inst = cls(graph, domains, compat, data.get("meta"))
        if check_degrees:
            inst.check_path_degrees()
        return inst

    def save(self, path: str | Path) -> None:
        Path(path).write_text(self.to_json())

    @classmethod
    def load(cls, path: str | Path) -> ProblemInstance:
        return cls.from_dict(json.loads(Path(path).read_text()))


def make_instance(
    n: int,
    edges: Iterable[tuple[int, int]],
    domains: Iterable[Iterable[float]],
    compat: Iterable[tuple[tuple[int, int], tuple[int, int]]],
    meta: dict[str, Any] | None = None,
) -> ProblemInstance:
    """Build an instance from plain tuples; handy for hand-written cases."""
    return ProblemInstance(
        InteractionGraph.from_pairs(n, edges),
        tuple(tuple(float(u) for u in d) for d in domains),
        frozenset(_compat_key(PathId(*a), PathId(*b)) for a, b in compat),
        meta,
    )


def compatible(instance: ProblemInstance, a: PathId, b: PathId) -> bool:
    """True iff paths ``a`` and ``b`` of two distinct agents are compatible."""
    if a.owner == b.owner:
        raise ValueError(f"paths {a} and {b} belong to the same agent")
    mask = instance.compat_mask[a.owner][a.local_index].get(b.owner, 0)
    return bool((mask >> b.local_index) & 1)


def violated_edges(instance: ProblemInstance, s: Assignment) -> int:
    """Number of interaction edges whose endpoints hold incompatible paths."""
    masks = instance.compat_mask
    return sum(
        not (masks[i][s[i]][j] >> s[j]) & 1 for i, j in instance.interaction.edges
    )


def is_solution(instance: ProblemInstance, s: Assignment) -> bool:
    return violated_edges(instance, s) == 0


def objective(instance: ProblemInstance, s: Assignment) -> float:
    """Sum of chosen path utilities plus the number of satisfied interaction edges."""
    unary = sum(instance.domains[i][p] for i, p in enumerate(s))
    binary = len(instance.interaction.edges) - violated_edges(instance, s)
    return unary + binary
