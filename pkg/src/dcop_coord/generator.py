"""Planted-solution instance generator.

All randomness comes from one ``random.Random`` (Mersenne Twister) seeded
with ``GenerationParams.seed``. Draw order is fixed: interaction graph,
domains, planted solutions in order, then the degree-0 fix-up in
(agent, local index) order. Changing that order changes every dataset.
"""

from __future__ import annotations

import random
from dataclasses import asdict, dataclass

from .core import Assignment, InteractionGraph, PathId, ProblemInstance, _compat_key

PREFERRED_UTILITY = 1.0
DISTRACTOR_UTILITY = 0.1
MAX_PLANT_ATTEMPTS = 1000


class DistinctSolutionExhaustion(RuntimeError):
    """Could not draw a fresh, distinct planted assignment."""


@dataclass(frozen=True)
class GenerationParams:
    n: int
    p_int: float = 0.3
    n_d: int = 8
    n_sol: int = 3
    seed: int = 0

    def __post_init__(self) -> None:
        if self.n < 2:
            raise ValueError("n must be at least 2")
        if not 0.0 <= self.p_int <= 1.0:
            raise ValueError("p_int must lie in [0, 1]")
        if self.n_d < 1:
            raise ValueError("n_d must be at least 1")
        if self.n_sol < 1:
            raise ValueError("n_sol must be at least 1")

    @property
    def filename(self) -> str:
        return f"inst_n{self.n}_s{self.n_sol}_seed{self.seed}.json"

    def meta(self) -> dict:
        d = asdict(self)
        del d["n"]
        return d


def generate_interaction_graph(n: int, p_int: float, rng: random.Random) -> InteractionGraph:
    """Random spanning tree plus independent extra edges with probability ``p_int``.

    The tree is grown over a shuffled labelling: the ``i``-th node of the
    permutation attaches to a uniformly chosen earlier node.
    """
    if n < 2:
        raise ValueError("n must be at least 2")
    order = list(range(n))
    rng.shuffle(order)
    edges: set[tuple[int, int]] = set()
    for i in range(1, n):
        a, b = order[i], order[rng.randrange(i)]
        edges.add((min(a, b), max(a, b)))
    for i in range(n):
        for j in range(i + 1, n):
            if (i, j) not in edges and rng.random() < p_int:
                edges.add((i, j))
    return InteractionGraph(n, frozenset(edges))


def generate_domains(n: int, n_d: int, rng: random.Random) -> list[list[float]]:
    """Between 1 and ``n_d`` paths per agent; local index 0 is the preferred one."""
    if n_d < 1:
        raise ValueError("n_d must be at least 1")
    return [
        [PREFERRED_UTILITY] + [DISTRACTOR_UTILITY] * (rng.randint(1, n_d) - 1)
        for _ in range(n)
    ]


def plant_solution(
    graph: InteractionGraph,
    domains: list[list[float]],
    compat: set[tuple[PathId, PathId]],
    rng: random.Random,
    exclude: set[Assignment] | frozenset[Assignment] = frozenset(),
) -> Assignment:
    """Draw one path per agent uniformly and make every induced pair compatible.

    Draws are retried until the assignment is not in ``exclude``.
    """
    for _ in range(MAX_PLANT_ATTEMPTS):
        s = tuple(rng.randrange(len(d)) for d in domains)
        if s not in exclude:
            break
    else:
        raise DistinctSolutionExhaustion(
            f"no new assignment after {MAX_PLANT_ATTEMPTS} draws "
            f"({len(exclude)} already planted)"
        )
    for i, j in sorted(graph.edges):
        compat.add(_compat_key(PathId(i, s[i]), PathId(j, s[j])))
    return s


def _fix_isolated_paths(
    graph: InteractionGraph,
    domains: list[list[float]],
    compat: set[tuple[PathId, PathId]],
    rng: random.Random,
) -> None:
    touched = {p for edge in compat for p in edge}
    for i, dom in enumerate(domains):
        for p in range(len(dom)):
            path = PathId(i, p)
            if path in touched:
                continue
            j = rng.choice(graph.neighbors[i])
            partner = PathId(j, rng.randrange(len(domains[j])))
            compat.add(_compat_key(path, partner))
            touched.update((path, partner))


def generate(params: GenerationParams) -> tuple[ProblemInstance, list[Assignment]]:
    """Build an instance and return it with its planted solutions."""
    rng = random.Random(params.seed)
    graph = generate_interaction_graph(params.n, params.p_int, rng)
    domains = generate_domains(params.n, params.n_d, rng)
    compat: set[tuple[PathId, PathId]] = set()
    planted: list[Assignment] = []
    for _ in range(params.n_sol):
        planted.append(plant_solution(graph, domains, compat, rng, exclude=set(planted)))
    _fix_isolated_paths(graph, domains, compat, rng)
    instance = ProblemInstance(
        graph,
        tuple(tuple(d) for d in domains),
        frozenset(compat),
        params.meta(),
    )
    return instance, planted


def generate_instance(params: GenerationParams) -> ProblemInstance:
    return generate(params)[0]
