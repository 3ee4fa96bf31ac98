import itertools
import random

import pytest
from hypothesis import strategies as st

from dcop_coord.core import PathId, make_instance
from dcop_coord.generator import DistinctSolutionExhaustion, GenerationParams, generate


def naive_objective(instance, s):
    """Objective recomputed straight from the edge sets, no bitmask index."""
    compat = {frozenset(e) for e in instance.compat_edges}
    total = 0.0
    for i in range(instance.n):
        total += instance.domains[i][s[i]]
    for i in range(instance.n):
        for j in range(i + 1, instance.n):
            if (i, j) in instance.interaction.edges:
                if frozenset((PathId(i, s[i]), PathId(j, s[j]))) in compat:
                    total += 1.0
    return total


def naive_is_solution(instance, s):
    compat = {frozenset(e) for e in instance.compat_edges}
    return all(
        frozenset((PathId(i, s[i]), PathId(j, s[j]))) in compat
        for i, j in instance.interaction.edges
    )


def brute_force_solutions(instance):
    """Filter the full Cartesian product of domains."""
    sizes = [len(d) for d in instance.domains]
    return {
        s: round(naive_objective(instance, s), 9)
        for s in itertools.product(*map(range, sizes))
        if naive_is_solution(instance, s)
    }


def random_instance(rng, n, max_paths, density):
    """Unstructured instance: random tree plus extras, random compat edges."""
    edges = {(min(i, j), max(i, j)) for i, j in ((i, rng.randrange(i)) for i in range(1, n))}
    for i in range(n):
        for j in range(i + 1, n):
            if rng.random() < 0.3:
                edges.add((i, j))
    domains = [
        [round(rng.choice([0.1, 0.25, 0.5, 1.0]), 2) for _ in range(rng.randint(1, max_paths))]
        for _ in range(n)
    ]
    compat = [
        ((i, p), (j, q))
        for i, j in sorted(edges)
        for p in range(len(domains[i]))
        for q in range(len(domains[j]))
        if rng.random() < density
    ]
    return make_instance(n, edges, domains, compat)


@st.composite
def tiny_instances(draw):
    """Generated or unstructured instances small enough to brute force."""
    if draw(st.booleans()):
        params = GenerationParams(
            n=draw(st.integers(2, 6)),
            p_int=draw(st.sampled_from([0.0, 0.3, 0.7, 1.0])),
            n_d=draw(st.integers(1, 4)),
            n_sol=draw(st.integers(1, 3)),
            seed=draw(st.integers(0, 2**32)),
        )
        try:
            return generate(params)[0]
        except DistinctSolutionExhaustion:
            return generate(GenerationParams(params.n, params.p_int, params.n_d, 1, params.seed))[0]
    rng = random.Random(draw(st.integers(0, 2**32)))
    return random_instance(rng, draw(st.integers(2, 6)), 4, draw(st.sampled_from([0.3, 0.6, 0.9])))


@pytest.fixture
def pair_instance():
    """Two agents, one edge, 2x2 paths; only (0,0)-(1,0) compatible."""
    return make_instance(
        2, [(0, 1)], [[1.0, 0.1], [1.0, 0.1]], [((0, 0), (1, 0))]
    )


@pytest.fixture(scope="session")
def small_generated():
    inst, planted = generate(GenerationParams(n=10, p_int=0.3, n_d=8, n_sol=3, seed=0))
    return inst, planted


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.write_sep("=", "acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
