import random
import statistics

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dcop_coord.core import InteractionGraph, PathId, is_solution
from dcop_coord.enumeration import enumerate_solutions
from dcop_coord.generator import (
    DISTRACTOR_UTILITY,
    PREFERRED_UTILITY,
    DistinctSolutionExhaustion,
    GenerationParams,
    generate,
    generate_domains,
    generate_instance,
    generate_interaction_graph,
    plant_solution,
)


def union_find_connected(n, edges):
    parent = list(range(n))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for i, j in edges:
        parent[find(i)] = find(j)
    return len({find(x) for x in range(n)}) == 1


def test_two_agents_forced_edge():
    g = generate_interaction_graph(2, 0.0, random.Random(1))
    assert g.edges == {(0, 1)}


def test_p_one_gives_complete_graph():
    g = generate_interaction_graph(5, 1.0, random.Random(3))
    assert len(g.edges) == 10


@pytest.mark.parametrize("seed", range(10))
def test_graph_connected_with_bounded_edges(seed):
    g = generate_interaction_graph(10, 0.3, random.Random(seed))
    assert union_find_connected(10, g.edges)
    assert 9 <= len(g.edges) <= 45


def test_p_zero_gives_a_tree():
    for seed in range(20):
        g = generate_interaction_graph(12, 0.0, random.Random(seed))
        assert len(g.edges) == 11 and union_find_connected(12, g.edges)


def test_single_path_domains():
    assert generate_domains(6, 1, random.Random(0)) == [[1.0]] * 6


def test_domain_utilities_and_sizes():
    doms = generate_domains(100, 8, random.Random(0))
    sizes = [len(d) for d in doms]
    assert all(1 <= m <= 8 for m in sizes)
    assert 3.5 <= statistics.mean(sizes) <= 5.5
    for d in doms:
        assert d[0] == PREFERRED_UTILITY
        assert d[1:] == [DISTRACTOR_UTILITY] * (len(d) - 1)
    # both ends of the uniform law are reachable
    assert {1, 8} <= set(sizes)


def test_plant_adds_one_pair_per_interaction_edge():
    rng = random.Random(5)
    graph = generate_interaction_graph(8, 0.3, rng)
    domains = generate_domains(8, 4, rng)
    compat = set()
    plant_solution(graph, domains, compat, rng)
    assert len(compat) == len(graph.edges)
    before = set(compat)
    plant_solution(graph, domains, compat, rng)
    assert len(compat - before) <= len(graph.edges)


def test_plant_exhaustion():
    graph = InteractionGraph.from_pairs(2, [(0, 1)])
    compat = set()
    rng = random.Random(0)
    s = plant_solution(graph, [[1.0], [1.0]], compat, rng)
    with pytest.raises(DistinctSolutionExhaustion):
        plant_solution(graph, [[1.0], [1.0]], compat, rng, exclude={s})
    with pytest.raises(DistinctSolutionExhaustion):
        generate(GenerationParams(n=2, n_d=1, n_sol=2))


def test_recombination_creates_extra_solutions():
    # two plants on a tree recombine whenever they agree on a cut agent
    found = 0
    for seed in range(30):
        inst, planted = generate(GenerationParams(n=4, p_int=0.0, n_d=3, n_sol=2, seed=seed))
        if enumerate_solutions(inst).count > 2:
            found += 1
    assert found > 0


def test_reference_instance():
    params = GenerationParams(n=10, p_int=0.3, n_d=8, n_sol=3, seed=0)
    inst, planted = generate(params)
    sols = enumerate_solutions(inst)
    assert sols.count >= 3
    assert set(planted) <= sols.assignments()
    assert inst.meta == {"p_int": 0.3, "n_d": 8, "n_sol": 3, "seed": 0}


def test_regeneration_is_byte_identical():
    params = GenerationParams(n=20, n_sol=5, seed=11)
    assert generate_instance(params).to_json() == generate_instance(params).to_json()
    other = GenerationParams(n=20, n_sol=5, seed=12)
    assert generate_instance(params).to_json() != generate_instance(other).to_json()


@pytest.mark.parametrize(
    "kwargs",
    [dict(n=1), dict(n=3, p_int=1.5), dict(n=3, p_int=-0.1), dict(n=3, n_d=0), dict(n=3, n_sol=0)],
)
def test_params_validation(kwargs):
    with pytest.raises(ValueError):
        GenerationParams(**kwargs)


@settings(max_examples=50, deadline=None)
@given(
    n=st.integers(2, 25),
    p_int=st.floats(0, 1),
    n_d=st.integers(1, 8),
    n_sol=st.integers(1, 5),
    seed=st.integers(0, 2**63),
)
def test_generator_invariants(n, p_int, n_d, n_sol, seed):
    try:
        inst, planted = generate(GenerationParams(n, p_int, n_d, n_sol, seed))
    except DistinctSolutionExhaustion:
        return
    assert inst.interaction.is_connected()
    assert len(set(planted)) == n_sol
    assert all(is_solution(inst, s) for s in planted)
    for a, b in inst.compat_edges:
        assert a.owner != b.owner
        assert inst.interaction.has_edge(a.owner, b.owner)
    for i, dom in enumerate(inst.domains):
        assert sorted(dom, reverse=True) == list(dom) and dom[0] == 1.0
        for p in range(len(dom)):
            assert inst.compat_degree(PathId(i, p)) >= 1
