"""Decentralised coordination dynamics.

One run is an asynchronous simulation: agents start on their best path, then
at every iteration a single uniformly chosen agent revises its value using
only its neighbours' current values. Two policies are provided: the
k-neighbour compatibility-first policy (fixed, all or adaptive k) and the
classical DSA baseline.
"""

from __future__ import annotations

import hashlib
import random
from dataclasses import dataclass
from typing import Union

from .core import Assignment, ProblemInstance, objective, round_eta, violated_edges
from .enumeration import SolutionSet, rank_of, regret

DEFAULT_MAX_ITERATIONS = 100_000


@dataclass(frozen=True)
class KFixed:
    k: int = 1

    def __post_init__(self) -> None:
        if self.k < 1:
            raise ValueError("k must be a positive integer")

    @property
    def name(self) -> str:
        return f"k{self.k}"


@dataclass(frozen=True)
class KAll:
    name = "kall"


@dataclass(frozen=True)
class KAdaptive:
    t_start: int = 1000
    window: int = 10_000

    def __post_init__(self) -> None:
        if self.t_start < 0 or self.window < 1:
            raise ValueError("t_start must be >= 0 and window >= 1")

    name = "kada"


@dataclass(frozen=True)
class Dsa:
    alpha: float = 0.9
    epsilon: float = 0.0

    def __post_init__(self) -> None:
        if not 0.0 <= self.alpha <= 1.0:
            raise ValueError("alpha must lie in [0, 1]")
        if not 0.0 <= self.epsilon <= 1.0:
            raise ValueError("epsilon must lie in [0, 1]")

    name = "dsa"


PolicyConfig = Union[KFixed, KAll, KAdaptive, Dsa]


def make_policy(
    strategy: str,
    k: int = 1,
    alpha: float = 0.9,
    epsilon: float = 0.0,
    t_start: int = 1000,
    window: int = 10_000,
) -> PolicyConfig:
    """Policy from its CLI name: ``k1``, ``kN``, ``kall``, ``kada`` or ``dsa``."""
    if strategy == "kall":
        return KAll()
    if strategy == "kada":
        return KAdaptive(t_start, window)
    if strategy == "dsa":
        return Dsa(alpha, epsilon)
    if strategy == "k":
        return KFixed(k)
    if strategy.startswith("k") and strategy[1:].isdigit():
        return KFixed(int(strategy[1:]))
    raise ValueError(f"unknown strategy {strategy!r}")


def policy_to_dict(policy: PolicyConfig) -> dict:
    d = {"strategy": policy.name}
    if isinstance(policy, KFixed):
        d["k"] = policy.k
    elif isinstance(policy, KAdaptive):
        d.update(t_start=policy.t_start, window=policy.window)
    elif isinstance(policy, Dsa):
        d.update(alpha=policy.alpha, epsilon=policy.epsilon)
    return d


def policy_from_dict(d: dict) -> PolicyConfig:
    d = dict(d)
    return make_policy(d.pop("strategy"), **d)


class SimState:
    """Mutable state of one run: current values, iteration, violated-edge count."""

    __slots__ = ("instance", "values", "t", "violated_edges")

    def __init__(self, instance: ProblemInstance, values: Assignment, t: int = 0):
        self.instance = instance
        self.values = list(values)
        self.t = t
        self.violated_edges = violated_edges(instance, values)

    def assignment(self) -> Assignment:
        return tuple(self.values)

    def assign(self, agent: int, value: int) -> None:
        values = self.values
        old = values[agent]
        if old == value:
            return
        rows = self.instance.compat_mask[agent]
        old_row, new_row = rows[old], rows[value]
        delta = 0
        for j in self.instance.interaction.neighbors[agent]:
            vj = values[j]
            delta += ((old_row[j] >> vj) & 1) - ((new_row[j] >> vj) & 1)
        values[agent] = value
        self.violated_edges += delta


@dataclass(frozen=True)
class RunResult:
    converged: bool
    iterations: int
    final_assignment: Assignment
    eta: float
    run_seed: int
    rank: int | None = None
    regret_pct: float | None = None


def derive_run_seed(instance_seed: int, run_index: int, base: int = 0) -> int:
    """64-bit run seed, independent of the generation stream."""
    key = f"dcop-run:{base}:{instance_seed}:{run_index}".encode()
    return int.from_bytes(hashlib.blake2b(key, digest_size=8).digest(), "big")


def greedy_init(instance: ProblemInstance, rng: random.Random) -> Assignment:
    """Each agent takes a maximum-utility path; ties broken uniformly."""
    values = []
    for dom in instance.domains:
        best = max(dom)
        top = [p for p, u in enumerate(dom) if u == best]
        values.append(top[0] if len(top) == 1 else rng.choice(top))
    return tuple(values)


def compute_k(policy: PolicyConfig, t: int, degree: int) -> int:
    """Neighbour sample size at global iteration ``t`` for an agent of ``degree``."""
    if isinstance(policy, KFixed):
        return min(policy.k, degree)
    if isinstance(policy, KAll):
        return degree
    if isinstance(policy, KAdaptive):
        elapsed = t - policy.t_start
        if elapsed <= 0:
            return degree
        if elapsed >= policy.window:
            return 1
        # ceil(degree * (window - elapsed) / window) without float rounding
        return max(1, -(-degree * (policy.window - elapsed) // policy.window))
    raise TypeError(f"compute_k does not apply to {policy!r}")


def _lane_counts(instance: ProblemInstance, agent: int, packed: int) -> list[int]:
    lane = instance.lane_bits
    mask = (1 << lane) - 1
    return [(packed >> (lane * p)) & mask for p in range(len(instance.domains[agent]))]


def agent_step(
    instance: ProblemInstance,
    state: SimState,
    agent: int,
    policy: PolicyConfig,
    rng: random.Random,
) -> int:
    """Compatibility-first update of one agent against ``k`` sampled neighbours.

    The agent keeps its value if it agrees with every sampled neighbour;
    otherwise it moves to a value with the highest agreement count, drawn
    with probability proportional to path utility among ties.
    """
    neighbors = instance.interaction.neighbors[agent]
    cols = instance.packed_cols[agent]
    values = state.values
    degree = len(neighbors)
    k = compute_k(policy, state.t, degree)
    if k >= degree:
        packed = sum([cols[x][values[j]] for x, j in enumerate(neighbors)])
    else:
        # sampling positions consumes the same draws as sampling neighbours
        packed = sum([cols[x][values[neighbors[x]]] for x in rng.sample(range(degree), k)])
        degree = k

    current = values[agent]
    lane = instance.lane_bits
    if (packed >> (lane * current)) & ((1 << lane) - 1) == degree:
        return current

    scores = _lane_counts(instance, agent, packed)
    best = max(scores)
    top = [d for d, s in enumerate(scores) if s == best]
    if len(top) == 1:
        new = top[0]
    else:
        utilities = instance.domains[agent]
        new = rng.choices(top, weights=[utilities[d] for d in top])[0]
    state.assign(agent, new)
    return new


def dsa_step(
    instance: ProblemInstance,
    state: SimState,
    agent: int,
    policy: Dsa,
    rng: random.Random,
) -> int:
    """DSA update: activate with probability alpha, then epsilon-greedy on
    path utility plus the number of neighbours agreed with."""
    values = state.values
    current = values[agent]
    if rng.random() >= policy.alpha:
        return current
    utilities = instance.domains[agent]
    if policy.epsilon > 0.0 and rng.random() < policy.epsilon:
        new = rng.randrange(len(utilities))
    else:
        cols = instance.packed_cols[agent]
        neighbors = instance.interaction.neighbors[agent]
        packed = sum([cols[x][values[j]] for x, j in enumerate(neighbors)])
        # utilities lie in (0, 1] so the float sum orders exactly like (count, utility)
        scores = [c + u for c, u in zip(_lane_counts(instance, agent, packed), utilities)]
        best = max(scores)
        if scores[current] == best:
            return current
        top = [d for d, s in enumerate(scores) if s == best]
        new = top[0] if len(top) == 1 else rng.choice(top)
    state.assign(agent, new)
    return new


def run_coordination(
    instance: ProblemInstance,
    policy: PolicyConfig,
    run_seed: int,
    max_iterations: int = DEFAULT_MAX_ITERATIONS,
    solutions: SolutionSet | None = None,
    trace: list[tuple[int, int, int]] | None = None,
    rank_method: str = "dense",
) -> RunResult:
    """Simulate until every interaction edge is satisfied or the bound is hit.

    Convergence is checked after initialisation and after every update.
    If ``trace`` is given, ``(t, agent, value)`` is appended for each update.
    """
    rng = random.Random(run_seed)
    state = SimState(instance, greedy_init(instance, rng))
    step = dsa_step if isinstance(policy, Dsa) else agent_step
    n = instance.n
    randrange = rng.randrange

    while state.violated_edges and state.t < max_iterations:
        state.t += 1
        agent = randrange(n)
        value = step(instance, state, agent, policy, rng)
        if trace is not None:
            trace.append((state.t, agent, value))

    final = state.assignment()
    converged = state.violated_edges == 0
    eta = round_eta(objective(instance, final))
    rank = regret_pct = None
    if converged and solutions is not None:
        rank = rank_of(solutions, eta, rank_method)
        regret_pct = regret(solutions, eta)
    return RunResult(converged, state.t, final, eta, run_seed, rank, regret_pct)
