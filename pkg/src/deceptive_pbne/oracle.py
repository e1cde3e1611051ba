"""Deliberately naive reference implementations for small instances.

Used as ground truth in tests: exhaustive simple-path enumeration, brute-force
best responses, and a step-by-step Bayes filter over a mixed Attacker strategy.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import EnumerationOverflow
from .evaluate import path_cost
from .graphcore import Trajectory
from .numeric import Number, div
from .scenario import BeliefVector, Scenario


@dataclass(frozen=True)
class EnumerationBudget:
    max_vertices: int = 12
    max_paths: int = 200_000


def enumerate_simple_paths(scenario: Scenario, budget: EnumerationBudget = EnumerationBudget()) -> list[Trajectory]:
    """All simple paths from the start that stop at the first goal they reach."""
    g = scenario.graph
    if g.n > budget.max_vertices:
        raise EnumerationOverflow(f"{g.n} vertices exceeds the budget of {budget.max_vertices}")
    goals = set(scenario.goals)
    out: list[Trajectory] = []
    path = [scenario.start]
    on_path = {scenario.start}

    def dfs(u: int) -> None:
        for v, _ in g.successors(u):
            if v in on_path:
                continue
            path.append(v)
            if v in goals:
                if len(out) >= budget.max_paths:
                    raise EnumerationOverflow(f"more than {budget.max_paths} paths")
                out.append(Trajectory.from_nodes(g, path))
            else:
                on_path.add(v)
                dfs(v)
                on_path.discard(v)
            path.pop()

    dfs(scenario.start)
    return out


def brute_best_response(
    scenario: Scenario, defender, theta: int, budget: EnumerationBudget = EnumerationBudget()
) -> tuple[Trajectory, Number]:
    best = None
    for traj in enumerate_simple_paths(scenario, budget):
        cost = path_cost(defender, scenario, traj, theta)
        key = (cost, traj.nodes)
        if best is None or key < best[0]:
            best = (key, traj)
    if best is None:
        raise EnumerationOverflow("no path from the start reaches a goal")
    return best[1], best[0][0]


def sequential_bayes(strategy, prior: BeliefVector, nodes) -> list[BeliefVector | None]:
    """Filter beliefs one step at a time with the behavioral form of ``strategy``.

    The probability of the next step given the history is the mass of supported
    paths extending the longer prefix divided by the mass extending the shorter.
    Entry ``t`` is ``None`` once the history has zero probability for both types.
    """
    nodes = tuple(nodes)
    beliefs: list[BeliefVector | None] = [prior]
    b = [prior.b1, prior.b2]
    for t in range(1, len(nodes)):
        likes = []
        for theta in (1, 2):
            before = sum((p for tr, p in strategy.support(theta) if tr.nodes[:t] == nodes[:t]), 0)
            after = sum((p for tr, p in strategy.support(theta) if tr.nodes[: t + 1] == nodes[: t + 1]), 0)
            likes.append(div(after, before) if before else 0)
        z = b[0] * likes[0] + b[1] * likes[1]
        if not z:
            beliefs.extend([None] * (len(nodes) - t))
            return beliefs
        b = [div(b[0] * likes[0], z), div(b[1] * likes[1], z)]
        beliefs.append(BeliefVector(b[0], b[1]))
    return beliefs
