"""Scenario bundle: graph, two candidate goals, start vertex and prior.

Goals are stored in canonical order: index 1 is the *primary* goal, i.e. the
one with the larger prior. Loading a scenario always canonicalizes, so the rest
of the package may assume ``prior.b1 >= prior.b2``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Mapping, Sequence

from .errors import InputError, ScenarioError
from .graphcore import WeightedGraph, reachable_from, shortest_distances
from .numeric import EPS, Number, is_exact, simplify, to_json_number, to_number


@dataclass(frozen=True)
class BeliefVector:
    """Distribution over the two goals; also used for Defender allocations."""

    b1: Number
    b2: Number

    def __post_init__(self):
        for b in (self.b1, self.b2):
            if b < 0 or b > 1:
                raise InputError(f"probability {b} outside [0, 1]")
        total = self.b1 + self.b2
        if (is_exact(total) and total != 1) or abs(total - 1) > EPS:
            raise InputError(f"belief {self.b1}, {self.b2} does not sum to 1")

    @classmethod
    def primary(cls, p1: Number) -> "BeliefVector":
        return cls(simplify(p1), simplify(1 - p1))

    def __getitem__(self, i: int) -> Number:
        if i == 1:
            return self.b1
        if i == 2:
            return self.b2
        raise IndexError("goal index must be 1 or 2")

    def __iter__(self):
        return iter((self.b1, self.b2))

    def as_floats(self) -> tuple[float, float]:
        return float(self.b1), float(self.b2)


@dataclass(frozen=True)
class Scenario:
    graph: WeightedGraph
    goal_primary: int
    goal_secondary: int
    start: int
    prior: BeliefVector
    swapped: bool = field(default=False, compare=False)

    def goal(self, theta: int) -> int:
        if theta == 1:
            return self.goal_primary
        if theta == 2:
            return self.goal_secondary
        raise InputError(f"type must be 1 or 2, got {theta!r}")

    @property
    def goals(self) -> tuple[int, int]:
        return self.goal_primary, self.goal_secondary

    @cached_property
    def dist1(self) -> dict[int, Number]:
        return shortest_distances(self.graph, self.goal_primary)

    @cached_property
    def dist2(self) -> dict[int, Number]:
        return shortest_distances(self.graph, self.goal_secondary)

    def dist(self, theta: int) -> dict[int, Number]:
        return self.dist1 if theta == 1 else self.dist2

    def d(self, v: int, theta: int) -> Number:
        try:
            return self.dist(theta)[v]
        except KeyError:
            raise InputError(f"vertex {v} cannot reach goal {theta}") from None


def _parse_prior(prior: Sequence) -> tuple[Fraction, Fraction]:
    if len(prior) != 2:
        raise InputError("prior must have exactly two entries")
    try:
        p, q = (Fraction(to_number(x)) for x in prior)
    except (TypeError, ValueError) as exc:
        raise InputError(f"malformed prior: {exc}") from None
    if p <= 0 or q <= 0 or p >= 1 or q >= 1:
        raise InputError(f"degenerate prior {[float(p), float(q)]}: entries must lie strictly in (0, 1)")
    if abs(p + q - 1) > EPS:
        raise InputError(f"prior {[float(p), float(q)]} does not sum to 1")
    total = p + q
    return p / total, q / total


def canonicalize(
    graph: WeightedGraph, goals: Sequence[int], start: int, prior: Sequence
) -> Scenario:
    """Relabel goals so the higher-prior goal is primary.

    On an exact tie the first-listed goal stays primary.
    """
    if len(goals) != 2:
        raise InputError("exactly two goals are required")
    p, q = _parse_prior(prior)
    a, b = goals
    if q > p:
        return Scenario(graph, b, a, start, BeliefVector(simplify(q), simplify(p)), swapped=True)
    return Scenario(graph, a, b, start, BeliefVector(simplify(p), simplify(q)))


def recanonicalize(scenario: Scenario) -> Scenario:
    return canonicalize(
        scenario.graph, scenario.goals, scenario.start, [scenario.prior.b1, scenario.prior.b2]
    )


def validate(scenario: Scenario) -> list[str]:
    """Return one diagnostic per violated invariant; an empty list means valid."""
    problems: list[str] = []
    g = scenario.graph
    ids = {"start": scenario.start, "goal_primary": scenario.goal_primary, "goal_secondary": scenario.goal_secondary}
    bad = False
    for name, v in ids.items():
        try:
            g.check_vertex(v)
        except InputError:
            problems.append(f"{name} {v!r} is not a vertex of the graph")
            bad = True
    if bad:
        return problems
    if scenario.goal_primary == scenario.goal_secondary:
        problems.append("the two goals coincide")
    if scenario.start in scenario.goals:
        problems.append("start coincides with a goal")
    b1, b2 = scenario.prior
    if not (0 < b1 < 1 and 0 < b2 < 1):
        problems.append("prior entries must lie strictly in (0, 1)")
    if b1 < b2:
        problems.append("labeling is not canonical: primary goal has the smaller prior")
    if problems:
        return problems

    live = reachable_from(g, scenario.start, blocked=scenario.goals)
    frontier = {v for u in live for v, _ in g.successors(u)}
    live |= frontier & set(scenario.goals)
    for theta in (1, 2):
        dist = scenario.dist(theta)
        stuck = sorted(v for v in live if v not in dist)
        if stuck:
            shown = ", ".join(str(v) for v in stuck[:5])
            more = "" if len(stuck) <= 5 else f" (+{len(stuck) - 5} more)"
            problems.append(
                f"goal {theta} (vertex {scenario.goal(theta)}) is unreachable from vertices {shown}{more}"
            )
    return problems


def check(scenario: Scenario) -> Scenario:
    problems = validate(scenario)
    if problems:
        raise ScenarioError(problems)
    return scenario


# -- JSON --------------------------------------------------------------------


def _resolve_vertex(graph: WeightedGraph, ref) -> int:
    if isinstance(ref, (list, tuple)):
        return graph.index_of(tuple(int(x) for x in ref))
    if isinstance(ref, bool) or not isinstance(ref, int):
        raise InputError(f"vertex reference {ref!r} must be an id or a [row, col] cell")
    return graph.check_vertex(ref)


def scenario_from_dict(data: Mapping) -> Scenario:
    """Parse ``{graph | grid, goals, start, prior}`` and canonicalize.

    Inside a top-level ``grid`` block, ``start`` and ``goals`` may be given as
    ``[row, col]`` cells.
    """
    if not isinstance(data, Mapping):
        raise InputError("scenario must be a JSON object")
    for key in ("goals", "start", "prior"):
        if key not in data:
            raise InputError(f"scenario is missing '{key}'")
    if "graph" in data:
        graph = WeightedGraph.from_dict(data["graph"])
    elif "grid" in data:
        graph = WeightedGraph.from_dict({"grid": data["grid"]})
    else:
        raise InputError("scenario needs a 'graph' or 'grid' block")
    goals = [_resolve_vertex(graph, x) for x in data["goals"]]
    start = _resolve_vertex(graph, data["start"])
    return canonicalize(graph, goals, start, data["prior"])


def scenario_to_dict(scenario: Scenario) -> dict:
    return {
        "graph": scenario.graph.to_dict(),
        "goals": [scenario.goal_primary, scenario.goal_secondary],
        "start": scenario.start,
        "prior": [to_json_number(scenario.prior.b1), to_json_number(scenario.prior.b2)],
    }


def load_scenario(path) -> Scenario:
    with open(path) as fh:
        data = json.load(fh)
    return check(scenario_from_dict(data))
