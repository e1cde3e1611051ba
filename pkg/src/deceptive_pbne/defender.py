"""Defender policies.

``SigmaStar`` is the equilibrium policy driven by the progress statistic (the
closest distance to the primary goal seen so far). ``GreedyGoalRecognition`` is the
deviating Defender that forms a goal-recognition belief from path length and
allocates greedily to the more likely goal.

Every policy exposes ``allocations(scenario, traj)``: the probability of
allocating to the primary goal after each step of ``traj``. The policies only
look at the Attacker's observed prefix, never at their own past actions.
"""

from __future__ import annotations

import math
from typing import Mapping, Sequence

from .errors import InputError
from .graphcore import Trajectory
from .numeric import Number, div, is_exact, le, simplify
from .scenario import BeliefVector, Scenario


def update_progress(c_prev: Number, node: int, dist1: Mapping[int, Number]) -> Number:
    if c_prev < 0:
        raise InputError(f"progress value must be nonnegative, got {c_prev}")
    try:
        d = dist1[node]
    except KeyError:
        raise InputError(f"vertex {node} has no distance to the primary goal") from None
    return min(c_prev, d)


def sigma_star(
    c_prev: Number, edge: tuple[int, int, Number], dist1: Mapping[int, Number]
) -> BeliefVector:
    """Allocation after traversing ``edge`` when the progress statistic was ``c_prev``.

    The primary goal gets the fraction of the edge weight that was new progress.
    """
    u, v, w = edge
    if not w > 0:
        raise InputError(f"edge weight must be positive, got {w}")
    c_new = update_progress(c_prev, v, dist1)
    gain = c_prev - c_new
    if not le(gain, w):
        raise InputError(
            f"progress {gain} exceeds edge weight {w}; c_prev={c_prev} is inconsistent with vertex {u}"
        )
    p1 = div(gain, w)
    if not is_exact(p1):
        p1 = min(max(p1, 0.0), 1.0)
    return BeliefVector.primary(p1)


def progress_trace(traj: Trajectory, dist1: Mapping[int, Number], c0: Number | None = None) -> list[Number]:
    """Progress values ``c_0 .. c_T`` along ``traj``."""
    c = dist1[traj.start] if c0 is None else c0
    out = [c]
    for v in traj.nodes[1:]:
        c = update_progress(c, v, dist1)
        out.append(c)
    return out


def _exponents(prefix_cost, node, dist1, dist2, start):
    try:
        e1 = -prefix_cost - dist1[node] + dist1[start]
        e2 = -prefix_cost - dist2[node] + dist2[start]
    except KeyError as exc:
        raise InputError(f"vertex {exc.args[0]} cannot reach both goals") from None
    return e1, e2


def goal_recognition_belief(
    prefix_cost: Number,
    node: int,
    prior: BeliefVector,
    dist1: Mapping[int, Number],
    dist2: Mapping[int, Number],
    start: int,
) -> BeliefVector:
    """Goal-recognition belief with path length as the presumed cost.

    ``P(g_i) ∝ prior_i * exp(-cost - d(node, g_i) + d(start, g_i))``, evaluated
    in log space.
    """
    if prefix_cost < 0:
        raise InputError("prefix cost must be nonnegative")
    e1, e2 = _exponents(prefix_cost, node, dist1, dist2, start)
    l1 = math.log(prior.b1) + float(e1)
    l2 = math.log(prior.b2) + float(e2)
    m = max(l1, l2)
    z1, z2 = math.exp(l1 - m), math.exp(l2 - m)
    p1 = z1 / (z1 + z2)
    return BeliefVector(p1, 1.0 - p1)


def greedy_defender(belief: BeliefVector) -> BeliefVector:
    """All mass on the goal with the larger belief; ties go to the primary goal."""
    return BeliefVector(1, 0) if belief.b1 >= belief.b2 else BeliefVector(0, 1)


def recognition_prefers_primary(
    prefix_cost: Number,
    node: int,
    prior: BeliefVector,
    dist1: Mapping[int, Number],
    dist2: Mapping[int, Number],
    start: int,
) -> bool:
    """``greedy_defender(goal_recognition_belief(...))`` decided without rounding where possible."""
    e1, e2 = _exponents(prefix_cost, node, dist1, dist2, start)
    gap = e1 - e2
    if prior.b1 == prior.b2:
        return gap >= 0
    if is_exact(gap) and is_exact(prior.b1):
        # exp(gap) * b1/b2 is rational only when gap == 0
        if gap == 0:
            return prior.b1 >= prior.b2
    return float(gap) >= math.log(prior.b2 / prior.b1)


class SigmaStar:
    """Equilibrium Defender: allocate to the primary goal in proportion to new progress."""

    name = "sigma_star"

    def params(self) -> dict:
        return {}

    def allocations(self, scenario: Scenario, traj: Trajectory) -> list[Number]:
        dist1 = scenario.dist1
        c = dist1[traj.start]
        out = []
        for u, v, w in traj.edges:
            c_new = update_progress(c, v, dist1)
            gain = c - c_new
            if not le(gain, w):
                raise InputError(f"progress {gain} exceeds weight {w} on edge ({u}, {v})")
            p1 = div(gain, w)
            out.append(p1 if is_exact(p1) else min(max(p1, 0.0), 1.0))
            c = c_new
        return out

    def __repr__(self) -> str:
        return "SigmaStar()"


class GreedyGoalRecognition:
    """Deviating Defender acting greedily on the goal-recognition belief."""

    name = "greedy_dragan"

    def params(self) -> dict:
        return {}

    def allocations(self, scenario: Scenario, traj: Trajectory) -> list[Number]:
        out = []
        for cost, v in zip(traj.cumulative_weight[1:], traj.nodes[1:]):
            prefers = recognition_prefers_primary(
                cost, v, scenario.prior, scenario.dist1, scenario.dist2, traj.start
            )
            out.append(1 if prefers else 0)
        return out

    def __repr__(self) -> str:
        return "GreedyGoalRecognition()"


class FixedAllocation:
    """History-independent allocation; mostly useful as a test fixture."""

    name = "fixed"

    def __init__(self, p1: Number):
        self.p1 = simplify(p1)
        BeliefVector.primary(self.p1)

    def params(self) -> dict:
        return {"p1": float(self.p1)}

    def allocations(self, scenario: Scenario, traj: Trajectory) -> list[Number]:
        return [self.p1] * traj.T

    def __repr__(self) -> str:
        return f"FixedAllocation({self.p1})"


DEFENDERS = {"sigma_star": SigmaStar, "greedy_dragan": GreedyGoalRecognition}


def defender_from_name(name: str):
    try:
        return DEFENDERS[name]()
    except KeyError:
        raise InputError(f"unknown defender {name!r}; choose from {sorted(DEFENDERS)}") from None


def allocation_vectors(policy, scenario: Scenario, traj: Trajectory) -> Sequence[BeliefVector]:
    return [BeliefVector.primary(p) for p in policy.allocations(scenario, traj)]
