"""One-sided deceptive path planners used as Attacker deviations.

Both planners assume the observer runs the path-length goal-recognition model
of :func:`~deceptive_pbne.defender.goal_recognition_belief` and minimize, over walks to
the true goal that fit within a horizon, either the summed belief in the true
goal (exaggeration) or the summed belief gap between the goals (ambiguity).
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .defender import goal_recognition_belief
from .errors import InfeasibleQueryError, InputError
from .graphcore import Trajectory
from .numeric import Number, is_exact, le
from .scenario import Scenario

logger = logging.getLogger(__name__)

OBJECTIVES = ("exaggeration", "ambiguity")
MAX_LAYERS = 20_000


@dataclass(frozen=True)
class DeceptivePathQuery:
    attacker_type: int
    horizon: Number
    objective: str

    def __post_init__(self):
        if self.attacker_type not in (1, 2):
            raise InputError("attacker_type must be 1 or 2")
        if self.objective not in OBJECTIVES:
            raise InputError(f"objective must be one of {OBJECTIVES}")
        if not self.horizon > 0:
            raise InputError("horizon must be positive")


@dataclass(frozen=True)
class DeceptivePath:
    path: Trajectory
    objective_value: float
    binned: bool

    @property
    def simple(self) -> bool:
        return self.path.is_simple


def default_horizon(scenario: Scenario, multiplier: Number = 3) -> Number:
    s = scenario.start
    return multiplier * max(scenario.d(s, 1), scenario.d(s, 2))


def stage_terms(scenario: Scenario, theta: int, objective: str) -> np.ndarray:
    """Per-vertex stage cost of the given objective.

    Under path-length cost the prefix term is shared by both goals and cancels
    in the normalization, so the belief depends on the current vertex only.
    """
    g = scenario.graph
    out = np.full(g.n, np.inf)
    for v in g.vertices:
        if v not in scenario.dist1 or v not in scenario.dist2:
            continue
        b = goal_recognition_belief(0, v, scenario.prior, scenario.dist1, scenario.dist2, scenario.start)
        p_true = b[theta]
        out[v] = p_true if objective == "exaggeration" else abs(2 * p_true - 1)
    return out


def deceptive_objective(scenario: Scenario, traj: Trajectory, theta: int, objective: str) -> float:
    """Objective of ``traj`` evaluated directly from the belief model."""
    total = 0.0
    for cost, v in zip(traj.cumulative_weight, traj.nodes):
        b = goal_recognition_belief(cost, v, scenario.prior, scenario.dist1, scenario.dist2, scenario.start)
        p = b[theta]
        total += p if objective == "exaggeration" else abs(p - (1 - p))
    return total


def _integer_units(weights: list[Number], horizon: Number) -> tuple[dict, int, bool]:
    """Scale weights to integer layer units; bin only when exact scaling is too fine."""
    if all(is_exact(w) for w in weights) and is_exact(horizon):
        den = 1
        for x in [*weights, horizon]:
            den = math.lcm(den, Fraction(x).denominator)
        layers = math.floor(Fraction(horizon) * den)
        if layers <= MAX_LAYERS:
            return {w: int(Fraction(w) * den) for w in set(weights)}, layers, False
    elif all(float(w).is_integer() for w in weights):
        layers = math.floor(float(horizon) + 1e-9)
        if layers <= MAX_LAYERS:
            return {w: int(w) for w in set(weights)}, layers, False
    scale = MAX_LAYERS / float(horizon)
    return {w: max(1, round(float(w) * scale)) for w in set(weights)}, MAX_LAYERS, True


def solve_deceptive_detailed(scenario: Scenario, query: DeceptivePathQuery) -> DeceptivePath:
    theta = query.attacker_type
    target = scenario.goal(theta)
    other = scenario.goal(3 - theta)
    g = scenario.graph
    s0 = scenario.start
    if not le(scenario.d(s0, theta), query.horizon):
        raise InfeasibleQueryError(
            f"horizon {query.horizon} is shorter than the distance {scenario.d(s0, theta)} to goal {theta}"
        )
    term = stage_terms(scenario, theta, query.objective)
    edges = [(u, v, w) for u, v, w in g.edges() if u not in (target, other) and v != other]
    units, L, binned = _integer_units([w for _, _, w in edges] or [1], query.horizon)
    if binned:
        logger.warning("accumulated costs binned into %d layers", L)
    src = np.array([e[0] for e in edges], dtype=np.int64)
    dst = np.array([e[1] for e in edges], dtype=np.int64)
    wu = np.array([units[e[2]] for e in edges], dtype=np.int64)
    unit_of = {(u, v): units[w] for u, v, w in edges}

    value = np.full((L + 1, g.n), np.inf)
    pred = np.full((L + 1, g.n), -1, dtype=np.int64)
    value[0, s0] = term[s0]
    for k in range(1, L + 1):
        ok = wu <= k
        if not ok.any():
            continue
        s, d = src[ok], dst[ok]
        cand = value[k - wu[ok], s] + term[d]
        finite = np.isfinite(cand)
        if not finite.any():
            continue
        s, d, cand = s[finite], d[finite], cand[finite]
        order = np.lexsort((s, cand, d))
        d_sorted = d[order]
        first = np.ones(len(order), dtype=bool)
        first[1:] = d_sorted[1:] != d_sorted[:-1]
        pick = order[first]
        value[k, d[pick]] = cand[pick]
        pred[k, d[pick]] = s[pick]

    col = value[:, target]
    if not np.isfinite(col).any():
        raise InfeasibleQueryError(
            f"no walk to goal {theta} within horizon {query.horizon} that avoids the other goal"
        )
    k = int(np.argmin(col))  # first minimum: fewest accumulated units
    best = float(col[k])
    nodes = [target]
    v = target
    while k > 0:
        u = int(pred[k, v])
        k -= unit_of[(u, v)]
        nodes.append(u)
        v = u
    nodes.reverse()
    traj = Trajectory.from_nodes(g, nodes)
    if not traj.is_simple:
        logger.info("%s path for type %d revisits vertices", query.objective, theta)
    return DeceptivePath(traj, best, binned)


def solve_deceptive(scenario: Scenario, query: DeceptivePathQuery) -> Trajectory:
    return solve_deceptive_detailed(scenario, query).path
