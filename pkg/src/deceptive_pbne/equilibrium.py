"""Construction and certification of the equilibrium profile.

The secondary Attacker follows a single best-response path ``xi2`` against
``SigmaStar``. Along ``xi2`` the Defender's allocation to the primary goal
splits the path into three phases (all-primary, mixed, all-secondary). The
primary Attacker copies ``xi2`` and peels off along a shortest path to its goal
at the end of phase I or phase II, mixing so that the induced beliefs make the
Defender's actions greedy-optimal.
"""

from __future__ import annotations

import heapq
import logging
from dataclasses import dataclass, field

from .defender import SigmaStar
from .errors import ContractError, EnumerationOverflow, InputError, ScenarioError
from .evaluate import exact_cost, path_cost
from .graphcore import Trajectory, shortest_path
from .numeric import EPS, Number, close, div, is_exact, is_one, is_zero, le, simplify
from .oracle import EnumerationBudget, enumerate_simple_paths
from .scenario import BeliefVector, Scenario

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class EquilibriumPath:
    path: Trajectory
    secondary_cost: Number


@dataclass(frozen=True)
class PhaseBoundaries:
    t_I: int
    t_II: int
    T: int

    def __post_init__(self):
        if not 0 <= self.t_I <= self.t_II <= self.T:
            raise ContractError(f"inconsistent phase boundaries {self}")

    @property
    def has_phase_I(self) -> bool:
        return self.t_I > 0

    @property
    def has_phase_II(self) -> bool:
        return self.t_I < self.t_II

    @property
    def has_phase_III(self) -> bool:
        return self.t_II < self.T

    def phase_of(self, t: int) -> str:
        """Phase label of time ``t`` on ``xi2`` (time 0 counts as phase I)."""
        if t <= self.t_I:
            return "I"
        if t <= self.t_II:
            return "II"
        return "III"


@dataclass(frozen=True)
class MixedAttackerStrategy:
    """Per-type finite distribution over paths.

    Zero-probability entries are dropped and identical paths merged.
    """

    primary: tuple[tuple[Trajectory, Number], ...]
    secondary: tuple[tuple[Trajectory, Number], ...]

    def __post_init__(self):
        for name in ("primary", "secondary"):
            merged: dict[tuple[int, ...], list] = {}
            for traj, p in getattr(self, name):
                if p < 0 or p > 1 + EPS:
                    raise InputError(f"path probability {p} outside [0, 1]")
                if is_zero(p):
                    continue
                if traj.nodes in merged:
                    merged[traj.nodes][1] = simplify(merged[traj.nodes][1] + p)
                else:
                    merged[traj.nodes] = [traj, p]
            entries = tuple((t, simplify(p)) for t, p in merged.values())
            total = sum((p for _, p in entries), 0)
            if not close(total, 1):
                raise InputError(f"{name} path probabilities sum to {total}, not 1")
            object.__setattr__(self, name, entries)

    @classmethod
    def pure(cls, primary_path: Trajectory, secondary_path: Trajectory) -> "MixedAttackerStrategy":
        return cls(((primary_path, 1),), ((secondary_path, 1),))

    def support(self, theta: int) -> tuple[tuple[Trajectory, Number], ...]:
        if theta == 1:
            return self.primary
        if theta == 2:
            return self.secondary
        raise InputError(f"type must be 1 or 2, got {theta!r}")


@dataclass(frozen=True)
class StrategyProfile:
    defender: object
    attacker: MixedAttackerStrategy

    @property
    def defender_name(self) -> str:
        return getattr(self.defender, "name", type(self.defender).__name__)


# -- secondary best response ---------------------------------------------------


def _remove_loops(nodes: list[int]) -> list[int]:
    out: list[int] = []
    pos: dict[int, int] = {}
    for v in nodes:
        if v in pos:
            cut = pos[v]
            for x in out[cut + 1 :]:
                del pos[x]
            del out[cut + 1 :]
        else:
            pos[v] = len(out)
            out.append(v)
    return out


def solve_secondary(scenario: Scenario) -> EquilibriumPath:
    """Least-cost search over (vertex, progress) states.

    Moving ``u -> v`` with progress ``c`` costs the weight not credited to the
    primary goal, ``w - (c - min(c, d1(v)))``, which is never negative. Goals
    are absorbing and pay the terminal distance to the secondary goal. Labels
    are ordered by (cost, steps, node sequence), which fixes the tie-break.
    """
    g = scenario.graph
    d1, d2 = scenario.dist1, scenario.dist2
    goals = set(scenario.goals)
    s0 = scenario.start
    if s0 not in d1 or s0 not in d2:
        raise ScenarioError(["start cannot reach both goals"])
    SINK = -1
    start = (s0, d1[s0])
    best: dict = {start: (0, 0, (s0,))}
    heap = [(0, 0, (s0,), s0, d1[s0])]
    done = set()
    answer = None
    while heap:
        cost, steps, nodes, u, c = heapq.heappop(heap)
        if u == SINK:
            answer = (cost, nodes)
            break
        if (u, c) in done:
            continue
        done.add((u, c))
        if u in goals:
            term = d2.get(u)
            if term is None:
                continue
            heapq.heappush(heap, (cost + term, steps + 1, nodes, SINK, 0))
            continue
        for v, w in g.successors(u):
            if v not in d1:
                continue
            c2 = min(c, d1[v])
            gain = c - c2
            if not le(gain, w):
                raise AssertionError(f"negative transition cost on ({u}, {v}): progress {gain} > weight {w}")
            step = w - gain
            if not is_exact(step) and step < 0:
                step = 0.0
            label = (cost + step, steps + 1, nodes + (v,))
            state = (v, c2)
            if state in done:
                continue
            if state not in best or label < best[state]:
                best[state] = label
                heapq.heappush(heap, (*label, v, c2))
    if answer is None:
        raise ScenarioError(["no goal is reachable from the start"])
    cost, nodes = answer
    simple = _remove_loops(list(nodes))
    traj = Trajectory.from_nodes(g, simple)
    assert traj.is_simple
    value = path_cost(SigmaStar(), scenario, traj, 2)
    if not close(value, cost):
        raise AssertionError(f"loop removal changed the cost from {cost} to {value}")
    return EquilibriumPath(traj, value)


# -- phases and primary paths ----------------------------------------------------


def segment_phases(xi2: EquilibriumPath, scenario: Scenario) -> PhaseBoundaries:
    probs = SigmaStar().allocations(scenario, xi2.path)
    T = len(probs)
    t_I = 0
    while t_I < T and is_one(probs[t_I]):
        t_I += 1
    positive = [t for t in range(1, T + 1) if not is_zero(probs[t - 1])]
    t_II = positive[-1] if positive else 0
    return PhaseBoundaries(t_I, t_II, T)


def _branch(xi2: Trajectory, t: int, scenario: Scenario) -> Trajectory:
    if t == xi2.T:
        return xi2
    head = xi2.prefix(t)
    tail = shortest_path(
        scenario.graph, head.end, scenario.goal_primary, dist=scenario.dist1, avoid=scenario.goal_secondary
    )
    return head.concat(tail)


def build_primary_paths(
    xi2: EquilibriumPath, phases: PhaseBoundaries, scenario: Scenario
) -> tuple[Trajectory, Trajectory]:
    """Copy ``xi2`` up to ``t_I`` (resp. ``t_II``), then a shortest path to the primary goal.

    When the branch point is the end of ``xi2`` the path is ``xi2`` itself; if
    that ends at the secondary goal, the walk on to the primary goal is charged
    as terminal cost.
    """
    path = xi2.path
    first = _branch(path, phases.t_I, scenario)
    second = first if phases.t_I == phases.t_II else _branch(path, phases.t_II, scenario)
    return first, second


def mixing_probabilities(prior: BeliefVector) -> tuple[Number, Number]:
    """Weights ``(p_I, p_II)`` on the phase-I and phase-II branch paths."""
    if prior.b1 < prior.b2:
        raise ContractError("prior is not canonical: b1 < b2")
    p_II = div(prior.b2, prior.b1)
    return simplify(1 - p_II), p_II


def induced_beliefs(
    strategy: MixedAttackerStrategy, prior: BeliefVector, prefix: Trajectory
) -> BeliefVector | None:
    """Posterior over types after observing ``prefix``; ``None`` off the support."""
    mass = []
    for theta in (1, 2):
        m = sum((p for traj, p in strategy.support(theta) if traj.startswith(prefix)), 0)
        mass.append(prior[theta] * m)
    z = mass[0] + mass[1]
    if is_zero(z):
        return None
    b1 = div(mass[0], z)
    return BeliefVector(b1, simplify(div(mass[1], z)))


def belief_trace(strategy: MixedAttackerStrategy, prior: BeliefVector, traj: Trajectory) -> list[BeliefVector | None]:
    return [induced_beliefs(strategy, prior, traj.prefix(t)) for t in range(traj.T + 1)]


@dataclass(frozen=True)
class Equilibrium:
    scenario: Scenario
    xi2: EquilibriumPath
    phases: PhaseBoundaries
    xi1_I: Trajectory
    xi1_II: Trajectory
    mixing: tuple[Number, Number]
    strategy: MixedAttackerStrategy = field(repr=False)

    @property
    def profile(self) -> StrategyProfile:
        return StrategyProfile(SigmaStar(), self.strategy)

    @property
    def continuation(self) -> Trajectory | None:
        """Walk from the secondary goal to the primary goal charged as terminal cost, if any."""
        sc = self.scenario
        if self.xi1_II.end != sc.goal_secondary:
            return None
        return shortest_path(sc.graph, sc.goal_secondary, sc.goal_primary, dist=sc.dist1)


def solve(scenario: Scenario) -> Equilibrium:
    xi2 = solve_secondary(scenario)
    phases = segment_phases(xi2, scenario)
    first, second = build_primary_paths(xi2, phases, scenario)
    p_I, p_II = mixing_probabilities(scenario.prior)
    strategy = MixedAttackerStrategy(((first, p_I), (second, p_II)), ((xi2.path, 1),))
    logger.debug("phases %s, mixing %s/%s", phases, p_I, p_II)
    return Equilibrium(scenario, xi2, phases, first, second, (p_I, p_II), strategy)


# -- certificate -------------------------------------------------------------------


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool | None  # None: skipped
    detail: str = ""


@dataclass
class Certificate:
    checks: list[CheckResult]

    @property
    def passed(self) -> bool:
        """All executed checks passed (skipped checks do not count)."""
        return all(c.passed is not False for c in self.checks)

    @property
    def complete(self) -> bool:
        return all(c.passed is not None for c in self.checks)

    def failures(self) -> list[CheckResult]:
        return [c for c in self.checks if c.passed is False]

    def __getitem__(self, name: str) -> CheckResult:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def summary(self) -> str:
        mark = {True: "PASS", False: "FAIL", None: "SKIP"}
        return "\n".join(f"{mark[c.passed]} {c.name}: {c.detail}" for c in self.checks)


def _attacker_check(scenario, profile, theta, paths) -> CheckResult:
    name = f"attacker_best_response_type{theta}"
    u = exact_cost(profile.defender, profile.attacker, theta, scenario)
    costs = {tr.nodes: path_cost(profile.defender, scenario, tr, theta) for tr in paths}
    best = min(costs.values())
    if not le(u, best):
        worse = min(costs, key=costs.get)
        return CheckResult(name, False, f"path {list(worse)} costs {best} < equilibrium {u}")
    for traj, _ in profile.attacker.support(theta):
        c = path_cost(profile.defender, scenario, traj, theta)
        if not close(c, best):
            return CheckResult(name, False, f"supported path {list(traj.nodes)} costs {c} > best {best}")
    return CheckResult(name, True, f"{len(paths)} simple paths, best cost {best}")


def _defender_check(scenario, profile) -> CheckResult:
    name = "defender_sequential_rationality"
    seen = set()
    n = 0
    for theta in (1, 2):
        for traj, _ in profile.attacker.support(theta):
            p1s = profile.defender.allocations(scenario, traj)
            for t in range(1, traj.T + 1):
                key = traj.nodes[: t + 1]
                if key in seen:
                    continue
                seen.add(key)
                n += 1
                b = induced_beliefs(profile.attacker, scenario.prior, traj.prefix(t))
                p1 = p1s[t - 1]
                if b is None:
                    continue
                if (b.b1 > b.b2 and not is_one(p1)) or (b.b1 < b.b2 and not is_zero(p1)):
                    return CheckResult(
                        name, False,
                        f"history {list(key)}: belief ({b.b1}, {b.b2}) but allocation to primary {p1}",
                    )
    return CheckResult(name, True, f"{n} on-support histories")


def certify_pbne(
    scenario: Scenario,
    profile: StrategyProfile | None = None,
    max_enum_vertices: int = 12,
    budget: EnumerationBudget | None = None,
) -> Certificate:
    """Empirically check the equilibrium conditions of ``profile``.

    The Attacker-deviation checks enumerate every simple path and are skipped
    when the graph is larger than ``max_enum_vertices``.
    """
    if profile is None:
        profile = solve(scenario).profile
    if budget is None:
        budget = EnumerationBudget(max_vertices=max_enum_vertices)
    checks: list[CheckResult] = []
    paths = None
    reason = ""
    if scenario.graph.n > max_enum_vertices:
        reason = f"{scenario.graph.n} vertices exceeds enumeration cap {max_enum_vertices}"
    else:
        try:
            paths = enumerate_simple_paths(scenario, budget)
        except EnumerationOverflow as exc:
            reason = str(exc)
    for theta in (1, 2):
        if paths is None:
            checks.append(CheckResult(f"attacker_best_response_type{theta}", None, reason))
        else:
            checks.append(_attacker_check(scenario, profile, theta, paths))
    checks.append(_defender_check(scenario, profile))

    u1 = exact_cost(profile.defender, profile.attacker, 1, scenario)
    d1 = scenario.d(scenario.start, 1)
    checks.append(CheckResult("primary_value", close(u1, d1), f"U1={u1}, d(s0,g1)={d1}"))
    u2 = exact_cost(profile.defender, profile.attacker, 2, scenario)
    xi2 = solve_secondary(scenario)
    checks.append(
        CheckResult("secondary_value", close(u2, xi2.secondary_cost), f"U2={u2}, best response={xi2.secondary_cost}")
    )
    return Certificate(checks)
