"""Expected payoffs, Value of Information and Monte-Carlo rollouts.

Attacker strategies here are finite mixtures over paths that do not react to
the Defender's actions, and every Defender policy is a deterministic function
of the observed prefix. Expected costs are therefore finite sums over the
mixture support and are computed exactly.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import TYPE_CHECKING, Sequence

import numpy as np

from .errors import ContractError, InputError
from .graphcore import Trajectory
from .numeric import Number, div, simplify
from .scenario import Scenario

if TYPE_CHECKING:
    from .equilibrium import MixedAttackerStrategy

logger = logging.getLogger(__name__)

SIM_BLOCK = 4096


def _require_policy(defender) -> None:
    if not callable(getattr(defender, "allocations", None)):
        raise ContractError(
            f"{defender!r} is not a prefix-measurable Defender policy (no allocations method)"
        )


def check_episode(scenario: Scenario, traj: Trajectory) -> None:
    """A played path starts at ``s_0`` and stops at the first goal it reaches."""
    goals = scenario.goals
    if traj.start != scenario.start:
        raise InputError(f"path starts at {traj.start}, not at the start vertex {scenario.start}")
    if traj.end not in goals:
        raise InputError(f"path ends at {traj.end}, which is not a goal")
    if any(v in goals for v in traj.nodes[:-1]):
        raise InputError("path visits a goal before its final step; the game would already be over")


def terminal_cost(scenario: Scenario, end: int, theta: int) -> Number:
    return scenario.d(end, theta)


def stage_costs(defender, scenario: Scenario, traj: Trajectory, theta: int) -> list[Number]:
    """Expected allocation to the true goal at each step: ``w(e_t) * P_t(g_theta)``."""
    _require_policy(defender)
    p1s = defender.allocations(scenario, traj)
    if theta == 1:
        return [w * p for w, p in zip(traj.weights, p1s)]
    return [w * (1 - p) for w, p in zip(traj.weights, p1s)]


def path_cost(defender, scenario: Scenario, traj: Trajectory, theta: int) -> Number:
    check_episode(scenario, traj)
    stage = sum(stage_costs(defender, scenario, traj, theta), 0)
    return simplify(stage + terminal_cost(scenario, traj.end, theta))


def exact_cost(defender, attacker: "MixedAttackerStrategy", theta: int, scenario: Scenario) -> Number:
    total: Number = 0
    for traj, prob in attacker.support(theta):
        total += prob * path_cost(defender, scenario, traj, theta)
    return simplify(total)


def complete_information_values(scenario: Scenario) -> tuple[Number, Number]:
    return scenario.d(scenario.start, 1), scenario.d(scenario.start, 2)


def value_of_information(u: Number, ubar: Number) -> Number:
    if not ubar > 0:
        raise InputError("complete-information value must be positive")
    return div(ubar - u, ubar)


@dataclass(frozen=True)
class GameOutcome:
    u1: Number
    u2: Number
    u: Number
    ubar1: Number
    ubar2: Number
    ubar: Number
    voi: Number

    def as_dict(self) -> dict:
        return {k: float(v) for k, v in self.__dict__.items()}


def outcome(defender, attacker: "MixedAttackerStrategy", scenario: Scenario) -> GameOutcome:
    b1, b2 = scenario.prior
    u1 = exact_cost(defender, attacker, 1, scenario)
    u2 = exact_cost(defender, attacker, 2, scenario)
    ubar1, ubar2 = complete_information_values(scenario)
    u = simplify(b1 * u1 + b2 * u2)
    ubar = simplify(b1 * ubar1 + b2 * ubar2)
    return GameOutcome(u1, u2, u, ubar1, ubar2, ubar, value_of_information(u, ubar))


# -- Monte Carlo ---------------------------------------------------------------


@dataclass(frozen=True)
class RolloutRecord:
    seed: int
    index: int
    theta: int
    path: Trajectory
    allocations: tuple[int, ...]
    cost: float
    terminal_cost: float


@dataclass(frozen=True)
class EmpiricalOutcome:
    n: int
    n1: int
    n2: int
    u1: float
    u2: float
    u: float
    se1: float
    se2: float
    se: float
    ubar: float
    voi: float

    def as_dict(self) -> dict:
        return dict(self.__dict__)


@dataclass
class SimulationResult:
    outcome: EmpiricalOutcome
    costs: np.ndarray
    types: np.ndarray
    records: list[RolloutRecord] | None = None


def _mean_se(x: np.ndarray) -> tuple[float, float]:
    if x.size == 0:
        return float("nan"), float("nan")
    if x.size == 1:
        return float(x[0]), 0.0
    return float(x.mean()), float(x.std(ddof=1) / np.sqrt(x.size))


def simulate(
    defender,
    attacker: "MixedAttackerStrategy",
    scenario: Scenario,
    n_rollouts: int,
    seed: int = 0,
    keep_records: bool = True,
) -> SimulationResult:
    """Sample types, paths and Defender actions; report means with standard errors.

    Rollouts are generated in fixed-size blocks, block ``k`` drawing from a
    Philox stream keyed by ``(seed, k)``; results depend only on ``seed``.
    """
    if n_rollouts < 1:
        raise InputError("n_rollouts must be at least 1")
    _require_policy(defender)
    b1 = float(scenario.prior.b1)
    tables = {}
    for theta in (1, 2):
        entries = []
        for traj, prob in attacker.support(theta):
            check_episode(scenario, traj)
            p1 = np.array([float(p) for p in defender.allocations(scenario, traj)], dtype=float)
            p_true = p1 if theta == 1 else 1.0 - p1
            w = np.array([float(x) for x in traj.weights], dtype=float)
            entries.append((traj, float(prob), w, p_true, float(terminal_cost(scenario, traj.end, theta))))
        if not entries:
            raise ContractError(f"attacker mixture has no support for type {theta}")
        tables[theta] = entries
    t_max = max(len(e[2]) for es in tables.values() for e in es)
    cum = {th: np.cumsum([e[1] for e in es]) for th, es in tables.items()}

    costs = np.empty(n_rollouts)
    types = np.empty(n_rollouts, dtype=np.int8)
    records: list[RolloutRecord] | None = [] if keep_records else None
    for block_start in range(0, n_rollouts, SIM_BLOCK):
        m = min(SIM_BLOCK, n_rollouts - block_start)
        rng = np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, block_start // SIM_BLOCK])))
        theta_draw = np.where(rng.random(m) < b1, 1, 2)
        path_draw = rng.random(m)
        step_draw = rng.random((m, t_max))
        for theta in (1, 2):
            rows = np.flatnonzero(theta_draw == theta)
            if rows.size == 0:
                continue
            idx = np.searchsorted(cum[theta], path_draw[rows] * cum[theta][-1], side="right")
            idx = np.minimum(idx, len(tables[theta]) - 1)
            for k, (traj, _, w, p_true, term) in enumerate(tables[theta]):
                sel = rows[idx == k]
                if sel.size == 0:
                    continue
                hits = step_draw[sel, : len(w)] < p_true
                c = hits @ w + term
                costs[block_start + sel] = c
                types[block_start + sel] = theta
                if records is not None:
                    other = 3 - theta
                    for r, h, ci in zip(sel, hits, c):
                        records.append(
                            RolloutRecord(
                                seed, int(block_start + r), theta, traj,
                                tuple(theta if x else other for x in h), float(ci), term,
                            )
                        )
    if records is not None:
        records.sort(key=lambda r: r.index)

    u1, se1 = _mean_se(costs[types == 1])
    u2, se2 = _mean_se(costs[types == 2])
    u, se = _mean_se(costs)
    ubar1, ubar2 = complete_information_values(scenario)
    ubar = float(scenario.prior.b1 * ubar1 + scenario.prior.b2 * ubar2)
    emp = EmpiricalOutcome(
        n=n_rollouts, n1=int((types == 1).sum()), n2=int((types == 2).sum()),
        u1=u1, u2=u2, u=u, se1=se1, se2=se2, se=se, ubar=ubar, voi=(ubar - u) / ubar,
    )
    return SimulationResult(emp, costs, types, records)


def records_to_csv_rows(records: Sequence[RolloutRecord]) -> list[list]:
    return [[r.seed, r.theta, r.path.T, repr(r.cost), repr(r.terminal_cost)] for r in records]
