import random

import pytest

from deceptive_pbne.baselines import (
    DeceptivePathQuery,
    deceptive_objective,
    default_horizon,
    solve_deceptive,
    solve_deceptive_detailed,
)
from deceptive_pbne.errors import InfeasibleQueryError, InputError

from factories import brute_deceptive_objective, obstacle_free_grid, random_graph_scenario


@pytest.mark.parametrize("objective", ["exaggeration", "ambiguity"])
@pytest.mark.parametrize("theta", [1, 2])
def test_tight_horizon_forces_shortest_path(objective, theta):
    sc = obstacle_free_grid(6, 6, (3, 0), (0, 5), (5, 5))
    d = sc.d(sc.start, theta)
    path = solve_deceptive(sc, DeceptivePathQuery(theta, d, objective))
    assert path.end == sc.goal(theta)
    assert path.total_weight == d


def test_ambiguity_tracks_bisector_on_symmetric_grid():
    sc = obstacle_free_grid(7, 7, (6, 3), (0, 0), (0, 6), prior=(0.5, 0.5))
    horizon = sc.d(sc.start, 1)
    res = solve_deceptive_detailed(sc, DeceptivePathQuery(1, horizon, "ambiguity"))
    cells = [sc.graph.label(v) for v in res.path.nodes]
    assert cells[:7] == [(r, 3) for r in range(6, -1, -1)]
    # |b1 - b2| vanishes on the bisector, so only the last three steps pay
    assert res.objective_value == pytest.approx(
        brute_deceptive_objective(sc, 1, horizon, "ambiguity"), abs=1e-12
    )


def test_secondary_exaggeration_detours_toward_primary():
    sc = obstacle_free_grid(10, 10, (5, 0), (0, 9), (9, 9))
    path = solve_deceptive(sc, DeceptivePathQuery(2, default_horizon(sc), "exaggeration"))
    assert min(sc.d(v, 1) for v in path.nodes) < sc.d(sc.start, 1) - 5
    assert path.total_weight > sc.d(sc.start, 2)
    assert sc.goal_primary not in path.nodes


@pytest.mark.parametrize("objective", ["exaggeration", "ambiguity"])
def test_dp_matches_exhaustive_walks(objective):
    rng = random.Random(4)
    for _ in range(25):
        sc = random_graph_scenario(rng, max_vertices=7)
        for theta in (1, 2):
            horizon = sc.d(sc.start, theta) + 2
            try:
                res = solve_deceptive_detailed(sc, DeceptivePathQuery(theta, horizon, objective))
            except InfeasibleQueryError:
                assert brute_deceptive_objective(sc, theta, horizon, objective) == float("inf")
                continue
            assert not res.binned
            assert res.path.total_weight <= horizon
            assert res.objective_value == pytest.approx(
                brute_deceptive_objective(sc, theta, horizon, objective), abs=1e-9
            )
            assert deceptive_objective(sc, res.path, theta, objective) == pytest.approx(res.objective_value)


def test_short_horizon_is_infeasible():
    sc = obstacle_free_grid(4, 4, (2, 0), (0, 3), (3, 3))
    with pytest.raises(InfeasibleQueryError):
        solve_deceptive(sc, DeceptivePathQuery(1, 2, "ambiguity"))


@pytest.mark.parametrize("kwargs", [dict(attacker_type=3), dict(objective="legible"), dict(horizon=0)])
def test_query_validation(kwargs):
    base = dict(attacker_type=1, horizon=5, objective="ambiguity")
    base.update(kwargs)
    with pytest.raises(InputError):
        DeceptivePathQuery(**base)
