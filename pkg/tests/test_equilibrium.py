import random
from fractions import Fraction

import pytest

from deceptive_pbne.defender import SigmaStar
from deceptive_pbne.equilibrium import (
    MixedAttackerStrategy,
    StrategyProfile,
    _remove_loops,
    belief_trace,
    build_primary_paths,
    certify_pbne,
    induced_beliefs,
    mixing_probabilities,
    segment_phases,
    solve,
    solve_secondary,
)
from deceptive_pbne.errors import ContractError
from deceptive_pbne.evaluate import path_cost
from deceptive_pbne.graphcore import Trajectory, WeightedGraph
from deceptive_pbne.oracle import sequential_bayes
from deceptive_pbne.scenario import BeliefVector, canonicalize, check

from factories import (
    G1, G2, P, R, S, X,
    corridor_scenario,
    deviation_scenario,
    obstacle_free_grid,
    random_graph_scenario,
)

F = Fraction


def _line(prior=(0.6, 0.4)):
    """g1 - a - s - b - g2: heading for one goal never helps toward the other."""
    edges = [(0, 1, 1), (1, 2, 1), (2, 3, 1), (3, 4, 1)]
    edges += [(v, u, w) for u, v, w in edges]
    return check(canonicalize(WeightedGraph(5, edges), [0, 4], 2, prior))


def _secondary_between():
    """The secondary goal lies on the only shortest path to the primary goal."""
    s, g1, g2 = 0, 1, 2
    edges = [(s, g2, 1), (g2, g1, 1), (s, g1, 3), (g1, g2, 1)]
    return check(canonicalize(WeightedGraph(3, edges), [g1, g2], s, (0.6, 0.4)))


def test_corridor_secondary_path_is_the_only_path():
    sc = corridor_scenario()
    xi2 = solve_secondary(sc)
    assert xi2.path.nodes == (0, 1, 2, 4)
    assert xi2.secondary_cost == 2


def test_three_phase_graph_by_hand():
    sc = deviation_scenario()
    xi2 = solve_secondary(sc)
    assert xi2.path.nodes == (S, P, X, G2)
    assert SigmaStar().allocations(sc, xi2.path) == [1, F(9, 11), 0]
    assert xi2.secondary_cost == 6
    ph = segment_phases(xi2, sc)
    assert (ph.t_I, ph.t_II, ph.T) == (1, 2, 3)
    assert ph.has_phase_I and ph.has_phase_II and ph.has_phase_III


def test_three_phase_branch_suffixes_are_shortest():
    sc = deviation_scenario()
    eq = solve(sc)
    assert eq.xi1_I.nodes == (S, P, G1)
    assert eq.xi1_II.nodes == (S, P, X, R, G1)
    for path, t in ((eq.xi1_I, eq.phases.t_I), (eq.xi1_II, eq.phases.t_II)):
        suffix_weight = path.total_weight - path.cumulative_weight[t]
        assert suffix_weight == sc.d(path.nodes[t], 1)


def test_only_phase_III_when_secondary_path_never_progresses():
    sc = _line()
    eq = solve(sc)
    assert eq.xi2.path.nodes == (2, 3, 4)
    assert (eq.phases.t_I, eq.phases.t_II) == (0, 0)
    assert eq.xi1_I == eq.xi1_II
    assert eq.xi1_I.nodes == (2, 1, 0)


def test_only_phase_I_when_secondary_path_is_shortest_toward_primary():
    sc = _secondary_between()
    eq = solve(sc)
    assert eq.phases.t_I == eq.phases.t_II == eq.phases.T == 1
    assert eq.xi1_I == eq.xi1_II == eq.xi2.path
    assert eq.continuation.nodes == (2, 1)
    assert path_cost(SigmaStar(), sc, eq.xi1_I, 1) == sc.d(sc.start, 1)


def test_equal_boundaries_give_identical_paths():
    rng = random.Random(2)
    seen = 0
    for _ in range(200):
        sc = random_graph_scenario(rng)
        eq = solve(sc)
        if eq.phases.t_I == eq.phases.t_II:
            seen += 1
            assert eq.xi1_I == eq.xi1_II
        if eq.phases.t_I == eq.phases.T:
            assert eq.xi1_I == eq.xi2.path
    assert seen > 0


@pytest.mark.parametrize(
    "prior, expected",
    [((0.6, 0.4), (F(1, 3), F(2, 3))), ((0.5, 0.5), (0, 1)), ((0.7, 0.3), (F(4, 7), F(3, 7)))],
)
def test_mixing_probabilities(prior, expected):
    assert mixing_probabilities(BeliefVector(F(str(prior[0])), F(str(prior[1])))) == expected


def test_mixing_requires_canonical_prior():
    with pytest.raises(ContractError):
        mixing_probabilities(BeliefVector(F(2, 5), F(3, 5)))


def test_uniform_prior_drops_phase_I_path():
    eq = solve(deviation_scenario(prior=(0.5, 0.5)))
    assert [t.nodes for t, _ in eq.strategy.primary] == [eq.xi1_II.nodes]


def test_induced_beliefs_on_three_phase_graph():
    sc = deviation_scenario()
    eq = solve(sc)
    xi2 = eq.xi2.path
    trace = [b.b1 for b in belief_trace(eq.strategy, sc.prior, xi2)]
    assert trace == [F(3, 5), F(3, 5), F(1, 2), 0]
    assert induced_beliefs(eq.strategy, sc.prior, eq.xi1_II.prefix(3)) == BeliefVector(1, 0)
    assert induced_beliefs(eq.strategy, sc.prior, eq.xi1_I.prefix(2)) == BeliefVector(1, 0)


def test_off_support_prefix_has_no_belief():
    sc = deviation_scenario()
    eq = solve(sc)
    detour = Trajectory.from_nodes(sc.graph, [S, P, X, R, G2])
    assert induced_beliefs(eq.strategy, sc.prior, detour) is None


def test_induced_beliefs_match_sequential_filter():
    rng = random.Random(8)
    for _ in range(60):
        sc = random_graph_scenario(rng)
        eq = solve(sc)
        for traj, _ in eq.strategy.primary + eq.strategy.secondary:
            assert belief_trace(eq.strategy, sc.prior, traj) == sequential_bayes(eq.strategy, sc.prior, traj.nodes)


def test_complete_information_certificate():
    sc = _line()
    cert = certify_pbne(sc)
    assert cert.passed and cert.complete
    eq = solve(sc)
    assert eq.xi2.secondary_cost == sc.d(sc.start, 2)


def test_random_ten_vertex_certificates():
    rng = random.Random(10)
    for _ in range(100):
        cert = certify_pbne(random_graph_scenario(rng, max_vertices=10))
        assert cert.passed and cert.complete, cert.summary()


def test_perturbed_mixing_fails_defender_check():
    sc = deviation_scenario()
    eq = solve(sc)
    p_I, p_II = eq.mixing
    shifted = MixedAttackerStrategy(((eq.xi1_I, p_I + F(1, 10)), (eq.xi1_II, p_II - F(1, 10))),
                                    eq.strategy.secondary)
    cert = certify_pbne(sc, StrategyProfile(SigmaStar(), shifted))
    check = cert["defender_sequential_rationality"]
    assert check.passed is False
    # the failing history sits in phase II, where the belief is no longer one half
    assert f"[{S}, {P}, {X}]" in check.detail
    b = induced_beliefs(shifted, sc.prior, eq.xi2.path.prefix(2))
    assert b.b1 != F(1, 2)


def test_certificate_skips_enumeration_on_large_graphs():
    sc = obstacle_free_grid(5, 5, (2, 0), (0, 4), (4, 4))
    cert = certify_pbne(sc)
    assert cert.passed and not cert.complete
    assert cert["attacker_best_response_type1"].passed is None


def test_remove_loops():
    assert _remove_loops([0, 1, 2, 1, 3, 0, 4]) == [0, 4]
    assert _remove_loops([0, 1, 2]) == [0, 1, 2]


def test_obstacle_free_default_layout():
    sc = obstacle_free_grid(20, 20, (10, 0), (0, 19), (19, 19))
    eq = solve(sc)
    assert eq.xi2.secondary_cost == 9
    assert (eq.phases.t_I, eq.phases.t_II, eq.phases.T) == (19, 19, 28)
    paths = build_primary_paths(eq.xi2, eq.phases, sc)
    assert paths[0] == paths[1]
