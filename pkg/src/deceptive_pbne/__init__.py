"""Equilibrium solver and simulator for a deceptive path-planning game on graphs."""

from .baselines import DeceptivePathQuery, default_horizon, solve_deceptive
from .defender import GreedyGoalRecognition, SigmaStar, goal_recognition_belief, greedy_defender, sigma_star, update_progress
from .equilibrium import (
    Equilibrium,
    EquilibriumPath,
    MixedAttackerStrategy,
    PhaseBoundaries,
    StrategyProfile,
    build_primary_paths,
    certify_pbne,
    induced_beliefs,
    mixing_probabilities,
    segment_phases,
    solve,
    solve_secondary,
)
from .evaluate import GameOutcome, exact_cost, outcome, simulate
from .graphcore import GridSpec, Trajectory, WeightedGraph, gen_grid, grid_graph, shortest_distances, validate_simple
from .scenario import BeliefVector, Scenario, canonicalize, validate

__version__ = "0.1.0"
