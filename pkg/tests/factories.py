"""Scenario builders and independent reference computations shared by the tests."""

from __future__ import annotations

import random
from collections import deque
from fractions import Fraction

from deceptive_pbne.graphcore import GridSpec, WeightedGraph, gen_grid, grid_graph
from deceptive_pbne.scenario import Scenario, canonicalize, check, validate

# --- hand-built scenarios ---------------------------------------------------------

S, P, X, R, G1, G2 = range(6)
DEVIATION_EDGES = [
    (S, P, 1), (P, X, 11), (X, G2, 4), (X, R, 1), (R, G1, 4),
    (R, G2, Fraction(9, 2)), (G2, R, Fraction(9, 2)), (G1, R, 4), (P, G1, 14),
]


def deviation_scenario(prior=(0.6, 0.4)) -> Scenario:
    """Six vertices, d(s0, g1) = 15, all three phases, and the goal-recognition
    defender earning 15 / 5 / 15 on the two primary paths and the secondary path."""
    g = WeightedGraph(6, DEVIATION_EDGES)
    return check(canonicalize(g, [G1, G2], S, prior))


def fractional_weight_scenario() -> Scenario:
    """Small weighted graph with d(s0, g1) = 3.5 whose first shortest-path edge
    (weight 1.5) lowers the distance to 2."""
    s, a, b, g1, g2 = range(5)
    edges = [
        (s, a, Fraction(3, 2)), (a, b, 1), (b, g1, 1), (s, g2, 2),
        (a, g2, 3), (g2, s, 2), (b, a, 1), (a, s, Fraction(3, 2)), (g1, b, 1),
    ]
    return check(canonicalize(WeightedGraph(5, edges), [g1, g2], s, (0.6, 0.4)))


def corridor_scenario() -> Scenario:
    """s - a - b - g2 with g1 hanging off a; every goal is reached by one simple path."""
    s, a, b, g1, g2 = range(5)
    edges = [(s, a, 1), (a, b, 1), (b, g2, 1), (a, g1, 1)]
    edges += [(v, u, w) for u, v, w in edges]
    return check(canonicalize(WeightedGraph(5, edges), [g1, g2], s, (0.6, 0.4)))


# --- random scenarios -------------------------------------------------------------

WEIGHTS = (1, 1, 2, 3, Fraction(1, 2), Fraction(3, 2), Fraction(5, 2))
PRIORS = ((0.5, 0.5), (0.6, 0.4), (0.7, 0.3), (0.8, 0.2), (Fraction(5, 9), Fraction(4, 9)))


def random_graph_scenario(rng: random.Random, max_vertices: int = 12, symmetric=None) -> Scenario:
    """Random weighted digraph with 4..max_vertices vertices that passes validation."""
    while True:
        n = rng.randint(4, max_vertices)
        sym = rng.random() < 0.5 if symmetric is None else symmetric
        p = rng.uniform(0.1, 0.3)
        edges = {}
        # a random spanning chain keeps most draws connected
        order = list(range(n))
        rng.shuffle(order)
        for u, v in zip(order, order[1:]):
            edges[(u, v)] = rng.choice(WEIGHTS)
        for u in range(n):
            for v in range(n):
                if u != v and (u, v) not in edges and rng.random() < p:
                    edges[(u, v)] = rng.choice(WEIGHTS)
        if sym:
            for (u, v), w in list(edges.items()):
                edges.setdefault((v, u), w)
        g = WeightedGraph(n, [(u, v, w) for (u, v), w in edges.items()])
        start, ga, gb = rng.sample(range(n), 3)
        sc = canonicalize(g, [ga, gb], start, rng.choice(PRIORS))
        if not validate(sc):
            return sc


def random_grid_scenario(rng: random.Random, max_side: int = 20, max_density: float = 0.4) -> Scenario:
    while True:
        rows, cols = rng.randint(3, max_side), rng.randint(3, max_side)
        cells = rng.sample([(r, c) for r in range(rows) for c in range(cols)], 3)
        density = rng.choice([0.0, 0.1, 0.2, 0.3, max_density])
        spec = GridSpec(rows, cols, density, cells[0], cells[1], cells[2], rng.getrandbits(63))
        try:
            g = gen_grid(spec, max_attempts=50)
        except Exception:
            continue
        sc = canonicalize(g, [g.index_of(cells[1]), g.index_of(cells[2])], g.index_of(cells[0]),
                          rng.choice(PRIORS))
        if not validate(sc):
            return sc


def obstacle_free_grid(rows, cols, start, goal1, goal2, prior=(0.6, 0.4)) -> Scenario:
    g = grid_graph(rows, cols)
    return check(canonicalize(g, [g.index_of(goal1), g.index_of(goal2)], g.index_of(start), prior))


# --- independent references -------------------------------------------------------


def bfs_distance(graph: WeightedGraph, source: int, target: int, blocked=()) -> int | None:
    """Hop distance by breadth-first search (valid on unit-weight graphs)."""
    seen = {source}
    queue = deque([(source, 0)])
    while queue:
        u, d = queue.popleft()
        if u == target:
            return d
        for v, _ in graph.successors(u):
            if v not in seen and v not in blocked:
                seen.add(v)
                queue.append((v, d + 1))
    return None


def random_simple_path(rng: random.Random, scenario: Scenario, goal: int, avoid: int) -> list[int]:
    """Randomized depth-first search for a simple path from the start to ``goal`` avoiding ``avoid``."""
    g = scenario.graph

    def shuffled(u):
        succ = list(g.successors(u))
        rng.shuffle(succ)
        return iter(succ)

    path = [scenario.start]
    visited = {scenario.start, avoid}
    stack = [shuffled(scenario.start)]
    while stack:
        nxt = next(stack[-1], None)
        if nxt is None:
            stack.pop()
            path.pop()
            continue
        v = nxt[0]
        if v in visited:
            continue
        visited.add(v)
        path.append(v)
        if v == goal:
            return path
        stack.append(shuffled(v))
    raise AssertionError("goal unreachable")


def brute_deceptive_objective(scenario: Scenario, theta: int, horizon, objective: str):
    """Minimum objective over every walk to goal ``theta`` of weight at most ``horizon``
    that never enters the other goal, by exhaustive depth-first enumeration."""
    from deceptive_pbne.baselines import stage_terms
    from deceptive_pbne.graphcore import shortest_distances

    g = scenario.graph
    target, other = scenario.goal(theta), scenario.goal(3 - theta)
    term = stage_terms(scenario, theta, objective)
    # distances that avoid the other goal, computed on a copy without it
    kept = [(u, v, w) for u, v, w in g.edges() if other not in (u, v)]
    reach = shortest_distances(WeightedGraph(g.n, kept), target)
    best = [float("inf")]

    def dfs(u, spent, value):
        if u == target:
            best[0] = min(best[0], value)
            return
        for v, w in g.successors(u):
            if v == other or v not in reach or spent + w + reach[v] > horizon:
                continue
            dfs(v, spent + w, value + term[v])

    dfs(scenario.start, 0, term[scenario.start])
    return best[0]
