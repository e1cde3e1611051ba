"""Weighted directed graphs, shortest distances, trajectories and grid worlds."""

from __future__ import annotations

import heapq
import math
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Hashable, Iterable, Mapping, Sequence

import numpy as np

from .errors import GenerationError, InputError
from .numeric import Number, close, is_exact, to_json_number, to_number

Cell = tuple[int, int]


@dataclass(frozen=True)
class GridLayout:
    rows: int
    cols: int
    obstacles: frozenset[Cell] = frozenset()

    def to_dict(self) -> dict:
        return {
            "rows": self.rows,
            "cols": self.cols,
            "obstacles": [list(c) for c in sorted(self.obstacles)],
        }


class WeightedGraph:
    """Directed graph on vertices ``0..n-1`` with strictly positive weights.

    Parallel edges are rejected, as are self-loops. Successor lists are kept in
    ascending vertex order; every tie-break downstream relies on that.
    """

    __slots__ = ("n", "_succ", "_pred", "_w", "labels", "grid", "_index")

    def __init__(
        self,
        n: int,
        edges: Iterable[tuple[int, int, Number]],
        labels: Sequence[Hashable] | None = None,
        grid: GridLayout | None = None,
    ):
        if n < 1:
            raise InputError("graph needs at least one vertex")
        succ: list[list[tuple[int, Number]]] = [[] for _ in range(n)]
        pred: list[list[tuple[int, Number]]] = [[] for _ in range(n)]
        weights: dict[tuple[int, int], Number] = {}
        for u, v, w in edges:
            if not (0 <= u < n and 0 <= v < n):
                raise InputError(f"edge ({u}, {v}) references an unknown vertex")
            if u == v:
                raise InputError(f"self-loop at vertex {u}")
            if isinstance(w, float) and not math.isfinite(w):
                raise InputError(f"edge ({u}, {v}) has non-finite weight")
            if not w > 0:
                raise InputError(f"edge ({u}, {v}) has non-positive weight {w}")
            if (u, v) in weights:
                raise InputError(f"duplicate edge ({u}, {v})")
            weights[(u, v)] = w
            succ[u].append((v, w))
            pred[v].append((u, w))
        self.n = n
        self._succ = tuple(tuple(sorted(s)) for s in succ)
        self._pred = tuple(tuple(sorted(p)) for p in pred)
        self._w = weights
        if labels is not None:
            labels = tuple(labels)
            if len(labels) != n or len(set(labels)) != n:
                raise InputError("labels must be unique, one per vertex")
            self._index = {lab: i for i, lab in enumerate(labels)}
        else:
            self._index = None
        self.labels = labels
        self.grid = grid

    def __repr__(self) -> str:
        return f"WeightedGraph(n={self.n}, m={len(self._w)})"

    def __eq__(self, other) -> bool:
        if not isinstance(other, WeightedGraph):
            return NotImplemented
        return (self.n, self._w, self.labels) == (other.n, other._w, other.labels)

    def __hash__(self) -> int:
        return hash((self.n, frozenset(self._w.items())))

    @property
    def vertices(self) -> range:
        return range(self.n)

    @property
    def num_edges(self) -> int:
        return len(self._w)

    def edges(self) -> list[tuple[int, int, Number]]:
        return [(u, v, w) for u in range(self.n) for v, w in self._succ[u]]

    def successors(self, u: int) -> tuple[tuple[int, Number], ...]:
        return self._succ[u]

    def predecessors(self, v: int) -> tuple[tuple[int, Number], ...]:
        return self._pred[v]

    def has_edge(self, u: int, v: int) -> bool:
        return (u, v) in self._w

    def weight(self, u: int, v: int) -> Number:
        try:
            return self._w[(u, v)]
        except KeyError:
            raise InputError(f"no edge ({u}, {v})") from None

    def check_vertex(self, v) -> int:
        if not isinstance(v, (int, np.integer)) or isinstance(v, bool) or not 0 <= v < self.n:
            raise InputError(f"unknown vertex {v!r}")
        return int(v)

    def label(self, v: int) -> Hashable:
        return self.labels[v] if self.labels is not None else v

    def index_of(self, label: Hashable) -> int:
        if self._index is None:
            raise InputError("graph has no vertex labels")
        try:
            return self._index[label]
        except KeyError:
            raise InputError(f"unknown vertex label {label!r}") from None

    @property
    def exact(self) -> bool:
        """True when every weight is an int or Fraction."""
        return all(is_exact(w) for w in self._w.values())

    def to_dict(self) -> dict:
        out: dict = {
            "vertices": list(range(self.n)),
            "edges": [
                {"from": u, "to": v, "weight": to_json_number(w)} for u, v, w in self.edges()
            ],
        }
        if self.grid is not None:
            out["grid"] = self.grid.to_dict()
        return out

    @classmethod
    def from_dict(cls, data: Mapping) -> "WeightedGraph":
        """Build from the JSON exchange format.

        ``vertices`` may be a list of ids or an integer count. When a ``grid``
        block is present without ``edges``, the 4-connected grid is rebuilt
        from it.
        """
        if "edges" not in data and "grid" in data:
            g = data["grid"]
            return grid_graph(int(g["rows"]), int(g["cols"]), [tuple(c) for c in g.get("obstacles", [])])
        verts = data.get("vertices")
        if verts is None:
            raise InputError("graph is missing 'vertices'")
        if isinstance(verts, int):
            n = verts
        else:
            ids = list(verts)
            n = len(ids)
            if sorted(ids) != list(range(n)):
                raise InputError("vertex ids must be the dense range 0..|V|-1")
        try:
            edges = [(int(e["from"]), int(e["to"]), to_number(e["weight"])) for e in data.get("edges", [])]
        except (KeyError, TypeError, ValueError) as exc:
            raise InputError(f"malformed edge entry: {exc}") from None
        labels = None
        grid = None
        if "grid" in data:
            g = data["grid"]
            grid = GridLayout(int(g["rows"]), int(g["cols"]), frozenset(tuple(c) for c in g.get("obstacles", [])))
            labels = _free_cells(grid.rows, grid.cols, grid.obstacles)
            if len(labels) != n:
                raise InputError("grid block does not match the vertex count")
        return cls(n, edges, labels=labels, grid=grid)


@dataclass(frozen=True)
class Trajectory:
    """A walk ``s_0 .. s_T`` with the weight of each traversed edge."""

    nodes: tuple[int, ...]
    weights: tuple[Number, ...] = field(default=())

    def __post_init__(self):
        if not self.nodes:
            raise InputError("trajectory must contain at least one node")
        if len(self.weights) != len(self.nodes) - 1:
            raise InputError("need exactly one weight per step")
        if any(not w > 0 for w in self.weights):
            raise InputError("trajectory weights must be positive")

    @classmethod
    def from_nodes(cls, graph: WeightedGraph, nodes: Iterable[int]) -> "Trajectory":
        nodes = tuple(int(v) for v in nodes)
        for v in nodes:
            graph.check_vertex(v)
        weights = tuple(graph.weight(u, v) for u, v in zip(nodes, nodes[1:]))
        return cls(nodes, weights)

    def __len__(self) -> int:
        return len(self.nodes)

    @property
    def T(self) -> int:
        return len(self.nodes) - 1

    @property
    def start(self) -> int:
        return self.nodes[0]

    @property
    def end(self) -> int:
        return self.nodes[-1]

    @property
    def edges(self) -> list[tuple[int, int, Number]]:
        return [(u, v, w) for (u, v), w in zip(zip(self.nodes, self.nodes[1:]), self.weights)]

    @property
    def cumulative_weight(self) -> tuple[Number, ...]:
        acc: list[Number] = [0]
        for w in self.weights:
            acc.append(acc[-1] + w)
        return tuple(acc)

    @property
    def total_weight(self) -> Number:
        return sum(self.weights, 0)

    @property
    def is_simple(self) -> bool:
        return len(set(self.nodes)) == len(self.nodes)

    def prefix(self, t: int) -> "Trajectory":
        """The first ``t`` steps, i.e. nodes ``s_0 .. s_t``."""
        if not 0 <= t <= self.T:
            raise InputError(f"prefix length {t} outside 0..{self.T}")
        return Trajectory(self.nodes[: t + 1], self.weights[:t])

    def concat(self, other: "Trajectory") -> "Trajectory":
        if other.start != self.end:
            raise InputError("trajectories do not meet")
        return Trajectory(self.nodes + other.nodes[1:], self.weights + other.weights)

    def startswith(self, other: "Trajectory") -> bool:
        return self.nodes[: len(other.nodes)] == other.nodes

    def to_list(self) -> list[int]:
        return list(self.nodes)


def validate_simple(traj: Trajectory) -> bool:
    return traj.is_simple


def shortest_distances(graph: WeightedGraph, target: int) -> dict[int, Number]:
    """Distance from every vertex that can reach ``target`` (Dijkstra on reversed edges)."""
    target = graph.check_vertex(target)
    dist: dict[int, Number] = {target: 0}
    done: set[int] = set()
    heap: list = [(0, target)]
    while heap:
        d, v = heapq.heappop(heap)
        if v in done:
            continue
        done.add(v)
        for u, w in graph.predecessors(v):
            nd = d + w
            if u not in dist or nd < dist[u]:
                dist[u] = nd
                heapq.heappush(heap, (nd, u))
    return dist


def reachable_from(graph: WeightedGraph, source: int, blocked: Iterable[int] = ()) -> set[int]:
    """Vertices reachable from ``source`` without entering ``blocked`` vertices."""
    blocked = set(blocked)
    seen = {source}
    queue = deque([source])
    while queue:
        u = queue.popleft()
        for v, _ in graph.successors(u):
            if v not in seen and v not in blocked:
                seen.add(v)
                queue.append(v)
    return seen


def shortest_path(
    graph: WeightedGraph,
    source: int,
    target: int,
    dist: Mapping[int, Number] | None = None,
    avoid: int | None = None,
) -> Trajectory:
    """Lexicographically smallest shortest path from ``source`` to ``target``.

    When ``avoid`` is given, shortest paths that skip it are preferred; if every
    shortest path passes through it, the returned path stops on reaching it.
    """
    if dist is None:
        dist = shortest_distances(graph, target)
    if source not in dist:
        raise InputError(f"vertex {source} cannot reach {target}")
    clean = None
    if avoid is not None and avoid != target:
        sub = _distances_avoiding(graph, target, avoid)
        clean = {v for v, d in sub.items() if close(d, dist[v])}
    nodes = [source]
    u = source
    while u != target:
        if avoid is not None and u == avoid:
            break
        on_path = [v for v, w in graph.successors(u) if v in dist and close(w + dist[v], dist[u])]
        if clean is not None and u in clean:
            on_path = [v for v in on_path if v in clean]
        u = on_path[0]
        nodes.append(u)
    return Trajectory.from_nodes(graph, nodes)


def _distances_avoiding(graph: WeightedGraph, target: int, avoid: int) -> dict[int, Number]:
    dist: dict[int, Number] = {target: 0}
    done: set[int] = set()
    heap: list = [(0, target)]
    while heap:
        d, v = heapq.heappop(heap)
        if v in done:
            continue
        done.add(v)
        for u, w in graph.predecessors(v):
            if u == avoid:
                continue
            nd = d + w
            if u not in dist or nd < dist[u]:
                dist[u] = nd
                heapq.heappush(heap, (nd, u))
    return dist


# -- grid worlds -------------------------------------------------------------


def _free_cells(rows: int, cols: int, obstacles: Iterable[Cell]) -> list[Cell]:
    blocked = set(obstacles)
    return [(r, c) for r in range(rows) for c in range(cols) if (r, c) not in blocked]


def grid_graph(rows: int, cols: int, obstacles: Iterable[Cell] = ()) -> WeightedGraph:
    """4-connected unit-weight grid; free cells are numbered in row-major order."""
    obstacles = frozenset((int(r), int(c)) for r, c in obstacles)
    for r, c in obstacles:
        if not (0 <= r < rows and 0 <= c < cols):
            raise InputError(f"obstacle {(r, c)} lies outside the grid")
    cells = _free_cells(rows, cols, obstacles)
    if not cells:
        raise InputError("grid has no free cells")
    index = {cell: i for i, cell in enumerate(cells)}
    edges = []
    for (r, c), i in index.items():
        for nb in ((r - 1, c), (r, c - 1), (r, c + 1), (r + 1, c)):
            j = index.get(nb)
            if j is not None:
                edges.append((i, j, 1))
    return WeightedGraph(len(cells), edges, labels=cells, grid=GridLayout(rows, cols, obstacles))


@dataclass(frozen=True)
class GridSpec:
    rows: int
    cols: int
    obstacle_density: float
    start: Cell
    goal1: Cell
    goal2: Cell
    seed: int = 0

    def __post_init__(self):
        if self.rows < 1 or self.cols < 1:
            raise InputError("rows and cols must be positive")
        if not 0 <= self.obstacle_density <= 0.5:
            raise InputError(f"obstacle density {self.obstacle_density} outside [0, 0.5]")
        cells = [tuple(self.start), tuple(self.goal1), tuple(self.goal2)]
        for r, c in cells:
            if not (0 <= r < self.rows and 0 <= c < self.cols):
                raise InputError(f"cell {(r, c)} lies outside the {self.rows}x{self.cols} grid")
        if len(set(cells)) != 3:
            raise InputError("start and both goals must be distinct cells")
        if not 0 <= self.seed < 2**64:
            raise InputError("seed must be a 64-bit unsigned integer")

    @property
    def num_obstacles(self) -> int:
        density = Fraction(repr(float(self.obstacle_density)))
        return math.floor(density * self.rows * self.cols)


def gen_grid(spec: GridSpec, max_attempts: int = 1000) -> WeightedGraph:
    """Random obstacle map with a start-to-goal path for each goal avoiding the other.

    Obstacles are drawn uniformly without replacement from the cells other than
    start and goals; whole maps are rejected until both reachability checks
    pass. The result depends only on ``spec``.
    """
    start, g1, g2 = tuple(spec.start), tuple(spec.goal1), tuple(spec.goal2)
    k = spec.num_obstacles
    candidates = [
        (r, c)
        for r in range(spec.rows)
        for c in range(spec.cols)
        if (r, c) not in (start, g1, g2)
    ]
    if k > len(candidates):
        raise GenerationError("more obstacles requested than free cells")
    rng = np.random.Generator(np.random.PCG64(spec.seed))
    failing = None
    for _ in range(max_attempts):
        picks = rng.choice(len(candidates), size=k, replace=False) if k else []
        obstacles = frozenset(candidates[i] for i in picks)
        graph = grid_graph(spec.rows, spec.cols, obstacles)
        s, a, b = (graph.index_of(x) for x in (start, g1, g2))
        if a not in reachable_from(graph, s, blocked=[b]):
            failing = "start reaches goal1 avoiding goal2"
            continue
        if b not in reachable_from(graph, s, blocked=[a]):
            failing = "start reaches goal2 avoiding goal1"
            continue
        return graph
    raise GenerationError(
        f"no valid map after {max_attempts} attempts; last failing constraint: {failing}"
    )
