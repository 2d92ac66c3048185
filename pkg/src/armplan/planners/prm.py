"""Probabilistic roadmap with best-first shortest-path queries."""

from __future__ import annotations

import heapq

import numpy as np

from .space import ConfigSpace, PlannerConfig, euclidean, sample_uniform


class Roadmap:
    """Undirected graph over configurations with union-find component tracking."""

    def __init__(self, dimension: int, capacity: int = 64):
        self._nodes = np.empty((max(capacity, 1), dimension))
        self.n = 0
        self.adj: list[dict[int, float]] = []
        self._parent: list[int] = []

    def __len__(self):
        return self.n

    @property
    def nodes(self) -> np.ndarray:
        return self._nodes[: self.n]

    def add_node(self, q) -> int:
        if self.n == len(self._nodes):
            grown = np.empty((2 * self.n, self._nodes.shape[1]))
            grown[: self.n] = self._nodes
            self._nodes = grown
        self._nodes[self.n] = q
        self.adj.append({})
        self._parent.append(self.n)
        self.n += 1
        return self.n - 1

    def add_edge(self, i: int, j: int, weight: float | None = None) -> None:
        if weight is None:
            weight = float(euclidean(self._nodes[i], self._nodes[j]))
        self.adj[i][j] = weight
        self.adj[j][i] = weight
        ri, rj = self.find(i), self.find(j)
        if ri != rj:
            self._parent[max(ri, rj)] = min(ri, rj)

    def find(self, i: int) -> int:
        root = i
        while self._parent[root] != root:
            root = self._parent[root]
        while self._parent[i] != root:
            self._parent[i], i = root, self._parent[i]
        return root

    def same_component(self, i: int, j: int) -> bool:
        return self.find(i) == self.find(j)

    def index_of(self, q) -> int | None:
        hits = np.flatnonzero(np.all(self.nodes == q, axis=1))
        return int(hits[0]) if len(hits) else None


def neighbors(space: ConfigSpace, roadmap: Roadmap, i: int, k: int, radius: float) -> list[int]:
    """Up to ``k`` nearest other nodes within ``radius``, closest first (stable on ties)."""
    d = space.distance(roadmap.nodes[i], roadmap.nodes)
    d[i] = np.inf
    order = np.argsort(d, kind="stable")[:k]
    return [int(j) for j in order if d[j] <= radius]


def astar(roadmap: Roadmap, start: int, goal: int) -> list[int] | None:
    """Shortest node sequence by summed edge length, straight-line heuristic."""
    goal_q = roadmap.nodes[goal]
    h = lambda i: float(euclidean(roadmap.nodes[i], goal_q))  # noqa: E731
    g = {start: 0.0}
    came = {start: -1}
    heap = [(h(start), 0, start)]
    counter = 1
    closed = set()
    while heap:
        _, _, i = heapq.heappop(heap)
        if i in closed:
            continue
        if i == goal:
            seq = []
            while i >= 0:
                seq.append(i)
                i = came[i]
            return seq[::-1]
        closed.add(i)
        for j, w in roadmap.adj[i].items():
            cand = g[i] + w
            if cand < g.get(j, np.inf):
                g[j] = cand
                came[j] = i
                heapq.heappush(heap, (cand + h(j), counter, j))
                counter += 1
    return None


def attach(space: ConfigSpace, roadmap: Roadmap, q, k: int, radius: float) -> int:
    """Insert ``q`` (or reuse an identical node) and link it to its visible nearest neighbors."""
    existing = roadmap.index_of(q)
    if existing is not None:
        return existing
    i = roadmap.add_node(q)
    for j in neighbors(space, roadmap, i, k, radius):
        if space.motion_valid(roadmap.nodes[i], roadmap.nodes[j]):
            roadmap.add_edge(i, j)
    return i


def prm_query(roadmap: Roadmap, space: ConfigSpace, q_init, q_goal, k: int = 10, radius: float = np.inf):
    """Shortest roadmap path between two configurations, or None when they are not connected."""
    a = attach(space, roadmap, np.asarray(q_init, dtype=float), k, radius)
    b = attach(space, roadmap, np.asarray(q_goal, dtype=float), k, radius)
    if not roadmap.same_component(a, b):
        return None
    seq = astar(roadmap, a, b)
    return [roadmap.nodes[i].copy() for i in seq]


def prm(space: ConfigSpace, q_init, q_goal, cfg: PlannerConfig, rng, budget):
    p = cfg.prm
    rm = Roadmap(space.dimension, p.num_samples + 2)
    a = attach(space, rm, q_init, p.k_nearest, p.connection_radius)
    b = attach(space, rm, q_goal, p.k_nearest, p.connection_radius)
    # grows until start and goal share a component or the budget runs out;
    # num_samples only sizes the initial storage
    while not rm.same_component(a, b):
        if not budget.next():
            return None, len(rm)
        q = sample_uniform(space, rng)
        if not space.is_valid(q):
            continue
        i = rm.add_node(q)
        # only edges that merge components are checked; the graph stays sparse
        for j in neighbors(space, rm, i, p.k_nearest, p.connection_radius):
            if not rm.same_component(i, j) and space.motion_valid(rm.nodes[i], rm.nodes[j]):
                rm.add_edge(i, j)
    seq = astar(rm, a, b)
    path = [rm.nodes[i].copy() for i in seq]
    path[0], path[-1] = np.array(q_init, dtype=float), np.array(q_goal, dtype=float)
    return path, len(rm)
