"""Planner registry and the common entry point."""

from __future__ import annotations

import threading
import time

import numpy as np

from .bitrrt import bitrrt
from .prm import prm
from .rrt import SearchBudget, rrt, rrt_connect
from .shortcut import shortcut
from .space import ConfigSpace, InvalidQuery, PathResult, PlannerConfig, PlanQuery

ALGORITHMS = {"rrt": rrt, "rrtconnect": rrt_connect, "bitrrt": bitrrt, "prm": prm}

_calls = 0
_calls_lock = threading.Lock()


def register_algorithm(name: str, fn) -> None:
    """Add a search routine with the signature ``fn(space, q_init, q_goal, cfg, rng, budget)``."""
    ALGORITHMS[name.lower()] = fn


def plan_call_count() -> int:
    """Number of ``plan`` invocations in this process."""
    return _calls


def _count_call():
    global _calls
    with _calls_lock:
        _calls += 1


def plan(algorithm: str, space: ConfigSpace, query: PlanQuery, cfg: PlannerConfig | None = None,
         cancel=None, timer=time.perf_counter) -> PathResult:
    """Plan from ``query.q_init`` to ``query.q_goal``.

    Raises InvalidQuery when the start is unusable. Search failures come back as
    ``PathResult(success=False)`` with a reason.
    """
    _count_call()
    cfg = cfg or PlannerConfig()
    try:
        search = ALGORITHMS[algorithm.lower()]
    except KeyError:
        raise ValueError(f"unknown algorithm {algorithm!r}; known: {sorted(ALGORITHMS)}") from None
    try:
        q_init = space.check_dimension(query.q_init).copy()
        q_goal = space.check_dimension(query.q_goal).copy()
    except ValueError as exc:
        raise InvalidQuery(str(exc)) from None
    if not space.within_bounds(q_init) or not space.is_valid(q_init):
        raise InvalidQuery("q_init is out of bounds or in collision")
    if not space.within_bounds(q_goal):
        raise InvalidQuery("q_goal is out of bounds")

    stats = {"plan_time": 0.0, "simplify_time": 0.0, "iterations": 0, "tree_or_graph_size": 1, "via_point_count": 0}
    if np.array_equal(q_init, q_goal):
        stats["via_point_count"] = 1
        return PathResult(True, [q_init], stats)
    if not space.is_valid(q_goal):
        return PathResult(False, [], stats, "q_goal is in collision")

    rng = np.random.default_rng(cfg.rng_seed)
    t0 = timer()
    budget = SearchBudget(cfg, timer, cancel)
    path, size = search(space, q_init, q_goal, cfg, rng, budget)
    stats["plan_time"] = timer() - t0
    stats["iterations"] = budget.iterations
    stats["tree_or_graph_size"] = size
    if path is None:
        return PathResult(False, [], stats, budget.reason or "no path found")
    if cfg.simplify:
        t1 = timer()
        path = shortcut(path, space, cfg.shortcut_attempts, rng)
        stats["simplify_time"] = timer() - t1
    path[0], path[-1] = q_init.copy(), q_goal.copy()
    stats["via_point_count"] = len(path)
    return PathResult(True, path, stats)


def revalidate(space: ConfigSpace, path) -> bool:
    """Independent re-check of every via-point and every segment of a returned path."""
    if len(path) == 0:
        return False
    if not all(space.within_bounds(q) and space.is_valid(q) for q in path):
        return False
    return all(space.motion_valid(a, b) for a, b in zip(path, path[1:]))
