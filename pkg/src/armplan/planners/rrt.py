"""Goal-biased RRT and RRT-Connect."""

from __future__ import annotations

import numpy as np

from .space import ConfigSpace, PlannerConfig, sample_uniform, steer
from .tree import Tree

TRAPPED, ADVANCED, REACHED = 0, 1, 2


class SearchBudget:
    """Tracks iterations, deadline and cooperative cancellation for one search."""

    def __init__(self, cfg: PlannerConfig, timer, cancel=None):
        self.timer = timer
        self.deadline = timer() + cfg.timeout
        self.max_iterations = cfg.max_iterations
        self.cancel = cancel
        self.iterations = 0
        self.reason = ""

    def next(self) -> bool:
        if self.cancel is not None and self.cancel.is_set():
            self.reason = "cancelled"
            return False
        if self.iterations >= self.max_iterations:
            self.reason = "iteration limit reached"
            return False
        if self.timer() >= self.deadline:
            self.reason = "timeout"
            return False
        self.iterations += 1
        return True


def rrt(space: ConfigSpace, q_init, q_goal, cfg: PlannerConfig, rng, budget: SearchBudget):
    tree = Tree(q_init, space.distance)
    while budget.next():
        q_rand = q_goal if rng.random() < cfg.goal_bias else sample_uniform(space, rng)
        near = tree.nearest(q_rand)
        q_new = steer(tree[near], q_rand, cfg.step_size, space.distance)
        # the motion check covers both endpoints
        if not space.motion_valid(tree[near], q_new):
            continue
        i = tree.add(q_new, near)
        if np.array_equal(q_new, q_goal):
            return tree.branch(i), len(tree)
        if space.distance(q_new, q_goal) <= cfg.step_size and space.motion_valid(q_new, q_goal):
            j = tree.add(q_goal, i)
            return tree.branch(j), len(tree)
    return None, len(tree)


def _extend(space, tree: Tree, q_target, step):
    near = tree.nearest(q_target)
    q_new = steer(tree[near], q_target, step, space.distance)
    if not space.motion_valid(tree[near], q_new):
        return TRAPPED, -1
    i = tree.add(q_new, near)
    return (REACHED if np.array_equal(q_new, q_target) else ADVANCED), i


def join(tree_a: Tree, ia: int, tree_b: Tree, ib: int, a_is_start: bool) -> list:
    """Splice two trees meeting at equal nodes ``ia`` and ``ib`` into a start-to-goal path."""
    head = tree_a.branch(ia)
    tail = tree_b.branch(ib)[::-1][1:]
    path = head + tail
    return path if a_is_start else path[::-1]


def rrt_connect(space: ConfigSpace, q_init, q_goal, cfg: PlannerConfig, rng, budget: SearchBudget):
    ta, tb = Tree(q_init, space.distance), Tree(q_goal, space.distance)
    a_is_start = True
    while budget.next():
        q_rand = sample_uniform(space, rng)
        status, ia = _extend(space, ta, q_rand, cfg.step_size)
        if status != TRAPPED:
            target = ta[ia].copy()
            status_b = ADVANCED
            while status_b == ADVANCED:
                status_b, ib = _extend(space, tb, target, cfg.step_size)
            if status_b == REACHED:
                return join(ta, ia, tb, ib, a_is_start), len(ta) + len(tb)
        ta, tb = tb, ta
        a_is_start = not a_is_start
    return None, len(ta) + len(tb)
