"""Bidirectional transition-based RRT with a clearance cost map."""

from __future__ import annotations

import math

import numpy as np

from .rrt import ADVANCED, REACHED, TRAPPED, SearchBudget, join
from .space import ConfigSpace, PlannerConfig, sample_uniform, steer
from .tree import Tree

CLEARANCE_OFFSET = 0.05


def transition_test(cost_parent: float, cost_child: float, temperature: float, factor: float, rng) -> tuple[bool, float]:
    """Accept or reject a step on the cost map; returns (accepted, new temperature).

    Downhill and flat steps are always accepted and leave the temperature alone.
    """
    if temperature <= 0:
        raise ValueError("temperature must be positive")
    if cost_child <= cost_parent:
        return True, temperature
    if rng.random() < math.exp(-(cost_child - cost_parent) / temperature):
        return True, temperature / factor
    return False, temperature * factor


def clearance_cost(space: ConfigSpace, use_clearance: bool = True):
    """Cost map c(q) = 1 / (clearance + offset), or constant 1 without a clearance function.

    The returned function gives None for configurations known to be in collision.
    """
    if space.clearance is None or not use_clearance:
        return lambda q: 1.0

    def cost(q):
        c = float(space.clearance(q))
        return None if c <= 0 else 1.0 / (c + CLEARANCE_OFFSET)

    return cost


class _CostTree(Tree):
    def __init__(self, root, distance, cost, temperature):
        super().__init__(root, distance)
        self.costs[0] = cost
        self.temperature = temperature
        self.frontier = 1
        self.nonfrontier = 1


def _extend(space, tree: _CostTree, q_target, cfg: PlannerConfig, cost_fn, rng, frontier_control: bool):
    p = cfg.bitrrt
    near = tree.nearest(q_target)
    q_near = tree[near]
    q_new = steer(q_near, q_target, cfg.step_size, space.distance)
    reached = np.array_equal(q_new, q_target)
    # short steps that just land on the sample are rationed against frontier steps
    if frontier_control and reached and tree.nonfrontier / tree.frontier > p.frontier_ratio:
        return TRAPPED, -1
    c_new = cost_fn(q_new)
    if c_new is None or c_new > p.cost_threshold:
        return TRAPPED, -1
    ok, tree.temperature = transition_test(tree.costs[near], c_new, tree.temperature, p.temp_change_factor, rng)
    if not ok or not space.motion_valid(q_near, q_new):
        return TRAPPED, -1
    if frontier_control:
        if reached:
            tree.nonfrontier += 1
        else:
            tree.frontier += 1
    i = tree.add(q_new, near, c_new)
    return (REACHED if reached else ADVANCED), i


def bitrrt(space: ConfigSpace, q_init, q_goal, cfg: PlannerConfig, rng, budget: SearchBudget):
    cost_fn = clearance_cost(space, cfg.bitrrt.use_clearance_cost)
    T0 = cfg.bitrrt.temp_init
    ta = _CostTree(q_init, space.distance, cost_fn(q_init), T0)
    tb = _CostTree(q_goal, space.distance, cost_fn(q_goal), T0)
    a_is_start = True
    while budget.next():
        q_rand = sample_uniform(space, rng)
        status, ia = _extend(space, ta, q_rand, cfg, cost_fn, rng, True)
        if status != TRAPPED:
            # greedy connect of the other tree, still filtered by the cost map
            target = ta[ia].copy()
            status_b = ADVANCED
            while status_b == ADVANCED:
                status_b, ib = _extend(space, tb, target, cfg, cost_fn, rng, False)
            if status_b == REACHED:
                return join(ta, ia, tb, ib, a_is_start), len(ta) + len(tb)
        ta, tb = tb, ta
        a_is_start = not a_is_start
    return None, len(ta) + len(tb)
