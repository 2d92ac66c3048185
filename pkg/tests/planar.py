"""Small 2-D worlds of axis-aligned box obstacles in the unit square."""

import numpy as np

from armplan.planners import ConfigSpace


def box_clearance(P, boxes):
    """Signed distance from points (N, 2) to the nearest box (negative inside)."""
    P = np.atleast_2d(P)
    if len(boxes) == 0:
        return np.full(len(P), np.inf)
    B = np.asarray(boxes, dtype=float)
    c = 0.5 * (B[:, :2] + B[:, 2:])
    h = 0.5 * (B[:, 2:] - B[:, :2])
    q = np.abs(P[:, None, :] - c[None]) - h[None]
    outside = np.linalg.norm(np.maximum(q, 0.0), axis=-1)
    inside = np.minimum(q.max(axis=-1), 0.0)
    return (outside + inside).min(axis=1)


def box_world(boxes, resolution=0.002):
    boxes = [tuple(b) for b in boxes]

    def is_valid(q):
        return bool(box_clearance(q, boxes)[0] > 0)

    def motion_valid(a, b):
        a, b = np.asarray(a, dtype=float), np.asarray(b, dtype=float)
        n = max(1, int(np.ceil(np.abs(b - a).max() / resolution)))
        s = np.arange(n + 1)[:, None] / n
        pts = a + s * (b - a)
        pts[-1] = b
        return bool(np.all(box_clearance(pts, boxes) > 0))

    def clearance(q):
        return float(box_clearance(q, boxes)[0])

    space = ConfigSpace(np.array([[0.0, 1.0], [0.0, 1.0]]), is_valid, motion_valid, clearance)
    space.boxes = boxes
    return space


def wall_world(gap=0.0):
    """A vertical wall across the square, with an optional slot of width ``gap``."""
    if gap == 0:
        return box_world([(0.45, -0.1, 0.55, 1.1)])
    lo, hi = 0.5 - gap / 2, 0.5 + gap / 2
    return box_world([(0.45, -0.1, 0.55, lo), (0.45, hi, 0.55, 1.1)])


def random_instance(rng, n_boxes=6):
    boxes = []
    for _ in range(n_boxes):
        c = rng.uniform(0.15, 0.85, 2)
        h = rng.uniform(0.03, 0.12, 2)
        boxes.append((c[0] - h[0], c[1] - h[1], c[0] + h[0], c[1] + h[1]))
    return boxes


def _cell(p, n):
    return tuple(np.minimum((np.asarray(p) * n).astype(int), n - 1))


def certified_feasible(boxes, start, goal, n=100):
    """True when a chain of entirely free grid cells joins start and goal."""
    from oracles import grid_connected, grid_free_cells

    free = grid_free_cells(None, n, True, lambda P: box_clearance(P, boxes))
    return grid_connected(free, _cell(start, n), _cell(goal, n), eight=False)


def certified_infeasible(boxes, start, goal, n=100):
    """True when no chain of even partly free cells joins start and goal."""
    from oracles import grid_connected, grid_free_cells

    free = grid_free_cells(None, n, False, lambda P: box_clearance(P, boxes))
    return not grid_connected(free, _cell(start, n), _cell(goal, n), eight=True)


def feasible_instances(seed, count):
    """Random box worlds with start on the left and goal on the right, grid-certified feasible."""
    rng = np.random.default_rng(seed)
    out = []
    while len(out) < count:
        boxes = random_instance(rng)
        start = np.array([rng.uniform(0.02, 0.12), rng.uniform(0.05, 0.95)])
        goal = np.array([rng.uniform(0.88, 0.98), rng.uniform(0.05, 0.95)])
        if box_clearance(np.array([start, goal]), boxes).min() <= 0:
            continue
        if certified_feasible(boxes, start, goal):
            out.append((boxes, start, goal))
    return out
