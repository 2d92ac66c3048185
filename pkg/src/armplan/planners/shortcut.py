"""Randomized shortcutting of piecewise-linear joint-space paths."""

from __future__ import annotations

import numpy as np

from .space import ConfigSpace, path_length


def _point_at(P, cum, s):
    k = int(np.searchsorted(cum, s, side="right")) - 1
    k = min(max(k, 0), len(P) - 2)
    seg = cum[k + 1] - cum[k]
    w = 0.0 if seg == 0 else (s - cum[k]) / seg
    return k, P[k] + w * (P[k + 1] - P[k])


def _dedupe(points):
    out = [points[0]]
    for p in points[1:]:
        if not np.array_equal(p, out[-1]):
            out.append(p)
    return out


def shortcut(path, space: ConfigSpace, max_attempts: int, rng) -> list:
    """Replace random stretches of the path by straight segments when that is no longer and valid.

    Each attempt either joins two existing via-points, dropping the ones in
    between, or joins two random points on the path. In the second case the
    pieces leading to and from the cut points are re-checked too, so the result
    stays valid at the checker's resolution.
    """
    path = _dedupe([np.array(p, dtype=float) for p in path])
    for _ in range(max_attempts):
        if len(path) < 3:
            break
        if rng.random() < 0.5:
            i, j = np.sort(rng.choice(len(path), 2, replace=False))
            if j - i < 2:
                continue
            candidate = path[: i + 1] + path[j:]
            if path_length(candidate) <= path_length(path) and space.motion_valid(path[i], path[j]):
                path = candidate
            continue
        P = np.array(path)
        cum = np.concatenate([[0.0], np.cumsum(np.linalg.norm(np.diff(P, axis=0), axis=1))])
        s1, s2 = np.sort(rng.uniform(0.0, cum[-1], 2))
        i, a = _point_at(P, cum, s1)
        j, b = _point_at(P, cum, s2)
        if i == j:
            continue
        candidate = _dedupe(path[: i + 1] + [a, b] + path[j + 1 :])
        if path_length(candidate) >= path_length(path):
            continue
        if not space.motion_valid(a, b):
            continue
        if not (space.motion_valid(path[i], a) and space.motion_valid(b, path[j + 1])):
            continue
        path = candidate
    return path
