"""Configuration spaces, planner settings and results shared by all planners."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np


def max_norm(a, b) -> np.ndarray:
    """Chebyshev distance in joint space; broadcasts over leading axes."""
    return np.max(np.abs(np.asarray(a) - np.asarray(b)), axis=-1)


def euclidean(a, b) -> np.ndarray:
    return np.linalg.norm(np.asarray(a) - np.asarray(b), axis=-1)


@dataclass
class ConfigSpace:
    """Box-bounded joint space with validity and motion predicates.

    ``distance`` must broadcast a single point against a stack of points.
    """

    bounds: np.ndarray  # (d, 2)
    is_valid: Callable[[np.ndarray], bool]
    motion_valid: Callable[[np.ndarray, np.ndarray], bool]
    clearance: Callable[[np.ndarray], float] | None = None
    distance: Callable = max_norm

    def __post_init__(self):
        b = np.asarray(self.bounds, dtype=float)
        if b.ndim != 2 or b.shape[1] != 2:
            raise ValueError("bounds must have shape (dimension, 2)")
        if not np.all(np.isfinite(b)):
            raise ValueError("bounds must be finite")
        if np.any(b[:, 0] > b[:, 1]):
            raise ValueError("each lower bound must not exceed its upper bound")
        self.bounds = b

    @property
    def dimension(self) -> int:
        return self.bounds.shape[0]

    def within_bounds(self, q) -> bool:
        q = np.asarray(q)
        return bool(np.all(q >= self.bounds[:, 0]) and np.all(q <= self.bounds[:, 1]))

    def check_dimension(self, q) -> np.ndarray:
        q = np.asarray(q, dtype=float)
        if q.shape != (self.dimension,):
            raise ValueError(f"expected a {self.dimension}-vector, got shape {q.shape}")
        return q


def sample_uniform(space: ConfigSpace, rng: np.random.Generator) -> np.ndarray:
    return rng.uniform(space.bounds[:, 0], space.bounds[:, 1])


def steer(q_from, q_to, step: float, distance: Callable = max_norm) -> np.ndarray:
    """Move from ``q_from`` toward ``q_to`` by at most ``step`` in the given metric."""
    if step <= 0:
        raise ValueError("step must be positive")
    q_from = np.asarray(q_from, dtype=float)
    q_to = np.asarray(q_to, dtype=float)
    d = float(distance(q_from, q_to))
    if d <= step:
        return q_to.copy()
    return q_from + (step / d) * (q_to - q_from)


def path_length(path) -> float:
    """Euclidean joint-space length of a polyline."""
    P = np.asarray(path, dtype=float)
    if len(P) < 2:
        return 0.0
    return float(np.linalg.norm(np.diff(P, axis=0), axis=1).sum())


@dataclass(frozen=True)
class BiTRRTParams:
    temp_init: float = 0.1
    temp_change_factor: float = 2.0
    cost_threshold: float = np.inf
    frontier_ratio: float = 0.1
    use_clearance_cost: bool = True


@dataclass(frozen=True)
class PRMParams:
    num_samples: int = 1000
    connection_radius: float = np.inf
    k_nearest: int = 10


@dataclass(frozen=True)
class PlannerConfig:
    step_size: float = 0.2
    goal_bias: float = 0.05
    max_iterations: int = 100_000
    timeout: float = 5.0
    rng_seed: int = 0
    simplify: bool = True
    shortcut_attempts: int = 200
    bitrrt: BiTRRTParams = field(default_factory=BiTRRTParams)
    prm: PRMParams = field(default_factory=PRMParams)

    def __post_init__(self):
        if not self.step_size > 0:
            raise ValueError("step_size must be positive")
        if not 0.0 <= self.goal_bias <= 1.0:
            raise ValueError("goal_bias must lie in [0, 1]")
        if not self.timeout > 0:
            raise ValueError("timeout must be positive")
        if self.max_iterations < 0:
            raise ValueError("max_iterations must be non-negative")
        if self.bitrrt.temp_init <= 0 or self.bitrrt.temp_change_factor <= 1:
            raise ValueError("BiTRRT needs temp_init > 0 and temp_change_factor > 1")
        if self.prm.num_samples < 1 or self.prm.k_nearest < 1:
            raise ValueError("PRM needs at least one sample and one neighbor")


@dataclass(frozen=True)
class PlanQuery:
    q_init: np.ndarray
    q_goal: np.ndarray
    name: str = ""


@dataclass
class PathResult:
    success: bool
    via_points: list = field(default_factory=list)
    stats: dict = field(default_factory=dict)
    reason: str = ""

    @property
    def via_point_count(self) -> int:
        return len(self.via_points)


class InvalidQuery(ValueError):
    """The query itself is unusable, as opposed to a search that found nothing."""
