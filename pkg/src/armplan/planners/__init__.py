"""Sampling-based planners over predicate-defined configuration spaces."""

from .bitrrt import clearance_cost, transition_test
from .core import ALGORITHMS, plan, plan_call_count, register_algorithm, revalidate
from .prm import Roadmap, astar, attach, prm_query
from .shortcut import shortcut
from .space import (
    BiTRRTParams,
    ConfigSpace,
    InvalidQuery,
    PathResult,
    PlannerConfig,
    PlanQuery,
    PRMParams,
    euclidean,
    max_norm,
    path_length,
    sample_uniform,
    steer,
)

__all__ = [
    "ALGORITHMS", "BiTRRTParams", "ConfigSpace", "InvalidQuery", "PathResult", "PlannerConfig", "PlanQuery",
    "PRMParams", "Roadmap", "astar", "attach", "clearance_cost", "euclidean", "max_norm", "path_length", "plan",
    "plan_call_count", "prm_query", "register_algorithm", "revalidate", "sample_uniform", "shortcut", "steer",
    "transition_test",
]
