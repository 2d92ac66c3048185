"""End-to-end drivers for the two mobility schemes in the car-interior scene."""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .armspace import arm_config_space
from .collision import RobotCollisionModel
from .executor import (
    ExecutionLog,
    PlanCache,
    SceneMonitor,
    SimClock,
    SupervisorResult,
    build_cache,
    script_publisher,
    serve_cached_goals,
    supervise_inside,
)
from .kinematics import end_effector, load_robot
from .mannequin import MotionScript, load_script, workspace_sphere
from .planners import PlannerConfig, PlanQuery, plan_call_count
from .scenes import SceneDescription, bundled_path, load_scene


def load_positions(path=None) -> dict[str, np.ndarray]:
    path = bundled_path("safe_positions.json") if path is None else Path(path)
    return {k: np.array(v, dtype=float) for k, v in json.loads(Path(path).read_text()).items()}


def load_goals(path=None) -> list[str]:
    """One position name per line; blank lines and '#' comments are skipped."""
    path = bundled_path("goals.txt") if path is None else Path(path)
    lines = (ln.split("#", 1)[0].strip() for ln in Path(path).read_text().splitlines())
    return [ln for ln in lines if ln]


def load_query(path=None) -> PlanQuery:
    path = bundled_path("scheme2_query.json") if path is None else Path(path)
    d = json.loads(Path(path).read_text())
    return PlanQuery(np.array(d["q_init"], dtype=float), np.array(d["q_goal"], dtype=float), d.get("name", ""))


def sphere_margins(model, scene: SceneDescription, configs) -> np.ndarray:
    """Signed distance of the end-effector to the workspace sphere surface (positive outside)."""
    sphere = workspace_sphere(scene.mannequin)
    pts = np.array([end_effector(model, q).translation for q in configs])
    return np.linalg.norm(pts - sphere.center, axis=1) - sphere.radius


@dataclass
class Scheme1Result:
    cache: PlanCache
    log: ExecutionLog
    cold: bool  # the cache was built in this run
    planner_calls_build: int
    planner_calls_serve: int


def demo_scheme1(scene: SceneDescription | None = None, safe_positions=None, goals=None, cache_path=None,
                 cfg: PlannerConfig | None = None, algorithm: str = "bitrrt") -> Scheme1Result:
    """Build or load the safe-position cache, then serve the goal stream from home.

    The cache file is reused when it exists and covers the same safe positions.
    """
    scene = load_scene() if scene is None else scene
    safe = load_positions() if safe_positions is None else safe_positions
    goals = load_goals() if goals is None else list(goals)
    model = load_robot()
    cmodel = RobotCollisionModel.from_robot(model)
    calls0 = plan_call_count()
    cache = None
    if cache_path is not None and Path(cache_path).exists():
        cache = PlanCache.load(cache_path)
        same = set(cache.safe_positions) == set(safe) and all(
            np.array_equal(cache.safe_positions[k], np.asarray(safe[k], dtype=float)) for k in safe)
        if not same:
            cache = None
    cold = cache is None
    if cold:
        space = arm_config_space(model, cmodel, scene.snapshot(user=True, sphere=True))
        cache = build_cache(space, safe, cfg, algorithm)
        if cache_path is not None:
            cache.save(cache_path)
    calls1 = plan_call_count()
    log = serve_cached_goals(cache, goals, SimClock(), model.velocity_limits, model.acceleration_limits)
    return Scheme1Result(cache, log, cold, calls1 - calls0, plan_call_count() - calls1)


@dataclass
class Scheme2Result:
    supervisor: SupervisorResult
    monitor: SceneMonitor
    query: PlanQuery


def demo_scheme2(scene: SceneDescription | None = None, script: MotionScript | None = None,
                 query: PlanQuery | None = None, cfg: PlannerConfig | None = None, speed_scale: float = 0.25,
                 algorithm: str = "bitrrt", max_replans: int = 10) -> Scheme2Result:
    """Supervised slow motion inside the user's workspace while the scripted mannequin moves."""
    scene = load_scene() if scene is None else scene
    script = load_script(bundled_path("mannequin_adversarial.csv")) if script is None else script
    query = load_query() if query is None else query
    model = load_robot()
    cmodel = RobotCollisionModel.from_robot(model)
    monitor = SceneMonitor(scene.snapshot(cfg=script.configs[0]))
    spaces = {}

    def space_for(snap):
        if snap.version not in spaces:
            spaces.clear()
            spaces[snap.version] = arm_config_space(model, cmodel, snap)
        return spaces[snap.version]

    res = supervise_inside(space_for, query, cfg or PlannerConfig(), monitor, SimClock(), model.velocity_limits,
                           model.acceleration_limits, speed_scale, algorithm, max_replans,
                           on_tick=script_publisher(monitor, scene, script))
    return Scheme2Result(res, monitor, query)
