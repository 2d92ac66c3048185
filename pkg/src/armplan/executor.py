"""Simulated execution, the safe-position plan cache and the in-workspace supervisor."""

from __future__ import annotations

import csv
import json
import threading
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Callable, NamedTuple

import numpy as np

from .collision import SceneSnapshot
from .mannequin import MotionScript, config_at
from .planners import ConfigSpace, InvalidQuery, PathResult, PlannerConfig, PlanQuery, plan
from .scenes import SceneDescription
from .trajectory import Trajectory, executed_split, sample_at, time_parameterize

TICK = 0.01
EVENTS = (
    "advance", "stop", "replan_started", "replan_done", "goal_reached", "goal_updated",
    "idle", "error", "aborted",
)


class SimClock:
    """Integer tick counter; time is always ``tick * dt`` so no rounding drifts in."""

    def __init__(self, dt: float = TICK, tick: int = 0):
        if dt <= 0:
            raise ValueError("dt must be positive")
        self.dt = dt
        self.tick = tick

    @property
    def now(self) -> float:
        return self.tick * self.dt

    def advance(self, n: int = 1) -> None:
        self.tick += n


@dataclass(frozen=True)
class Event:
    t: float
    tick: int
    kind: str
    version: int
    q: np.ndarray
    qdot: np.ndarray
    note: str = ""


@dataclass
class ExecutionLog:
    events: list[Event] = field(default_factory=list)
    executed: list[tuple[str, str]] = field(default_factory=list)

    def add(self, clock: SimClock, kind: str, q, qdot=None, version: int = 0, note: str = "") -> Event:
        if kind not in EVENTS:
            raise ValueError(f"unknown event kind {kind!r}")
        if self.events and clock.tick < self.events[-1].tick:
            raise ValueError("log times must be non-decreasing")
        q = np.array(q, dtype=float)
        ev = Event(clock.now, clock.tick, kind, version, q, np.zeros_like(q) if qdot is None else np.array(qdot, dtype=float), note)
        self.events.append(ev)
        return ev

    def of(self, kind: str) -> list[Event]:
        return [e for e in self.events if e.kind == kind]

    def kinds(self) -> list[str]:
        return [e.kind for e in self.events]

    def write_csv(self, path) -> None:
        n = len(self.events[0].q) if self.events else 6
        with open(Path(path), "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["t", "event", "version"] + [f"q{i}" for i in range(1, n + 1)])
            for e in self.events:
                w.writerow([repr(e.t), e.kind, e.version] + [repr(float(v)) for v in e.q])


# --------------------------------------------------------------------------
# execution


def execute_strict(traj: Trajectory, clock: SimClock, log: ExecutionLog | None = None, version: int = 0) -> ExecutionLog:
    """Run the whole trajectory tick by tick; ends at rest on the last via-point."""
    log = ExecutionLog() if log is None else log
    return execute_preemptible(traj, clock, None, log, version).log


class PreemptibleOutcome(NamedTuple):
    log: ExecutionLog
    prefix: list
    suffix: list
    new_goal: object = None


def execute_preemptible(traj: Trajectory, clock: SimClock, signal: Callable | None = None,
                        log: ExecutionLog | None = None, version: int = 0) -> PreemptibleOutcome:
    """Execute until done or until ``signal(t_local)`` returns a new goal.

    On preemption the robot halts at the current tick and the trajectory is
    split there; the caller replans from ``prefix[-1]``.
    """
    log = ExecutionLog() if log is None else log
    dt = clock.dt
    i = 0
    while True:
        t = i * dt
        if t >= traj.total_duration:
            break
        if signal is not None:
            goal = signal(t)
            if goal is not None:
                prefix, suffix = executed_split(traj, t)
                log.add(clock, "goal_updated", prefix[-1], version=version)
                log.add(clock, "stop", prefix[-1], version=version)
                return PreemptibleOutcome(log, prefix, suffix, goal)
        s = sample_at(traj, t)
        log.add(clock, "advance", s.q, s.qdot, version)
        clock.advance()
        i += 1
    end = traj.via_points[-1]
    log.add(clock, "goal_reached", end, version=version)
    return PreemptibleOutcome(log, [q.copy() for q in traj.via_points], [end.copy()])


# --------------------------------------------------------------------------
# scene monitor


class SceneMonitor:
    """Holds the latest snapshot; one writer publishes, readers grab the reference."""

    def __init__(self, snapshot: SceneSnapshot, time: float = 0.0):
        self._snapshot = snapshot
        self._lock = threading.Lock()
        self.updates: list[tuple[int, float]] = [(snapshot.version, time)]
        # every published snapshot by version, so audits can replay what each tick saw
        self.history: dict[int, SceneSnapshot] = {snapshot.version: snapshot}

    def current(self) -> SceneSnapshot:
        # a single reference read; snapshots themselves are immutable
        return self._snapshot

    @property
    def version(self) -> int:
        return self._snapshot.version

    def publish(self, bodies, time: float) -> int:
        with self._lock:
            snap = SceneSnapshot(bodies, self._snapshot.version + 1)
            self._snapshot = snap
            self.updates.append((snap.version, time))
            self.history[snap.version] = snap
            return snap.version


def publish_scene(monitor: SceneMonitor, bodies, time: float) -> int:
    return monitor.publish(bodies, time)


def script_publisher(monitor: SceneMonitor, scene: SceneDescription, script: MotionScript,
                     sphere: bool = False) -> Callable[[float], None]:
    """Tick callback that publishes the scene with the mannequin posed by ``script`` at time t."""

    def on_tick(t: float) -> None:
        snap = scene.snapshot(cfg=config_at(script, t), sphere=sphere)
        monitor.publish(snap.bodies, t)

    return on_tick


# --------------------------------------------------------------------------
# scheme 1: cached plans between safe positions


@dataclass(frozen=True)
class PlanCacheEntry:
    init_pos_id: str
    goal_pos_id: str
    plan: PathResult


@dataclass
class PlanCache:
    safe_positions: dict[str, np.ndarray]
    entries: list[PlanCacheEntry] = field(default_factory=list)

    def __post_init__(self):
        self._index = {(e.init_pos_id, e.goal_pos_id): e for e in self.entries}

    def add(self, entry: PlanCacheEntry) -> None:
        self.entries.append(entry)
        self._index[(entry.init_pos_id, entry.goal_pos_id)] = entry

    def get(self, init_id: str, goal_id: str) -> PlanCacheEntry | None:
        return self._index.get((init_id, goal_id))

    def to_dict(self) -> dict:
        return {
            "safe_positions": {k: [float(x) for x in v] for k, v in self.safe_positions.items()},
            "entries": [
                {
                    "init_pos_id": e.init_pos_id,
                    "goal_pos_id": e.goal_pos_id,
                    "via_points": [[float(x) for x in q] for q in e.plan.via_points],
                }
                for e in self.entries
            ],
        }

    @classmethod
    def from_dict(cls, data: dict) -> PlanCache:
        safe = {k: np.array(v, dtype=float) for k, v in data["safe_positions"].items()}
        entries = []
        for e in data["entries"]:
            via = [np.array(q, dtype=float) for q in e["via_points"]]
            entries.append(PlanCacheEntry(e["init_pos_id"], e["goal_pos_id"],
                                          PathResult(True, via, {"via_point_count": len(via)})))
        return cls(safe, entries)

    def save(self, path) -> None:
        # json writes floats with repr, which round-trips exactly
        Path(path).write_text(json.dumps(self.to_dict(), indent=1) + "\n")

    @classmethod
    def load(cls, path) -> PlanCache:
        return cls.from_dict(json.loads(Path(path).read_text()))


class CacheBuildError(RuntimeError):
    def __init__(self, pairs):
        self.pairs = list(pairs)
        super().__init__("no plan found for " + ", ".join(f"{a}->{b}" for a, b in self.pairs))


class CacheMiss(KeyError):
    pass


def build_cache(space: ConfigSpace, safe_positions: dict, cfg: PlannerConfig | None = None,
                algorithm: str = "bitrrt") -> PlanCache:
    """Plan every ordered pair of distinct safe positions.

    ``space`` must already treat the workspace sphere as an obstacle, so a
    valid safe position is automatically outside it.
    """
    cfg = cfg or PlannerConfig()
    names = list(safe_positions)
    for name in names:
        if not space.is_valid(np.asarray(safe_positions[name], dtype=float)):
            raise ValueError(f"safe position {name!r} is in collision or inside the workspace sphere")
    cache = PlanCache({k: np.array(v, dtype=float) for k, v in safe_positions.items()})
    failed = []
    pair = 0
    for i in names:
        for j in names:
            if i == j:
                continue
            query = PlanQuery(cache.safe_positions[i], cache.safe_positions[j], f"{i}->{j}")
            res = plan(algorithm, space, query, replace(cfg, rng_seed=cfg.rng_seed + pair))
            pair += 1
            if res.success:
                cache.add(PlanCacheEntry(i, j, res))
            else:
                failed.append((i, j))
    if failed:
        raise CacheBuildError(failed)
    return cache


def lookup(cache: PlanCache, init_id: str, goal_id: str) -> PathResult:
    entry = cache.get(init_id, goal_id)
    if entry is None:
        raise CacheMiss(f"no cached plan {init_id!r} -> {goal_id!r}")
    return entry.plan


def serve_cached_goals(cache: PlanCache, goals, clock: SimClock, v_max, a_max, start: str = "home",
                       speed_scale: float = 1.0, log: ExecutionLog | None = None) -> ExecutionLog:
    """Serve a stream of requested safe positions from the cache, starting at ``start``.

    A request for the current position idles; an uncached transition is logged
    as an error and leaves the robot where it is. No planner is ever called.
    """
    log = ExecutionLog() if log is None else log
    if start not in cache.safe_positions:
        raise CacheMiss(f"unknown start position {start!r}")
    current = start
    for goal in goals:
        here = cache.safe_positions[current]
        if goal == current:
            log.add(clock, "idle", here, note=goal)
            continue
        entry = cache.get(current, goal)
        if entry is None:
            log.add(clock, "error", here, note=f"no cached plan {current}->{goal}")
            continue
        log.add(clock, "goal_updated", here, note=goal)
        traj = time_parameterize(entry.plan.via_points, v_max, a_max, speed_scale)
        execute_strict(traj, clock, log)
        log.executed.append((current, goal))
        current = goal
    return log


# --------------------------------------------------------------------------
# scheme 2: supervised motion near the user


def _first_invalid(space: ConfigSpace, path) -> int | None:
    checker = getattr(space, "checker", None)
    if checker is not None:
        return checker.first_invalid(path, 0)
    if not space.is_valid(path[0]):
        return 0
    for i in range(1, len(path)):
        if not space.motion_valid(path[i - 1], path[i]):
            return i
    return None


@dataclass
class SupervisorResult:
    log: ExecutionLog
    success: bool
    replans: int
    executed: list = field(default_factory=list)  # configuration at every tick
    checked_versions: list = field(default_factory=list)
    reason: str = ""


def supervise_inside(space_for: Callable[[SceneSnapshot], ConfigSpace], query: PlanQuery, cfg: PlannerConfig,
                     monitor: SceneMonitor, clock: SimClock, v_max, a_max, speed_scale: float = 0.25,
                     algorithm: str = "bitrrt", max_replans: int = 10,
                     on_tick: Callable[[float], None] | None = None) -> SupervisorResult:
    """Plan, execute slowly and re-check the rest of the path against every new snapshot.

    Each tick: let ``on_tick`` publish the scene, read the latest snapshot,
    validate the current configuration plus the remaining via-points, and on
    a hit stop in place and replan from there toward the same goal.
    """
    if not 0 < speed_scale < 1:
        raise ValueError("supervised motion needs 0 < speed_scale < 1")
    log = ExecutionLog()
    out = SupervisorResult(log, False, 0)
    goal = np.asarray(query.q_goal, dtype=float)
    q = np.asarray(query.q_init, dtype=float)
    attempts = 0

    def replan(snap, q_from):
        nonlocal attempts
        space = space_for(snap)
        try:
            res = plan(algorithm, space, PlanQuery(q_from, goal), replace(cfg, rng_seed=cfg.rng_seed + attempts))
        except InvalidQuery as exc:
            res = PathResult(False, [], {}, str(exc))
        attempts += 1
        if not res.success:
            return time_parameterize([q_from], v_max, a_max, speed_scale), res.reason
        return time_parameterize(res.via_points, v_max, a_max, speed_scale), ""

    if on_tick is not None:
        on_tick(clock.now)
    snap = monitor.current()
    log.add(clock, "goal_updated", q, version=snap.version)
    traj, why = replan(snap, q)
    planned = not why
    i = 0
    while True:
        if i > 0 and on_tick is not None:
            on_tick(clock.now)
        snap = monitor.current()
        t = min(i * clock.dt, traj.total_duration)
        s = sample_at(traj, t)
        q = s.q
        _, rest = executed_split(traj, t)
        if planned:
            bad = _first_invalid(space_for(snap), rest)
        else:
            bad = 0
        if bad is not None:
            if planned:
                log.add(clock, "stop", q, version=snap.version, note=f"via-point {bad} invalid")
            if out.replans >= max_replans:
                out.reason = f"gave up after {out.replans} replans" + (f": {why}" if why else "")
                log.add(clock, "aborted", q, version=snap.version, note=out.reason)
                return out
            out.replans += 1
            log.add(clock, "replan_started", q, version=snap.version)
            traj, why = replan(snap, q)
            planned = not why
            log.add(clock, "replan_done", q, version=snap.version, note=why or "ok")
            if not planned:
                # hold position and try again on the next tick
                out.executed.append(q.copy())
                out.checked_versions.append(snap.version)
                clock.advance()
                i = 1
                continue
            i = 0
            continue
        out.executed.append(q.copy())
        out.checked_versions.append(snap.version)
        if t >= traj.total_duration:
            log.add(clock, "goal_reached", q, version=snap.version)
            out.success = True
            return out
        log.add(clock, "advance", q, s.qdot, snap.version)
        clock.advance()
        i += 1
