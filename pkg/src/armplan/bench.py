"""Planner benchmark: repeated seeded runs over a query set, CSV records and a ranked summary."""

from __future__ import annotations

import csv
import json
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import astuple, dataclass, fields
from pathlib import Path

import numpy as np

from .armspace import arm_config_space
from .collision import RobotCollisionModel
from .kinematics import load_robot
from .mannequin import load_script
from .planners import ALGORITHMS, PlannerConfig, PlanQuery, plan, revalidate
from .scenes import bundled_path, load_scene
from .trajectory import time_parameterize

# independent re-check runs at a finer interpolation step than planning
AUDIT_RESOLUTION = 0.005


class BenchSpecError(ValueError):
    pass


@dataclass(frozen=True)
class BenchSpec:
    algorithms: tuple[str, ...]
    queries: str | None = None  # JSON query file; bundled nine-query set when None
    scene: str | None = None
    script: str | None = None  # mannequin pose taken from the script's first keyframe
    runs: int = 5
    seed: int = 0
    timeout: float = 5.0
    parallel: bool = False

    def __post_init__(self):
        if self.runs < 1:
            raise BenchSpecError("runs must be at least 1")
        if not self.algorithms:
            raise BenchSpecError("no algorithms given")
        unknown = [a for a in self.algorithms if a.lower() not in ALGORITHMS]
        if unknown:
            raise BenchSpecError(f"unknown algorithms {unknown}; known: {sorted(ALGORITHMS)}")
        if not self.timeout > 0:
            raise BenchSpecError("timeout must be positive")


@dataclass(frozen=True)
class BenchRecord:
    algorithm: str
    query: str
    run: int
    success: bool
    plan_time: float  # wall clock, seconds
    simplify_time: float  # wall clock, seconds
    via_point_count: int
    execution_time: float  # simulated trajectory duration, seconds
    contended: bool = False


COLUMNS = tuple(f.name for f in fields(BenchRecord))


def load_queries(path=None) -> list[PlanQuery]:
    path = bundled_path("queries9.json") if path is None else Path(path)
    try:
        data = json.loads(Path(path).read_text())
        queries = [PlanQuery(np.array(d["q_init"], dtype=float), np.array(d["q_goal"], dtype=float), str(d["name"]))
                   for d in data]
    except (OSError, ValueError, KeyError, TypeError) as exc:
        raise BenchSpecError(f"cannot read queries from {path}: {exc}") from None
    if not queries:
        raise BenchSpecError(f"{path} holds no queries")
    return queries


def _build(spec: BenchSpec):
    try:
        scene = load_scene(spec.scene)
        cfg = None if spec.script is None else load_script(spec.script).configs[0]
    except (OSError, ValueError, KeyError, TypeError) as exc:
        raise BenchSpecError(f"cannot read scene or script: {exc}") from None
    model = load_robot()
    cmodel = RobotCollisionModel.from_robot(model)
    snap = scene.snapshot(cfg=cfg)
    space = arm_config_space(model, cmodel, snap)
    audit = arm_config_space(model, cmodel, snap, resolution=AUDIT_RESOLUTION, with_clearance=False)
    return model, space, audit


def run_benchmark(spec: BenchSpec, timer=time.perf_counter) -> list[BenchRecord]:
    """One independent planning call per (algorithm, query, run), seeded with ``seed + run``.

    Every successful path is re-validated before it is recorded; a path that
    fails the audit is recorded as a failure.
    """
    queries = load_queries(spec.queries)
    model, space, audit = _build(spec)
    cells = [(alg, q, run) for alg in spec.algorithms for q in queries for run in range(spec.runs)]

    def one(cell):
        alg, q, run = cell
        cfg = PlannerConfig(timeout=spec.timeout, rng_seed=spec.seed + run)
        res = plan(alg, space, q, cfg, timer=timer)
        ok = res.success and revalidate(audit, res.via_points)
        duration = 0.0
        if ok:
            traj = time_parameterize(res.via_points, model.velocity_limits, model.acceleration_limits)
            duration = traj.total_duration
        return BenchRecord(alg, q.name, run, ok, float(res.stats["plan_time"]), float(res.stats["simplify_time"]),
                           len(res.via_points) if ok else 0, float(duration), spec.parallel)

    if spec.parallel:
        with ThreadPoolExecutor() as pool:
            return list(pool.map(one, cells))
    return [one(c) for c in cells]


def write_records(path, records) -> None:
    with open(Path(path), "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(COLUMNS)
        for r in records:
            w.writerow([_fmt(v) for v in astuple(r)])


def _fmt(v):
    if isinstance(v, bool):
        return "1" if v else "0"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def read_records(path) -> list[BenchRecord]:
    try:
        with open(Path(path), newline="") as fh:
            reader = csv.DictReader(fh)
            if tuple(reader.fieldnames or ()) != COLUMNS:
                raise BenchSpecError(f"{path}: header must be {','.join(COLUMNS)}")
            return [
                BenchRecord(row["algorithm"], row["query"], int(row["run"]), row["success"] == "1",
                            float(row["plan_time"]), float(row["simplify_time"]), int(row["via_point_count"]),
                            float(row["execution_time"]), row["contended"] == "1")
                for row in reader
            ]
    except (OSError, ValueError, KeyError) as exc:
        if isinstance(exc, BenchSpecError):
            raise
        raise BenchSpecError(f"cannot read records from {path}: {exc}") from None


@dataclass(frozen=True)
class SummaryRow:
    algorithm: str
    runs: int
    successes: int
    success_rate: float
    mean_plan_time: float | None
    mean_simplify_time: float | None
    mean_total_time: float | None
    mean_via_points: float | None
    mean_execution_time: float | None


def summarize(records) -> list[SummaryRow]:
    """Per-algorithm means over successful runs, ranked by mean total time (all-failure rows last)."""
    records = list(records)
    if not records:
        raise ValueError("nothing to summarize")
    rows = []
    for alg in dict.fromkeys(r.algorithm for r in records):
        mine = [r for r in records if r.algorithm == alg]
        ok = [r for r in mine if r.success]

        def mean(values):
            return float(np.mean(values)) if ok else None

        rows.append(SummaryRow(
            alg, len(mine), len(ok), len(ok) / len(mine),
            mean([r.plan_time for r in ok]),
            mean([r.simplify_time for r in ok]),
            mean([r.plan_time + r.simplify_time for r in ok]),
            mean([r.via_point_count for r in ok]),
            mean([r.execution_time for r in ok]),
        ))
    return sorted(rows, key=lambda r: (r.mean_total_time is None, r.mean_total_time or 0.0, r.algorithm))


def format_summary(rows) -> str:
    head = ("algorithm", "success", "find [s]", "simplify [s]", "total [s]", "via-points", "sim. exec [s]")
    lines = ["{:<12} {:>8} {:>10} {:>13} {:>10} {:>11} {:>14}".format(*head)]
    for r in rows:
        def f(v, spec):
            return "-" if v is None else format(v, spec)

        lines.append("{:<12} {:>8} {:>10} {:>13} {:>10} {:>11} {:>14}".format(
            r.algorithm, f"{r.successes}/{r.runs}", f(r.mean_plan_time, ".4f"), f(r.mean_simplify_time, ".4f"),
            f(r.mean_total_time, ".4f"), f(r.mean_via_points, ".2f"), f(r.mean_execution_time, ".3f")))
    return "\n".join(lines)
