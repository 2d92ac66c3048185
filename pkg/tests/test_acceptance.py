"""Acceptance criteria, one test each. Every test prints a single PASS/FAIL line."""

import json
import time

import numpy as np
import pytest
from oracles import core_of, sampled_core_distance, sat_overlap_by_vertices
from planar import box_world, certified_infeasible, feasible_instances, wall_world
from scipy.spatial.transform import Rotation

from armplan.armspace import arm_config_space
from armplan.bench import AUDIT_RESOLUTION, load_queries, read_records
from armplan.cli import bench_main
from armplan.collision import (
    Box,
    Capsule,
    RobotCollisionModel,
    Sphere,
    boxes_overlap,
    configs_collide,
    first_invalid_via_point,
    shape_distance,
)
from armplan.executor import PlanCache, SimClock, execute_preemptible, execute_strict, lookup
from armplan.kinematics import end_effector, forward_kinematics, ik_damped_least_squares, jacobian, load_robot
from armplan.mannequin import load_script
from armplan.planners import PlannerConfig, PlanQuery, plan, plan_call_count, revalidate
from armplan.scenarios import demo_scheme1, demo_scheme2, load_goals, load_positions, load_query, sphere_margins
from armplan.scenes import bundled_path, load_scene
from armplan.trajectory import executed_split, sample_at, time_parameterize
from armplan.transforms import RigidTransform

ALGS = ("rrt", "rrtconnect", "bitrrt", "prm")
MODEL = load_robot()
CMODEL = RobotCollisionModel.from_robot(MODEL)
SCENE = load_scene()


@pytest.fixture
def report(capsys):
    def emit(number, title, ok, detail):
        with capsys.disabled():
            print(f"\n[{'PASS' if ok else 'FAIL'}] criterion {number}: {title} | {detail}")
        assert ok, detail

    return emit


def fd_jacobian(q, h=1e-6):
    J = np.zeros((6, 6))
    T0 = forward_kinematics(MODEL, q)[-1]
    for j in range(6):
        dq = np.zeros(6)
        dq[j] = h
        Tp, Tm = forward_kinematics(MODEL, q + dq)[-1], forward_kinematics(MODEL, q - dq)[-1]
        J[:3, j] = (Tp.translation - Tm.translation) / (2 * h)
        W = (Tp.rotation - Tm.rotation) / (2 * h) @ T0.rotation.T
        J[3:, j] = [W[2, 1], W[0, 2], W[1, 0]]
    return J


def test_criterion_1_kinematics(report):
    t0 = time.perf_counter()
    rng = np.random.default_rng(1)
    worst = max(np.abs(jacobian(MODEL, q) - fd_jacobian(q)).max() for q in rng.uniform(-np.pi, np.pi, (100, 6)))
    solved = 0
    for _ in range(100):
        q = rng.uniform(-np.pi, np.pi, 6)
        target = end_effector(MODEL, q)
        res = ik_damped_least_squares(MODEL, target, q + rng.uniform(-0.1, 0.1, 6), 200, 1e-4, 1e-3)
        got = end_effector(MODEL, res.q)
        rot = np.linalg.norm(Rotation.from_matrix(got.rotation @ target.rotation.T).as_rotvec())
        solved += bool(res.success and np.linalg.norm(got.translation - target.translation) < 1e-4 and rot < 1e-3)
    dt = time.perf_counter() - t0
    ok = worst < 1e-5 and solved >= 95 and dt < 5
    report(1, "Jacobian vs finite differences, DLS IK", ok,
           f"max |J - J_fd| = {worst:.2e} (< 1e-5), IK {solved}/100 (>= 95), {dt:.1f} s (< 5 s)")


def random_pose(rng, spread):
    return RigidTransform(Rotation.random(random_state=rng.integers(1 << 31)).as_matrix(), rng.uniform(-spread, spread, 3))


def test_criterion_2_collision_oracles(report):
    t0 = time.perf_counter()
    rng = np.random.default_rng(2)
    worst = 0.0
    for _ in range(1000):
        shapes = []
        for _ in range(2):
            if rng.random() < 0.5:
                shapes.append(Sphere(rng.uniform(0.05, 0.4)))
            else:
                shapes.append(Capsule(tuple(rng.uniform(-0.5, 0.5, 3)), tuple(rng.uniform(-0.5, 0.5, 3)),
                                      rng.uniform(0.02, 0.3)))
        pa, pb = random_pose(rng, 1.0), random_pose(rng, 1.0)
        a0, a1, ra = core_of(shapes[0], pa)
        b0, b1, rb = core_of(shapes[1], pb)
        oracle = sampled_core_distance(a0, a1, b0, b1) - ra - rb
        worst = max(worst, abs(shape_distance(shapes[0], pa, shapes[1], pb) - oracle))
    disagree = 0
    for _ in range(1000):
        ha, hb = rng.uniform(0.05, 0.5, 3), rng.uniform(0.05, 0.5, 3)
        pa, pb = random_pose(rng, 0.6), random_pose(rng, 0.6)
        disagree += boxes_overlap(ha, pa, hb, pb) != sat_overlap_by_vertices(ha, pa, hb, pb)
        disagree += (shape_distance(Box(tuple(ha)), pa, Box(tuple(hb)), pb) <= 0) != sat_overlap_by_vertices(ha, pa, hb, pb)
    dt = time.perf_counter() - t0
    ok = worst < 1e-3 and disagree == 0 and dt < 30
    report(2, "collision kernels vs sampling and separating-axis oracles", ok,
           f"round pairs max error {worst:.2e} m (< 1e-3), box disagreements {disagree}/2000 (= 0), {dt:.1f} s (< 30 s)")


def test_criterion_3_planner_soundness_and_determinism(report):
    t0 = time.perf_counter()
    snap = SCENE.snapshot()
    space = arm_config_space(MODEL, CMODEL, snap)
    audit = arm_config_space(MODEL, CMODEL, snap, resolution=AUDIT_RESOLUTION, with_clearance=False, certified=False)
    queries = load_queries(bundled_path("queries12.json"))
    assert len(queries) == 12

    def sweep():
        return {(alg, q.name, seed): plan(alg, space, q, PlannerConfig(timeout=5.0, rng_seed=seed))
                for alg in ALGS for q in queries for seed in range(5)}

    first = sweep()
    second = sweep()
    returned = [r for r in first.values() if r.success]
    sound = sum(revalidate(audit, r.via_points) for r in returned)
    identical = sum(
        a.success == b.success and len(a.via_points) == len(b.via_points)
        and all(x.tobytes() == y.tobytes() for x, y in zip(a.via_points, b.via_points))
        for a, b in ((first[k], second[k]) for k in first))
    rate = len(returned) / len(first)
    dt = time.perf_counter() - t0
    ok = sound == len(returned) and identical == len(first) and rate >= 0.9 and dt < 600
    report(3, "4 planners x 12 queries x 5 seeds in the seated scene", ok,
           f"revalidated {sound}/{len(returned)} (100%), bit-identical reruns {identical}/{len(first)}, "
           f"success {rate:.1%} (>= 90%), {dt:.0f} s for both sweeps (< 600 s)")


def test_criterion_4_planar_certification(report):
    t0 = time.perf_counter()
    instances = feasible_instances(404, 20)
    solved = {}
    for alg in ALGS:
        n = 0
        for k, (boxes, start, goal) in enumerate(instances):
            space = box_world(boxes)
            res = plan(alg, space, PlanQuery(start, goal), PlannerConfig(rng_seed=k, step_size=0.05, timeout=2.0))
            n += bool(res.success and revalidate(space, res.via_points))
        solved[alg] = n
    wall = wall_world()
    start, goal = np.array([0.1, 0.5]), np.array([0.9, 0.5])
    certified = certified_infeasible(wall.boxes, start, goal)
    false_paths = sum(plan(alg, wall, PlanQuery(start, goal), PlannerConfig(rng_seed=0, timeout=1.0)).success
                      for alg in ALGS)
    dt = time.perf_counter() - t0
    ok = min(solved.values()) >= 18 and certified and false_paths == 0 and dt < 120
    report(4, "grid-certified 2-D instances", ok,
           f"solved {solved} (each >= 18/20), infeasible certified={certified} with {false_paths} false paths, "
           f"{dt:.0f} s (< 120 s)")


def test_criterion_5_benchmark_methodology(report, tmp_path, capsys):
    t0 = time.perf_counter()
    out = tmp_path / "records.csv"
    code = bench_main(["--queries", str(bundled_path("queries9.json")), "--algorithms", ",".join(ALGS),
                       "--runs", "5", "--seed", "42", "--timeout", "5", "--out", str(out)])
    records = read_records(out)
    capsys.readouterr()
    code_s = bench_main(["summarize", str(out)])
    table = capsys.readouterr().out.splitlines()
    header = table[0].split()
    rows = [ln.split() for ln in table[1:]]
    totals = [float(r[4]) for r in rows if r[4] != "-"]
    shaped = (header[:2] == ["algorithm", "success"] and "find" in table[0] and "simplify" in table[0]
              and "total" in table[0] and "via-points" in table[0] and "exec" in table[0])
    dt = time.perf_counter() - t0
    ok = (code == 0 and code_s == 0 and len(records) == 180 and shaped and len(rows) == 4
          and totals == sorted(totals))
    report(5, "bench 4 algorithms x 9 queries x 5 runs", ok,
           f"{len(records)} records (= 180), summary columns {'ok' if shaped else 'wrong'}, "
           f"{len(rows)} rows ranked by mean total, {dt:.0f} s")


def test_criterion_6_scheme1(report, tmp_path):
    t0 = time.perf_counter()
    path = tmp_path / "cache.json"
    built = demo_scheme1(cache_path=path, goals=[])
    loaded = PlanCache.load(path)
    round_trip = all(
        all(np.array_equal(x, y) for x, y in zip(lookup(loaded, e.init_pos_id, e.goal_pos_id).via_points,
                                                 e.plan.via_points))
        for e in built.cache.entries)
    goals = load_goals()
    before = plan_call_count()
    served = demo_scheme1(cache_path=path, goals=goals)
    calls = plan_call_count() - before
    # audit every executed tick plus every stored via-point
    ticks = [e.q for e in served.log.events]
    vias = [q for e in built.cache.entries for q in e.plan.via_points]
    margin = min(sphere_margins(MODEL, SCENE, ticks).min(), sphere_margins(MODEL, SCENE, vias).min())
    dt = time.perf_counter() - t0
    ok = (len(load_positions()) == 6 and len(built.cache.entries) == 30 and round_trip and len(goals) == 10
          and calls == 0 and served.log.of("error") == [] and margin > 0 and dt < 300)
    report(6, "safe-position cache and served goal stream", ok,
           f"{len(built.cache.entries)} entries (= 30), round trip {'equal' if round_trip else 'differs'}, "
           f"{len(goals)} goals -> {len(served.log.executed)} executions with {calls} planner calls (= 0), "
           f"end-effector min distance outside sphere {margin:.3f} m (> 0) over {len(ticks)} ticks, {dt:.0f} s (< 300 s)")


def test_criterion_7_strict_and_preemptible_execution(report):
    t0 = time.perf_counter()
    space = arm_config_space(MODEL, CMODEL, SCENE.snapshot())
    poses = json.loads(bundled_path("named_poses.json").read_text())
    a, b, c = (np.array(poses[k]) for k in ("home", "handover", "overhead"))
    cfg = PlannerConfig(rng_seed=0)
    v, acc = MODEL.velocity_limits, MODEL.acceleration_limits
    p1 = plan("bitrrt", space, PlanQuery(a, b), cfg)
    p2 = plan("bitrrt", space, PlanQuery(b, c), cfg)
    clock = SimClock()
    log = execute_strict(time_parameterize(p1.via_points, v, acc), clock)
    switch = len(log.events)
    execute_strict(time_parameterize(p2.via_points, v, acc), clock, log)
    reached = log.of("goal_reached")
    rest_between = (len(reached) == 2 and not reached[0].qdot.any() and not log.events[switch].qdot.any()
                    and np.array_equal(reached[1].q, c))

    traj = time_parameterize(p1.via_points, v, acc)
    clock = SimClock()
    split_at = 0.5 * traj.total_duration
    out = execute_preemptible(traj, clock, lambda t: c if t >= split_at else None)
    prefix, suffix = out.prefix, out.suffix
    partition = np.array_equal(prefix[-1], suffix[0]) and all(
        any(np.array_equal(q, x) for x in prefix + suffix) for q in p1.via_points)
    replanned = plan("bitrrt", space, PlanQuery(prefix[-1], out.new_goal), cfg)
    execute_strict(time_parameterize(replanned.via_points, v, acc), clock, out.log)
    trace = np.array([e.q for e in out.log.events])
    continuous = np.abs(np.diff(trace, axis=0)).max() < 0.05
    final = out.log.events[-1]
    dt = time.perf_counter() - t0
    ok = rest_between and partition and continuous and final.kind == "goal_reached" and np.array_equal(final.q, c)
    report(7, "strict back-to-back and preemptible execution", ok,
           f"zero velocity between plans {rest_between}, prefix/suffix partition {partition}, "
           f"continuous trace to the second goal {continuous and np.array_equal(final.q, c)}, {dt:.1f} s")


def test_criterion_8_scheme2_replanning(report):
    t0 = time.perf_counter()
    script = load_script(bundled_path("mannequin_adversarial.csv"))
    query = load_query()
    res = demo_scheme2(script=script, query=query)
    sup, mon = res.supervisor, res.monitor
    stops = sup.log.of("stop")
    # replay the first plan and find, with the plain via-point check, the first tick whose snapshot blocks it
    first_space = arm_config_space(MODEL, CMODEL, mon.history[1])
    first = plan("bitrrt", first_space, query, PlannerConfig())
    traj = time_parameterize(first.via_points, MODEL.velocity_limits, MODEL.acceleration_limits, 0.25)
    blocked_tick = None
    for tick, version in enumerate(sup.checked_versions):
        _, rest = executed_split(traj, min(tick * 0.01, traj.total_duration))
        if first_invalid_via_point(MODEL, CMODEL, rest, 0, mon.history[version]) is not None:
            blocked_tick = tick
            break
    latency = None if not stops or blocked_tick is None else stops[0].tick - blocked_tick
    ex = np.array(sup.executed)
    hits = sum(configs_collide(MODEL, CMODEL, ex[i:i + 1], mon.history[v])[0]
               for i, v in enumerate(sup.checked_versions))
    speeds = np.array([np.abs(e.qdot) for e in sup.log.of("advance")])
    cap = 0.25 * MODEL.velocity_limits + 1e-9
    sequence = [k for k in sup.log.kinds() if k != "advance"]
    dt = time.perf_counter() - t0
    ok = (sup.success and sup.replans >= 1 and latency is not None and 0 <= latency <= 1 and hits == 0
          and np.all(speeds <= cap) and np.array_equal(ex[-1], query.q_goal) and dt < 60)
    report(8, "supervised replanning with the adversarial mannequin", ok,
           f"events {sequence}, stop latency {latency} ticks (<= 1), {sup.replans} replans, "
           f"{hits} colliding ticks of {len(ex)} (= 0), max speed ratio {(speeds / (0.25 * MODEL.velocity_limits)).max():.3f} "
           f"(<= 1), {dt:.0f} s (< 60 s)")
