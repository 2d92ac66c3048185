import numpy as np
import pytest

from armplan.collision import Box, CollisionBody, SceneSnapshot
from armplan.executor import (
    CacheBuildError,
    CacheMiss,
    ExecutionLog,
    PlanCache,
    SceneMonitor,
    SimClock,
    build_cache,
    execute_preemptible,
    execute_strict,
    lookup,
    publish_scene,
    serve_cached_goals,
    supervise_inside,
)
from armplan.planners import PlannerConfig, PlanQuery, plan_call_count
from armplan.trajectory import sample_at, time_parameterize
from armplan.transforms import RigidTransform
from planar import box_world, wall_world

V = np.array([1.0, 1.0])
A = np.array([2.0, 2.0])
FAST = PlannerConfig(timeout=2.0, rng_seed=0)


def flat_box(name, x0, y0, x1, y1):
    c = ((x0 + x1) / 2, (y0 + y1) / 2, 0.0)
    h = ((x1 - x0) / 2, (y1 - y0) / 2, 0.1)
    return CollisionBody(name, Box(h), RigidTransform.translation_only(c))


def planar_space_for(snap):
    boxes = []
    for b in snap.bodies:
        c, h = b.pose.translation, np.array(b.shape.half_extents)
        boxes.append((c[0] - h[0], c[1] - h[1], c[0] + h[0], c[1] + h[1]))
    return box_world(boxes, resolution=0.005)


def test_clock_counts_integer_ticks():
    clock = SimClock()
    clock.advance(300)
    assert clock.tick == 300 and clock.now == 3.0
    with pytest.raises(ValueError):
        SimClock(dt=0)


def test_log_rejects_unknown_events_and_time_reversal():
    log = ExecutionLog()
    clock = SimClock(tick=5)
    log.add(clock, "advance", [0, 0])
    with pytest.raises(ValueError):
        log.add(clock, "teleport", [0, 0])
    with pytest.raises(ValueError):
        log.add(SimClock(tick=4), "advance", [0, 0])


def test_strict_back_to_back_rests_between_plans():
    a, b, c = np.array([0.1, 0.1]), np.array([0.8, 0.3]), np.array([0.2, 0.9])
    clock = SimClock()
    log = execute_strict(time_parameterize([a, b], V, A), clock)
    switch = len(log.events)
    execute_strict(time_parameterize([b, c], V, A), clock, log)
    reached = log.of("goal_reached")
    assert len(reached) == 2
    assert np.array_equal(reached[0].q, b) and np.array_equal(reached[1].q, c)
    assert not reached[0].qdot.any()
    # the first tick of the second plan starts from rest as well
    assert not log.events[switch].qdot.any()
    assert np.array_equal(log.events[switch].q, b)
    times = [e.t for e in log.events]
    assert times == sorted(times)


def test_zero_duration_trajectory_logs_only_goal_reached():
    log = execute_strict(time_parameterize([np.array([0.3, 0.3])], V, A), SimClock())
    assert log.kinds() == ["goal_reached"]


def test_log_reproduces_sample_at_at_tick_times():
    traj = time_parameterize([np.array([0.1, 0.2]), np.array([0.7, 0.4]), np.array([0.5, 0.9])], V, A)
    log = execute_strict(traj, SimClock())
    adv = log.of("advance")
    assert len(adv) == int(np.ceil(traj.total_duration / 0.01 - 1e-9))
    for e in adv:
        s = sample_at(traj, e.tick * 0.01)
        assert np.array_equal(e.q, s.q) and np.array_equal(e.qdot, s.qdot)


def test_preempt_at_start_leaves_whole_path():
    path = [np.array([0.1, 0.2]), np.array([0.7, 0.4]), np.array([0.5, 0.9])]
    out = execute_preemptible(time_parameterize(path, V, A), SimClock(), lambda t: np.array([0.9, 0.9]))
    assert len(out.prefix) == 1 and np.array_equal(out.prefix[0], path[0])
    assert all(np.array_equal(p, q) for p, q in zip(out.suffix, path)) and len(out.suffix) == 3
    assert np.array_equal(out.new_goal, [0.9, 0.9])


def test_no_preemption_matches_strict():
    path = [np.array([0.1, 0.2]), np.array([0.7, 0.4])]
    traj = time_parameterize(path, V, A)
    out = execute_preemptible(traj, SimClock(), lambda t: None)
    strict = execute_strict(traj, SimClock())
    assert out.log.kinds() == strict.kinds()
    assert all(np.array_equal(a.q, b.q) for a, b in zip(out.log.events, strict.events))
    assert len(out.suffix) == 1 and np.array_equal(out.suffix[0], path[-1])
    assert out.new_goal is None


def test_mid_plan_preemption_then_replan_reaches_new_goal():
    path = [np.array([0.1, 0.1]), np.array([0.5, 0.6]), np.array([0.9, 0.2])]
    new_goal = np.array([0.2, 0.9])
    traj = time_parameterize(path, V, A)
    clock = SimClock()
    out = execute_preemptible(traj, clock, lambda t: new_goal if t >= 0.6 else None)
    prefix, suffix = out.prefix, out.suffix
    # partition identity: split point shared, every original via-point on one side
    assert np.array_equal(prefix[-1], suffix[0])
    for q in path:
        assert any(np.array_equal(q, p) for p in prefix + suffix)
    split_t = out.log.of("stop")[0].tick * 0.01
    assert np.allclose(prefix[-1], sample_at(traj, split_t).q)
    second = execute_strict(time_parameterize([prefix[-1], out.new_goal], V, A), clock, out.log)
    trace = np.array([e.q for e in second.events])
    assert np.array_equal(second.of("goal_reached")[-1].q, new_goal)
    # executed trace is continuous across the switch
    assert np.abs(np.diff(trace, axis=0)).max() < 0.02


def test_monitor_versions_increment_by_one():
    mon = SceneMonitor(SceneSnapshot([]))
    body = flat_box("b", 0.1, 0.1, 0.2, 0.2)
    seen = [mon.version]
    for k in range(3):
        # identical content still yields a new version
        assert publish_scene(mon, [body], 0.1 * k) == seen[-1] + 1
        seen.append(mon.current().version)
    assert seen == [0, 1, 2, 3]
    assert sorted(mon.history) == seen and mon.history[2].bodies == (body,)


POSITIONS = {"home": np.array([0.1, 0.1]), "a": np.array([0.9, 0.1]), "b": np.array([0.5, 0.9])}
OBSTACLE = [(0.4, 0.3, 0.6, 0.5)]


def test_cache_has_one_entry_per_ordered_pair():
    space = box_world(OBSTACLE)
    cache = build_cache(space, POSITIONS, FAST, algorithm="rrtconnect")
    assert len(cache.entries) == 6
    for e in cache.entries:
        assert e.init_pos_id != e.goal_pos_id
        assert np.array_equal(e.plan.via_points[0], POSITIONS[e.init_pos_id])
        assert np.array_equal(e.plan.via_points[-1], POSITIONS[e.goal_pos_id])
    single = build_cache(space, {"home": POSITIONS["home"]}, FAST)
    assert single.entries == []


def test_cache_rejects_invalid_positions_and_reports_unplannable_pairs():
    with pytest.raises(ValueError):
        build_cache(box_world(OBSTACLE), {"home": np.array([0.5, 0.4])}, FAST)
    split = {"left": np.array([0.2, 0.5]), "right": np.array([0.8, 0.5])}
    with pytest.raises(CacheBuildError) as err:
        build_cache(wall_world(0.0), split, PlannerConfig(timeout=0.2, rng_seed=0), algorithm="rrtconnect")
    assert sorted(err.value.pairs) == [("left", "right"), ("right", "left")]


def test_lookup_returns_stored_plan_or_not_found():
    cache = build_cache(box_world(OBSTACLE), POSITIONS, FAST, algorithm="rrtconnect")
    assert lookup(cache, "home", "b") is cache.get("home", "b").plan
    for a, b in (("a", "a"), ("zz", "home"), ("home", "zz")):
        with pytest.raises(CacheMiss):
            lookup(cache, a, b)


def test_cache_file_round_trip(tmp_path):
    cache = build_cache(box_world(OBSTACLE), POSITIONS, FAST, algorithm="rrtconnect")
    cache.save(tmp_path / "c.json")
    back = PlanCache.load(tmp_path / "c.json")
    assert back.to_dict() == cache.to_dict()
    for e in cache.entries:
        got = lookup(back, e.init_pos_id, e.goal_pos_id).via_points
        assert len(got) == len(e.plan.via_points)
        assert all(np.array_equal(x, y) for x, y in zip(got, e.plan.via_points))


def test_serving_never_plans_and_follows_the_stream():
    cache = build_cache(box_world(OBSTACLE), POSITIONS, FAST, algorithm="rrtconnect")
    before = plan_call_count()
    log = serve_cached_goals(cache, ["a", "b", "b", "zz", "home"], SimClock(), V, A)
    assert plan_call_count() == before
    assert log.executed == [("home", "a"), ("a", "b"), ("b", "home")]
    assert [e.note for e in log.of("idle")] == ["b"]
    assert len(log.of("error")) == 1
    reached = log.of("goal_reached")
    assert np.array_equal(reached[0].q, POSITIONS["a"]) and np.array_equal(reached[-1].q, POSITIONS["home"])


def test_served_motion_is_the_cached_plan():
    cache = build_cache(box_world(OBSTACLE), POSITIONS, FAST, algorithm="rrtconnect")
    log = serve_cached_goals(cache, ["b"], SimClock(), V, A)
    traj = time_parameterize(lookup(cache, "home", "b").via_points, V, A)
    adv = log.of("advance")
    assert all(np.array_equal(e.q, sample_at(traj, e.tick * 0.01).q) for e in adv)


def test_serving_needs_a_known_start():
    cache = build_cache(box_world(OBSTACLE), POSITIONS, FAST, algorithm="rrtconnect")
    with pytest.raises(CacheMiss):
        serve_cached_goals(cache, ["a"], SimClock(), V, A, start="nowhere")


START, GOAL = np.array([0.1, 0.5]), np.array([0.9, 0.5])


def run_supervised(events, algorithm="rrtconnect", max_replans=10):
    """``events`` maps tick -> list of bodies to publish at that tick."""
    mon = SceneMonitor(SceneSnapshot([]))
    clock = SimClock()
    publish_ticks = {}

    def on_tick(t):
        k = clock.tick
        if k in events:
            publish_ticks[mon.publish(events[k], t)] = k

    res = supervise_inside(planar_space_for, PlanQuery(START, GOAL), FAST, mon, clock, V, A,
                           speed_scale=0.25, algorithm=algorithm, max_replans=max_replans, on_tick=on_tick)
    return res, mon, publish_ticks


def assert_safe_and_slow(res, mon):
    for q, v in zip(res.executed, res.checked_versions):
        assert planar_space_for(mon.history[v]).is_valid(q)
    speeds = np.array([np.abs(e.qdot) for e in res.log.of("advance")])
    assert np.all(speeds <= 0.25 * V + 1e-9)


def test_static_scene_plans_once_without_stops():
    before = plan_call_count()
    res, mon, _ = run_supervised({})
    assert res.success and res.replans == 0
    assert plan_call_count() - before == 1
    assert res.log.of("stop") == []
    assert np.array_equal(res.executed[-1], GOAL)
    assert_safe_and_slow(res, mon)


def test_obstacle_behind_the_robot_causes_no_stop():
    # at t = 2 s the robot is past x = 0.3 on the straight line
    res, mon, _ = run_supervised({200: [flat_box("behind", 0.12, 0.45, 0.2, 0.55)]})
    assert res.success and res.replans == 0 and res.log.of("stop") == []
    assert mon.version == 1


def test_obstacle_ahead_stops_within_a_tick_and_replans():
    res, mon, published = run_supervised({100: [flat_box("ahead", 0.65, 0.4, 0.75, 0.6)]})
    assert res.success and res.replans == 1
    assert [k for k in res.log.kinds() if k != "advance"] == [
        "goal_updated", "stop", "replan_started", "replan_done", "goal_reached"]
    stop = res.log.of("stop")[0]
    assert stop.version == 1 and stop.tick - published[1] <= 1
    assert np.array_equal(res.executed[-1], GOAL)
    assert_safe_and_slow(res, mon)


def test_blocked_goal_aborts_after_max_replans():
    res, mon, _ = run_supervised({50: [flat_box("on_goal", 0.85, 0.45, 0.95, 0.55)]}, max_replans=3)
    assert not res.success and res.replans == 3
    assert res.log.kinds()[-1] == "aborted" and "3 replans" in res.reason
    assert_safe_and_slow(res, mon)


def test_supervisor_requires_reduced_speed():
    with pytest.raises(ValueError):
        supervise_inside(planar_space_for, PlanQuery(START, GOAL), FAST, SceneMonitor(SceneSnapshot([])),
                         SimClock(), V, A, speed_scale=1.0)


def test_log_csv_layout(tmp_path):
    log = execute_strict(time_parameterize([np.array([0.1, 0.2]), np.array([0.2, 0.2])], V, A), SimClock())
    log.write_csv(tmp_path / "log.csv")
    lines = (tmp_path / "log.csv").read_text().splitlines()
    assert lines[0] == "t,event,version,q1,q2"
    assert len(lines) == len(log.events) + 1
    assert lines[-1].split(",")[1] == "goal_reached"
