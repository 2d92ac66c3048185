import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from armplan.trajectory import (
    executed_split,
    sample_at,
    tick_times,
    time_parameterize,
    write_trajectory_log,
)

V = np.full(3, 1.5)
A = np.full(3, 3.0)


def random_path(rng, n=None):
    n = n or rng.integers(2, 6)
    return list(rng.uniform(-2, 2, (n, 3)))


def test_single_via_point_has_zero_duration():
    traj = time_parameterize([np.zeros(3)], V, A)
    assert traj.total_duration == 0
    s = sample_at(traj, 0.0)
    assert np.array_equal(s.q, np.zeros(3)) and not s.qdot.any()


def test_empty_path_rejected():
    with pytest.raises(ValueError):
        time_parameterize([], V, A)
    with pytest.raises(ValueError):
        time_parameterize([np.zeros(3)], V, A, speed_scale=0)


def test_near_infinite_acceleration_trapezoid():
    traj = time_parameterize([np.zeros(1), np.ones(1)], [1.0], [1e6])
    # 2 t_acc + cruise = 1/v + v/a
    assert traj.total_duration == pytest.approx(1.0 + 1e-6, abs=1e-12)
    assert abs(traj.total_duration - 1.0) < 1e-3


def test_triangular_closed_form():
    traj = time_parameterize([np.zeros(1), np.ones(1)], [1.0], [1.0])
    assert traj.total_duration == pytest.approx(2.0, abs=1e-12)
    assert traj.segments[0].t_cruise == 0.0
    # peak speed at the middle is sqrt(a * dq)
    assert sample_at(traj, 1.0).qdot[0] == pytest.approx(1.0, abs=1e-12)


def test_general_trapezoid_closed_form():
    # dq = 2, v = 1, a = 2: ramps of 0.5 s cover 0.5 rad, cruise 1.5 s
    traj = time_parameterize([np.zeros(1), np.full(1, 2.0)], [1.0], [2.0])
    assert traj.total_duration == pytest.approx(2.5, abs=1e-12)


def test_endpoints_and_cruise_speed():
    q0, q1 = np.array([0.0, 0.0, 0.0]), np.array([2.0, -1.0, 0.5])
    scale = 0.4
    traj = time_parameterize([q0, q1], V, A, scale)
    s0, sT = sample_at(traj, 0.0), sample_at(traj, traj.total_duration)
    assert np.array_equal(s0.q, q0) and np.array_equal(sT.q, q1)
    assert not s0.qdot.any() and not sT.qdot.any()
    seg = traj.segments[0]
    mid = seg.t_acc + seg.t_cruise / 2
    assert seg.t_cruise > 0
    # joint 0 moves furthest and binds
    assert abs(sample_at(traj, mid).qdot[0]) == pytest.approx(scale * V[0], abs=1e-9)


def test_via_points_are_hit_at_rest():
    rng = np.random.default_rng(0)
    path = random_path(rng, 5)
    traj = time_parameterize(path, V, A)
    for k, seg in enumerate(traj.segments):
        s = sample_at(traj, seg.t_start)
        assert np.array_equal(s.q, path[k])
        assert not s.qdot.any()


def test_limits_hold_on_random_paths():
    rng = np.random.default_rng(1)
    for _ in range(100):
        path = random_path(rng)
        scale = rng.uniform(0.1, 1.0)
        traj = time_parameterize(path, V, A, scale)
        for t in np.linspace(0, traj.total_duration, 400):
            s = sample_at(traj, t)
            assert np.all(np.abs(s.qdot) <= scale * V + 1e-9)
            assert np.all(np.abs(s.qddot) <= scale * A + 1e-9)


def test_velocity_matches_finite_differences():
    rng = np.random.default_rng(2)
    traj = time_parameterize(random_path(rng, 4), V, A, 0.7)
    h = 1e-5
    breaks = []
    for seg in traj.segments:
        breaks += [seg.t_start, seg.t_start + seg.t_acc, seg.t_start + seg.t_acc + seg.t_cruise, seg.t_start + seg.duration]
    breaks = np.array(breaks)
    for t in np.linspace(h, traj.total_duration - h, 500):
        if np.min(np.abs(breaks - t)) < 2 * h:
            continue
        fd = (sample_at(traj, t + h).q - sample_at(traj, t - h).q) / (2 * h)
        assert np.abs(fd - sample_at(traj, t).qdot).max() < 1e-4


def test_positions_stay_on_segments():
    rng = np.random.default_rng(3)
    path = random_path(rng, 4)
    traj = time_parameterize(path, V, A)
    for t in np.linspace(0, traj.total_duration, 300):
        q = sample_at(traj, t).q
        best = np.inf
        for a, b in zip(path, path[1:]):
            u = np.clip((q - a) @ (b - a) / ((b - a) @ (b - a)), 0, 1)
            best = min(best, np.linalg.norm(a + u * (b - a) - q))
        assert best < 1e-9


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 1000), st.floats(0.05, 1.0), st.floats(0.05, 1.0))
def test_duration_monotone_in_speed_scale(seed, s1, s2):
    path = random_path(np.random.default_rng(seed))
    lo, hi = min(s1, s2), max(s1, s2)
    assert time_parameterize(path, V, A, lo).total_duration >= time_parameterize(path, V, A, hi).total_duration


def test_out_of_range_time_rejected():
    traj = time_parameterize([np.zeros(3), np.ones(3)], V, A)
    with pytest.raises(ValueError):
        sample_at(traj, -1e-3)
    with pytest.raises(ValueError):
        sample_at(traj, traj.total_duration + 1e-3)


def test_split_boundaries():
    rng = np.random.default_rng(4)
    path = random_path(rng, 4)
    traj = time_parameterize(path, V, A)
    prefix, rest = executed_split(traj, 0.0)
    assert len(prefix) == 1 and np.array_equal(prefix[0], path[0])
    assert len(rest) == 4 and all(np.array_equal(a, b) for a, b in zip(rest, path))
    prefix, rest = executed_split(traj, traj.total_duration)
    assert len(rest) == 1 and np.array_equal(rest[0], path[-1])
    assert len(prefix) == 4


def test_split_mid_segment_partition():
    rng = np.random.default_rng(5)
    path = random_path(rng, 4)
    traj = time_parameterize(path, V, A)
    seg = traj.segments[1]
    t = seg.t_start + 0.37 * seg.duration
    prefix, rest = executed_split(traj, t)
    q = sample_at(traj, t).q
    assert np.array_equal(prefix[-1], q) and np.array_equal(rest[0], q)
    keys = {tuple(p) for p in prefix} | {tuple(p) for p in rest}
    assert keys == {tuple(p) for p in path} | {tuple(q)}
    assert len(prefix) + len(rest) == len(path) + 2


def test_split_at_interior_via_point():
    rng = np.random.default_rng(6)
    path = random_path(rng, 3)
    traj = time_parameterize(path, V, A)
    prefix, rest = executed_split(traj, traj.segments[1].t_start)
    assert len(prefix) == 2 and len(rest) == 2
    assert np.array_equal(prefix[-1], rest[0])


def test_repeated_via_point_is_harmless():
    p = [np.zeros(3), np.ones(3), np.ones(3), np.full(3, 2.0)]
    traj = time_parameterize(p, V, A)
    t = traj.segments[2].t_start
    assert np.array_equal(sample_at(traj, t).q, np.ones(3))
    prefix, rest = executed_split(traj, t)
    assert np.array_equal(prefix[-1], rest[0])


def test_tick_times_and_log(tmp_path):
    traj = time_parameterize([np.zeros(3), np.full(3, 0.3)], V, A)
    t = tick_times(traj.total_duration, 0.01)
    assert t[0] == 0.0 and t[-1] == traj.total_duration
    assert np.all(np.diff(t) > 0)
    path = tmp_path / "traj.csv"
    write_trajectory_log(path, traj)
    lines = path.read_text().splitlines()
    assert lines[0] == "t,q1,q2,q3,v1,v2,v3"
    assert len(lines) == len(t) + 1
    last = [float(x) for x in lines[-1].split(",")]
    assert last[1:4] == [0.3, 0.3, 0.3] and last[4:] == [0.0, 0.0, 0.0]
