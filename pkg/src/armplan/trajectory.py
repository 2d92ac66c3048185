"""Time parameterization of joint-space polylines with synchronized trapezoidal profiles.

Each segment follows the straight line q(s) = q0 + s (q1 - q0) with a shared
time law s(t) on [0, 1]. The binding joint touches its scaled velocity or
acceleration limit, and the robot is at rest at every via-point.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np


@dataclass(frozen=True)
class SegmentProfile:
    q0: np.ndarray
    q1: np.ndarray
    t_start: float
    t_acc: float
    t_cruise: float
    peak: float  # peak ds/dt
    accel: float  # d2s/dt2 during the ramps

    @property
    def duration(self) -> float:
        return 2 * self.t_acc + self.t_cruise

    def s_at(self, tau: float) -> tuple[float, float, float]:
        """(s, ds/dt, d2s/dt2) at local time ``tau``; the right-hand limit at breakpoints."""
        T = self.duration
        if T == 0:
            return 1.0, 0.0, 0.0
        if tau >= T:
            return 1.0, 0.0, 0.0
        if tau < self.t_acc:
            return 0.5 * self.accel * tau * tau, self.accel * tau, self.accel
        if tau < self.t_acc + self.t_cruise:
            s = 0.5 * self.accel * self.t_acc**2 + self.peak * (tau - self.t_acc)
            return s, self.peak, 0.0
        r = T - tau
        return 1.0 - 0.5 * self.accel * r * r, self.accel * r, -self.accel


@dataclass(frozen=True)
class Trajectory:
    via_points: np.ndarray  # (K, n)
    segments: tuple[SegmentProfile, ...]
    total_duration: float
    v_max: np.ndarray
    a_max: np.ndarray
    speed_scale: float

    @property
    def starts(self) -> np.ndarray:
        return np.array([seg.t_start for seg in self.segments])


@dataclass(frozen=True)
class TrajectorySample:
    t: float
    q: np.ndarray
    qdot: np.ndarray
    qddot: np.ndarray


def segment_profile(q0, q1, v_max, a_max, speed_scale: float, t_start: float = 0.0) -> SegmentProfile:
    dq = np.abs(q1 - q0)
    moving = dq > 0
    if not moving.any():
        return SegmentProfile(q0, q1, t_start, 0.0, 0.0, 0.0, 0.0)
    V = float(np.min(speed_scale * v_max[moving] / dq[moving]))
    A = float(np.min(speed_scale * a_max[moving] / dq[moving]))
    if V * V / A >= 1.0:
        # triangular: the peak speed is never reached
        t_acc = math.sqrt(1.0 / A)
        return SegmentProfile(q0, q1, t_start, t_acc, 0.0, A * t_acc, A)
    t_acc = V / A
    t_cruise = (1.0 - V * V / A) / V
    return SegmentProfile(q0, q1, t_start, t_acc, t_cruise, V, A)


def time_parameterize(path, v_max, a_max, speed_scale: float = 1.0) -> Trajectory:
    P = np.array([np.asarray(q, dtype=float) for q in path])
    if P.ndim != 2 or len(P) == 0:
        raise ValueError("a trajectory needs at least one via-point")
    v_max = np.broadcast_to(np.asarray(v_max, dtype=float), (P.shape[1],)).copy()
    a_max = np.broadcast_to(np.asarray(a_max, dtype=float), (P.shape[1],)).copy()
    if np.any(v_max <= 0) or np.any(a_max <= 0):
        raise ValueError("velocity and acceleration limits must be positive")
    if not 0 < speed_scale <= 1:
        raise ValueError("speed_scale must lie in (0, 1]")
    segs = []
    t = 0.0
    for q0, q1 in zip(P, P[1:]):
        seg = segment_profile(q0, q1, v_max, a_max, speed_scale, t)
        segs.append(seg)
        t += seg.duration
    return Trajectory(P, tuple(segs), t, v_max, a_max, speed_scale)


def _locate(traj: Trajectory, t: float) -> int:
    """Index of the segment active at time t (the later one at a shared boundary)."""
    # zero-length segments share their start with the next one, which wins here
    return max(int(np.searchsorted(traj.starts, t, side="right")) - 1, 0)


def _check_time(traj: Trajectory, t: float) -> None:
    if not 0 <= t <= traj.total_duration:
        raise ValueError(f"t = {t} outside [0, {traj.total_duration}]")


def sample_at(traj: Trajectory, t: float) -> TrajectorySample:
    _check_time(traj, t)
    n = traj.via_points.shape[1]
    zero = np.zeros(n)
    if not traj.segments:
        return TrajectorySample(t, traj.via_points[0].copy(), zero, zero.copy())
    if t == traj.total_duration:
        return TrajectorySample(t, traj.via_points[-1].copy(), zero, zero.copy())
    seg = traj.segments[_locate(traj, t)]
    s, sd, sdd = seg.s_at(t - seg.t_start)
    delta = seg.q1 - seg.q0
    if s == 0.0:
        q = seg.q0.copy()
    elif s == 1.0:
        q = seg.q1.copy()
    else:
        q = seg.q0 + s * delta
    return TrajectorySample(t, q, sd * delta, sdd * delta)


def executed_split(traj: Trajectory, t_stop: float) -> tuple[list, list]:
    """Split at ``t_stop`` into the traversed via-points and the part still to go.

    The prefix ends and the remainder starts at the same configuration.
    """
    _check_time(traj, t_stop)
    via = [q.copy() for q in traj.via_points]
    if not traj.segments or t_stop == traj.total_duration:
        return via, [via[-1].copy()]
    k = _locate(traj, t_stop)
    q = sample_at(traj, t_stop).q
    if np.array_equal(q, via[k]):
        return via[: k + 1], [x.copy() for x in via[k:]]
    return via[: k + 1] + [q], [q.copy()] + via[k + 1 :]


def tick_times(duration: float, dt: float) -> np.ndarray:
    """Sampling instants k dt strictly before ``duration``, then ``duration`` itself."""
    n = math.ceil(duration / dt) if duration > 0 else 0
    t = np.arange(n) * dt
    t = t[t < duration]
    return np.append(t, duration)


def write_trajectory_log(path, traj: Trajectory, dt: float = 0.01) -> None:
    n = traj.via_points.shape[1]
    with open(Path(path), "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["t"] + [f"q{i}" for i in range(1, n + 1)] + [f"v{i}" for i in range(1, n + 1)])
        for t in tick_times(traj.total_duration, dt):
            s = sample_at(traj, float(t))
            w.writerow([repr(float(t))] + [repr(float(v)) for v in s.q] + [repr(float(v)) for v in s.qdot])
