"""Serial-arm kinematics on standard Denavit-Hartenberg parameters.

Frames are indexed ``0..n+1``: 0 is the robot base (the mount), ``k`` is the
frame after joint ``k`` and ``n+1`` is the end-effector (prop center), which
sits at a fixed tool transform from the flange.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np

from .transforms import RigidTransform, rotation_error

DEFAULT_LIMIT = 2.0 * np.pi
DEFAULT_V_MAX = np.pi
DEFAULT_A_MAX = 2.0 * np.pi

DLS_DAMPING = 0.05
DLS_MAX_STEP = 0.2


@dataclass(frozen=True)
class DHJoint:
    a: float
    alpha: float
    d: float
    theta_offset: float = 0.0
    limit_min: float = -DEFAULT_LIMIT
    limit_max: float = DEFAULT_LIMIT
    v_max: float = DEFAULT_V_MAX
    a_max: float = DEFAULT_A_MAX

    def __post_init__(self):
        if not self.limit_min < self.limit_max:
            raise ValueError(f"joint limits must satisfy min < max, got {self.limit_min}, {self.limit_max}")
        if self.v_max <= 0 or self.a_max <= 0:
            raise ValueError("velocity and acceleration limits must be strictly positive")


@dataclass(frozen=True)
class RobotModel:
    name: str
    joints: tuple[DHJoint, ...]
    base_transform: RigidTransform = field(default_factory=RigidTransform.identity)
    tool_transform: RigidTransform = field(default_factory=RigidTransform.identity)
    # raw link shape specs, interpreted by collision.RobotCollisionModel
    link_geometry: tuple = ()
    allowed_pairs: tuple[tuple[int, int], ...] | None = None
    elbow_frames: tuple[int, int, int] = (1, 2, 3)

    @property
    def dof(self) -> int:
        return len(self.joints)

    @property
    def limits(self) -> np.ndarray:
        """(dof, 2) array of joint (min, max)."""
        return np.array([[j.limit_min, j.limit_max] for j in self.joints], dtype=float).reshape(-1, 2)

    @property
    def velocity_limits(self) -> np.ndarray:
        return np.array([j.v_max for j in self.joints], dtype=float)

    @property
    def acceleration_limits(self) -> np.ndarray:
        return np.array([j.a_max for j in self.joints], dtype=float)

    def check_config(self, q) -> np.ndarray:
        q = np.asarray(q, dtype=float)
        if q.shape != (self.dof,):
            raise ValueError(f"expected {self.dof} joint values, got shape {q.shape}")
        if not np.all(np.isfinite(q)):
            raise ValueError("joint values must be finite")
        return q

    def within_limits(self, q) -> bool:
        lim = self.limits
        return bool(np.all(q >= lim[:, 0]) and np.all(q <= lim[:, 1]))

    def clip(self, q) -> np.ndarray:
        lim = self.limits
        return np.clip(q, lim[:, 0], lim[:, 1])


def _transform_from_spec(spec) -> RigidTransform:
    if spec is None:
        return RigidTransform.identity()
    return RigidTransform.from_xyz_rpy(spec.get("xyz", (0, 0, 0)), spec.get("rpy", (0, 0, 0)))


def robot_from_dict(data: dict) -> RobotModel:
    joints = tuple(
        DHJoint(
            a=float(j["a"]),
            alpha=float(j["alpha"]),
            d=float(j["d"]),
            theta_offset=float(j.get("theta_offset", 0.0)),
            limit_min=float(j.get("limit_min", -DEFAULT_LIMIT)),
            limit_max=float(j.get("limit_max", DEFAULT_LIMIT)),
            v_max=float(j.get("v_max", DEFAULT_V_MAX)),
            a_max=float(j.get("a_max", DEFAULT_A_MAX)),
        )
        for j in data["joints"]
    )
    base = RigidTransform.translation_only((0.0, 0.0, float(data.get("base_height_m", 0.75))))
    if "base" in data:
        base = _transform_from_spec(data["base"])
    allowed = data.get("allowed_pairs")
    if allowed is not None:
        allowed = tuple(tuple(sorted((int(a), int(b)))) for a, b in allowed)
    return RobotModel(
        name=data.get("name", "robot"),
        joints=joints,
        base_transform=base,
        tool_transform=_transform_from_spec(data.get("tool")),
        link_geometry=tuple(data.get("links", ())),
        allowed_pairs=allowed,
        elbow_frames=tuple(data.get("elbow_frames", (1, 2, 3))),
    )


def load_robot(path=None) -> RobotModel:
    """Load a robot description JSON file; the bundled UR5 model if ``path`` is None."""
    if path is None:
        text = resources.files("armplan.data").joinpath("ur5.json").read_text()
    else:
        text = Path(path).read_text()
    return robot_from_dict(json.loads(text))


def dh_matrices(model: RobotModel, Q: np.ndarray) -> np.ndarray:
    """Per-joint DH transforms for a batch of configurations, shape (K, n, 4, 4)."""
    Q = np.atleast_2d(Q)
    a = np.array([j.a for j in model.joints])
    alpha = np.array([j.alpha for j in model.joints])
    d = np.array([j.d for j in model.joints])
    theta = Q + np.array([j.theta_offset for j in model.joints])
    ct, st = np.cos(theta), np.sin(theta)
    ca, sa = np.cos(alpha), np.sin(alpha)
    A = np.zeros(Q.shape + (4, 4))
    A[..., 0, 0] = ct
    A[..., 0, 1] = -st * ca
    A[..., 0, 2] = st * sa
    A[..., 0, 3] = a * ct
    A[..., 1, 0] = st
    A[..., 1, 1] = ct * ca
    A[..., 1, 2] = -ct * sa
    A[..., 1, 3] = a * st
    A[..., 2, 1] = sa
    A[..., 2, 2] = ca
    A[..., 2, 3] = d
    A[..., 3, 3] = 1.0
    return A


def frames_batch(model: RobotModel, Q) -> np.ndarray:
    """Homogeneous frames 0..n+1 for each row of ``Q``; shape (K, n+2, 4, 4)."""
    Q = np.atleast_2d(np.asarray(Q, dtype=float))
    K, n = Q.shape
    if n != model.dof:
        raise ValueError(f"expected {model.dof} joint values, got {n}")
    A = dh_matrices(model, Q)
    out = np.empty((K, n + 2, 4, 4))
    T = np.broadcast_to(model.base_transform.matrix(), (K, 4, 4))
    out[:, 0] = T
    for i in range(n):
        T = T @ A[:, i]
        out[:, i + 1] = T
    out[:, n + 1] = T @ model.tool_transform.matrix()
    return out


def forward_kinematics(model: RobotModel, q) -> list[RigidTransform]:
    """World frames of the base, every link and the end-effector."""
    q = model.check_config(q)
    F = frames_batch(model, q[None, :])[0]
    return [RigidTransform.from_matrix(T) for T in F]


def end_effector(model: RobotModel, q) -> RigidTransform:
    return forward_kinematics(model, q)[-1]


def jacobian(model: RobotModel, q) -> np.ndarray:
    """Geometric Jacobian of the end-effector, linear rows first, in the world frame."""
    q = model.check_config(q)
    F = frames_batch(model, q[None, :])[0]
    p_ee = F[-1, :3, 3]
    J = np.zeros((6, model.dof))
    for j in range(model.dof):
        z = F[j, :3, 2]
        o = F[j, :3, 3]
        J[:3, j] = np.cross(z, p_ee - o)
        J[3:, j] = z
    return J


@dataclass
class IKResult:
    """Outcome of a numerical IK solve.

    ``q`` is the best configuration found even on failure; ``residual_trace``
    holds the pose-error norm after every accepted iterate, starting with the
    seed.
    """

    q: np.ndarray
    success: bool
    iterations: int
    residual: float
    pos_error: float
    rot_error: float
    residual_trace: list[float] = field(default_factory=list)
    reason: str = ""


def _pose_error(model, q, target: RigidTransform) -> np.ndarray:
    T = frames_batch(model, q[None, :])[0, -1]
    e = np.empty(6)
    e[:3] = target.translation - T[:3, 3]
    e[3:] = rotation_error(target.rotation, T[:3, :3])
    return e


def ik_damped_least_squares(
    model: RobotModel,
    target: RigidTransform,
    seed,
    max_iters: int = 200,
    tol_pos: float = 1e-4,
    tol_rot: float = 1e-3,
    damping: float = DLS_DAMPING,
    max_step: float = DLS_MAX_STEP,
) -> IKResult:
    q = model.clip(model.check_config(seed).copy())
    e = _pose_error(model, q, target)
    res = float(np.linalg.norm(e))
    trace = [res]
    lam2 = damping * damping
    for it in range(max_iters + 1):
        ep, er = float(np.linalg.norm(e[:3])), float(np.linalg.norm(e[3:]))
        if ep < tol_pos and er < tol_rot:
            return IKResult(q, True, it, res, ep, er, trace)
        if it == max_iters:
            break
        J = jacobian(model, q)
        dq = J.T @ np.linalg.solve(J @ J.T + lam2 * np.eye(6), e)
        peak = np.abs(dq).max()
        if peak > max_step:
            dq *= max_step / peak
        # backtrack so the residual never grows
        for _ in range(12):
            q_new = model.clip(q + dq)
            e_new = _pose_error(model, q_new, target)
            res_new = float(np.linalg.norm(e_new))
            if res_new < res:
                break
            dq *= 0.5
        else:
            return IKResult(q, False, it, res, ep, er, trace, reason="stalled")
        q, e, res = q_new, e_new, res_new
        trace.append(res)
    ep, er = float(np.linalg.norm(e[:3])), float(np.linalg.norm(e[3:]))
    return IKResult(q, False, max_iters, res, ep, er, trace, reason="max iterations reached")


ELBOW_EPS = 1e-9


def elbow_height(model: RobotModel, q) -> float:
    """Height of the elbow above the shoulder-wrist midpoint, in the base frame."""
    q = model.check_config(q)
    F = frames_batch(model, q[None, :])[0]
    base_inv = model.base_transform.inverse()
    s, e, w = (base_inv.apply(F[i, :3, 3]) for i in model.elbow_frames)
    return float(e[2] - 0.5 * (s[2] + w[2]))


def is_elbow_up(model: RobotModel, q) -> bool:
    return elbow_height(model, q) > ELBOW_EPS
