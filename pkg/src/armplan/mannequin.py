"""Seated-user model: fixed torso and two 7-joint arms, script playback, workspace sphere."""

from __future__ import annotations

import csv
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .collision import Box, Capsule, CollisionBody, Sphere, Tag
from .transforms import RigidTransform, axis_angle_matrix

ARM_JOINTS = 7
N_ANGLES = 2 * ARM_JOINTS
ARMS = ("left", "right")
SEGMENTS = ("upper_arm", "forearm", "palm")


@dataclass(frozen=True)
class ArmJoint:
    axis: tuple[float, float, float]
    # origin of the next joint, expressed in this joint's link frame
    offset: tuple[float, float, float] = (0.0, 0.0, 0.0)


def _default_arm(upper=0.30, fore=0.25, palm=0.10) -> tuple[ArmJoint, ...]:
    # arm frame: x lateral, y forward (rest direction), z up
    return (
        ArmJoint((0, 0, 1)),
        ArmJoint((1, 0, 0)),
        ArmJoint((0, 1, 0), (0, upper, 0)),
        ArmJoint((1, 0, 0), (0, fore, 0)),
        ArmJoint((0, 1, 0)),
        ArmJoint((1, 0, 0)),
        ArmJoint((0, 0, 1), (0, palm, 0)),
    )


@dataclass(frozen=True)
class MannequinModel:
    """Torso pose, torso box, shoulder mounts and the two arm chains.

    Arm segment capsules join shoulder, elbow, wrist and palm tip.
    """

    torso_pose: RigidTransform = field(
        default_factory=lambda: RigidTransform.from_xyz_rpy((1.1, 0.0, 0.85), (0.0, 0.0, np.pi / 2))
    )
    torso_half_extents: tuple[float, float, float] = (0.20, 0.15, 0.30)
    chest_point: tuple[float, float, float] = (0.0, 0.0, 0.22)
    shoulders: tuple[tuple[float, float, float], tuple[float, float, float]] = ((0.18, 0.0, 0.22), (-0.18, 0.0, 0.22))
    arm: tuple[ArmJoint, ...] = field(default_factory=_default_arm)
    capsule_radius: float = 0.05
    humerus_tracker: tuple[float, float, float] = (0.0, 0.15, 0.0)
    palm_tracker: tuple[float, float, float] = (0.0, 0.05, 0.0)
    workspace_margin: float = 0.1

    def __post_init__(self):
        if len(self.arm) != ARM_JOINTS:
            raise ValueError("each arm needs exactly 7 joints")
        lengths = self.segment_lengths
        if any(L <= 0 for L in lengths):
            raise ValueError("segment lengths must be positive")
        if self.capsule_radius <= 0:
            raise ValueError("capsule radius must be positive")

    @property
    def segment_lengths(self) -> tuple[float, float, float]:
        return tuple(float(np.linalg.norm(self.arm[i].offset)) for i in (2, 3, 6))

    def translated(self, t) -> MannequinModel:
        pose = RigidTransform.translation_only(t) @ self.torso_pose
        return replace(self, torso_pose=pose)


def check_config(cfg) -> np.ndarray:
    cfg = np.asarray(cfg, dtype=float)
    if cfg.shape != (N_ANGLES,):
        raise ValueError(f"a mannequin configuration has {N_ANGLES} angles, got shape {cfg.shape}")
    if not np.all(np.isfinite(cfg)):
        raise ValueError("mannequin angles must be finite")
    return cfg


@dataclass(frozen=True)
class ArmState:
    """World-frame result of one arm's forward kinematics."""

    link_frames: tuple[RigidTransform, ...]  # joint k's link frame, k = 1..7
    joint_origins: np.ndarray  # (4, 3): shoulder, elbow, wrist, palm tip
    humerus_tracker: np.ndarray
    palm_tracker: np.ndarray


def mannequin_fk(model: MannequinModel, cfg) -> dict[str, ArmState]:
    cfg = check_config(cfg)
    out = {}
    for side, mount, angles in zip(ARMS, model.shoulders, (cfg[:ARM_JOINTS], cfg[ARM_JOINTS:])):
        T = model.torso_pose @ RigidTransform.translation_only(mount)
        links = []
        for joint, theta in zip(model.arm, angles):
            T = T @ RigidTransform(axis_angle_matrix(joint.axis, theta), np.zeros(3))
            links.append(T)
            T = T @ RigidTransform.translation_only(joint.offset)
        shoulder = links[0].translation
        elbow = links[2].apply(np.array(model.arm[2].offset))
        wrist = links[3].apply(np.array(model.arm[3].offset))
        tip = links[6].apply(np.array(model.arm[6].offset))
        out[side] = ArmState(
            link_frames=tuple(links),
            joint_origins=np.array([shoulder, elbow, wrist, tip]),
            humerus_tracker=links[2].apply(np.array(model.humerus_tracker)),
            palm_tracker=links[6].apply(np.array(model.palm_tracker)),
        )
    return out


def tracker_points(model: MannequinModel, cfg) -> dict[str, np.ndarray]:
    fk = mannequin_fk(model, cfg)
    return {f"{side}_{name}": getattr(fk[side], f"{name}_tracker") for side in ARMS for name in ("humerus", "palm")}


def bodies_at(model: MannequinModel, cfg) -> list[CollisionBody]:
    """Torso box plus one capsule per arm segment, with stable ids."""
    fk = mannequin_fk(model, cfg)
    bodies = [CollisionBody("user_torso", Box(model.torso_half_extents), model.torso_pose, Tag.USER)]
    for side in ARMS:
        pts = fk[side].joint_origins
        for k, name in enumerate(SEGMENTS):
            bodies.append(
                CollisionBody(
                    f"user_{side}_{name}",
                    Capsule(tuple(pts[k]), tuple(pts[k + 1]), model.capsule_radius),
                    RigidTransform.identity(),
                    Tag.USER,
                )
            )
    return bodies


@dataclass(frozen=True)
class WorkspaceSphere:
    center: np.ndarray
    radius: float

    def __post_init__(self):
        if not self.radius > 0:
            raise ValueError("workspace sphere radius must be positive")

    def contains(self, p) -> bool:
        return bool(np.linalg.norm(np.asarray(p) - self.center) < self.radius)

    def body(self, body_id: str = "workspace_sphere") -> CollisionBody:
        return CollisionBody(body_id, Sphere(self.radius), RigidTransform.translation_only(self.center), Tag.WORKSPACE_SPHERE)


def arm_reach(model: MannequinModel) -> float:
    """Largest distance from the chest point to a palm tip over all arm postures."""
    chest = np.array(model.chest_point)
    return max(float(np.linalg.norm(np.array(s) - chest)) for s in model.shoulders) + sum(model.segment_lengths)


def workspace_sphere(model: MannequinModel) -> WorkspaceSphere:
    center = model.torso_pose.apply(np.array(model.chest_point))
    return WorkspaceSphere(center, arm_reach(model) + model.workspace_margin)


@dataclass(frozen=True)
class MotionScript:
    """Keyframed mannequin motion, linearly interpolated per joint."""

    times: np.ndarray
    configs: np.ndarray  # (K, 14)

    def __post_init__(self):
        t = np.asarray(self.times, dtype=float).reshape(-1)
        c = np.asarray(self.configs, dtype=float).reshape(-1, N_ANGLES)
        if len(t) == 0 or len(t) != len(c):
            raise ValueError("a script needs at least one keyframe with one configuration each")
        if np.any(np.diff(t) <= 0):
            raise ValueError("keyframe times must be strictly increasing")
        if not np.all(np.isfinite(c)):
            raise ValueError("keyframe angles must be finite")
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "configs", c)

    @classmethod
    def static(cls, cfg) -> MotionScript:
        return cls(np.zeros(1), check_config(cfg)[None])

    @property
    def duration(self) -> float:
        return float(self.times[-1])


def config_at(script: MotionScript, t: float) -> np.ndarray:
    if t < 0:
        raise ValueError("script time must be non-negative")
    times, cfgs = script.times, script.configs
    if t <= times[0]:
        return cfgs[0].copy()
    if t >= times[-1]:
        return cfgs[-1].copy()
    k = int(np.searchsorted(times, t, side="right")) - 1
    w = (t - times[k]) / (times[k + 1] - times[k])
    return cfgs[k] + w * (cfgs[k + 1] - cfgs[k])


def load_script(path) -> MotionScript:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = [h.strip() for h in next(reader)]
        expected = ["t"] + [f"j{i}" for i in range(1, N_ANGLES + 1)]
        if header != expected:
            raise ValueError(f"script header must be {','.join(expected)}")
        rows = [[float(v) for v in row] for row in reader if row]
    data = np.array(rows, dtype=float).reshape(-1, N_ANGLES + 1)
    return MotionScript(data[:, 0], data[:, 1:])


def save_script(path, script: MotionScript) -> None:
    with open(Path(path), "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["t"] + [f"j{i}" for i in range(1, N_ANGLES + 1)])
        for t, c in zip(script.times, script.configs):
            w.writerow([repr(float(t))] + [repr(float(v)) for v in c])
