"""Scene files: static environment bodies plus an optional seated mannequin."""

from __future__ import annotations

import json
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import numpy as np

from .collision import CollisionBody, SceneSnapshot, body_from_dict, body_to_dict
from .mannequin import MannequinModel, N_ANGLES, bodies_at, check_config, workspace_sphere
from .transforms import RigidTransform


@dataclass(frozen=True)
class SceneDescription:
    environment: tuple[CollisionBody, ...]
    mannequin: MannequinModel | None = None
    seated_config: np.ndarray | None = None

    def user_bodies(self, cfg=None) -> list[CollisionBody]:
        if self.mannequin is None:
            return []
        cfg = self.seated_config if cfg is None else cfg
        return bodies_at(self.mannequin, cfg)

    def sphere_body(self) -> CollisionBody:
        if self.mannequin is None:
            raise ValueError("scene has no mannequin, hence no workspace sphere")
        return workspace_sphere(self.mannequin).body()

    def snapshot(self, *, user: bool = True, sphere: bool = False, cfg=None, version: int = 0) -> SceneSnapshot:
        bodies = list(self.environment)
        if user:
            bodies += self.user_bodies(cfg)
        if sphere:
            bodies.append(self.sphere_body())
        return SceneSnapshot(bodies, version)


def scene_from_dict(data: dict) -> SceneDescription:
    env = tuple(body_from_dict(b) for b in data.get("bodies", ()))
    man = data.get("mannequin")
    if man is None:
        return SceneDescription(env)
    model = MannequinModel(
        torso_pose=RigidTransform.from_xyz_rpy(man.get("torso_xyz", (1.1, 0.0, 0.85)), man.get("torso_rpy", (0.0, 0.0, np.pi / 2))),
        workspace_margin=float(man.get("workspace_margin", 0.1)),
    )
    cfg = check_config(man.get("config", np.zeros(N_ANGLES)))
    return SceneDescription(env, model, cfg)


def scene_to_dict(scene: SceneDescription) -> dict:
    out = {"bodies": [body_to_dict(b) for b in scene.environment]}
    if scene.mannequin is not None:
        pose = scene.mannequin.torso_pose
        out["mannequin"] = {
            "torso_xyz": [float(v) for v in pose.translation],
            "torso_rpy": [float(v) for v in pose.rpy()],
            "config": [float(v) for v in scene.seated_config],
            "workspace_margin": scene.mannequin.workspace_margin,
        }
    return out


def load_scene(path=None) -> SceneDescription:
    """Load a scene JSON file; the bundled car-interior scene if ``path`` is None."""
    if path is None:
        text = resources.files("armplan.data").joinpath("car_interior.json").read_text()
    else:
        text = Path(path).read_text()
    return scene_from_dict(json.loads(text))


def bundled_path(name: str) -> Path:
    """Filesystem path of a bundled data file."""
    return Path(str(resources.files("armplan.data").joinpath(name)))
