"""Binding of the robot, its collision model and a scene snapshot into a planning space."""

from __future__ import annotations

from .collision import DEFAULT_RESOLUTION, CollisionChecker, RobotCollisionModel, SceneSnapshot, sweep_margins
from .kinematics import RobotModel
from .planners import ConfigSpace


def arm_config_space(model: RobotModel, cmodel: RobotCollisionModel, scene: SceneSnapshot,
                     resolution: float = DEFAULT_RESOLUTION, with_clearance: bool = True,
                     certified: bool = True) -> ConfigSpace:
    """Planning space over the joint limits.

    With ``certified`` every check demands the sweep margins of the
    resolution, so a segment whose samples pass is free everywhere.
    """
    if certified:
        cmodel = cmodel.with_margins(*sweep_margins(model, cmodel, resolution))
    checker = CollisionChecker(model, cmodel, scene, resolution)
    # the cost map only looks at obstacles; some link pairs sit at a fixed
    # distance from each other and would flatten it

    def clearance(q):
        return checker.scene_clearance(q) if checker.is_valid(q) else 0.0

    space = ConfigSpace(
        bounds=model.limits,
        is_valid=checker.is_valid,
        motion_valid=checker.motion_valid,
        clearance=clearance if with_clearance else None,
    )
    space.checker = checker
    return space
