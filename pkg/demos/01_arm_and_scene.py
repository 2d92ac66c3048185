"""Tour of the arm model and the car-interior scene.

Forward kinematics, the elbow-up test, inverse kinematics back to a pose, and
how close the arm is to the seated user at a few named configurations.
Run: python3 demos/01_arm_and_scene.py
"""

import json

import numpy as np

from armplan.armspace import arm_config_space
from armplan.collision import RobotCollisionModel, min_clearance, scene_clearance
from armplan.kinematics import end_effector, ik_damped_least_squares, is_elbow_up, load_robot
from armplan.mannequin import workspace_sphere
from armplan.scenes import bundled_path, load_scene

model = load_robot()
cmodel = RobotCollisionModel.from_robot(model)
scene = load_scene()
seated = scene.snapshot()
sphere = workspace_sphere(scene.mannequin)
print(f"workspace sphere: center {sphere.center.round(3)}, radius {sphere.radius:.2f} m")

poses = json.loads(bundled_path("named_poses.json").read_text())
print(f"\n{'pose':12s} {'end-effector (m)':>26s} {'elbow up':>9s} {'to scene':>9s} {'overall':>8s}")
for name, q in poses.items():
    q = np.array(q)
    ee = end_effector(model, q).translation
    print(f"{name:12s} {np.array2string(ee, precision=3):>26s} {str(is_elbow_up(model, q)):>9s} "
          f"{scene_clearance(model, cmodel, q, seated):9.3f} {min_clearance(model, cmodel, q, seated):8.3f}")

# IK from a nearby guess recovers the handover pose
target = end_effector(model, np.array(poses["handover"]))
guess = np.array(poses["handover"]) + 0.2
res = ik_damped_least_squares(model, target, guess, 200, 1e-4, 1e-3)
err = np.linalg.norm(end_effector(model, res.q).translation - target.translation)
print(f"\nIK to the handover pose: success={res.success} after {res.iterations} iterations, error {err:.1e} m")

# planning spaces add sweep margins so that sampled edge checks are sound
space = arm_config_space(model, cmodel, seated)
margins = space.checker.cmodel.scene_margin
print(f"sweep margins per robot shape at 0.01 rad: {np.round(margins, 4)}")
