"""Scheme 2: slow motion inside the user's workspace with live revalidation.

The robot moves from home to the handover pose at a quarter of its speed
limits. One second in, the scripted user raises the right arm into the
robot's remaining path. The supervisor stops in that tick, replans from where
it stands and finishes.
Run: python3 demos/04_replanning_near_user.py
"""

import numpy as np

from armplan.kinematics import end_effector, load_robot
from armplan.mannequin import load_script
from armplan.scenarios import demo_scheme2
from armplan.scenes import bundled_path

model = load_robot()
for name in ("mannequin_static.csv", "mannequin_adversarial.csv"):
    res = demo_scheme2(script=load_script(bundled_path(name)))
    sup = res.supervisor
    print(f"\n{name}: success={sup.success}, {sup.replans} replans, {len(sup.executed)} ticks")
    for e in sup.log.events:
        if e.kind != "advance":
            ee = end_effector(model, e.q).translation
            print(f"  t={e.t:5.2f} s  snapshot v{e.version:<4d} {e.kind:15s} end-effector {np.round(ee, 3)}")
    speeds = np.array([np.abs(e.qdot) / model.velocity_limits for e in sup.log.of("advance")])
    print(f"  peak joint speed: {speeds.max():.2f} of the limit")
