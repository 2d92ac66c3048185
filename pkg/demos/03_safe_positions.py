"""Scheme 1: precomputed plans between safe positions outside the user's reach.

Every ordered pair of the six safe positions is planned once with the
workspace sphere as an obstacle. Serving a goal stream is then pure lookup.
Run: python3 demos/03_safe_positions.py
"""

import tempfile
from pathlib import Path

from armplan.kinematics import load_robot
from armplan.planners import plan_call_count
from armplan.scenarios import demo_scheme1, load_goals, sphere_margins
from armplan.scenes import load_scene

cache_file = Path(tempfile.mkdtemp()) / "plan_cache.json"
cold = demo_scheme1(cache_path=cache_file, goals=[])
print(f"built {len(cold.cache.entries)} plans with {cold.planner_calls_build} planner calls -> {cache_file}")

goals = load_goals()
print(f"goal stream: {' '.join(goals)}")
before = plan_call_count()
warm = demo_scheme1(cache_path=cache_file, goals=goals)
print(f"served from the cache with {plan_call_count() - before} planner calls")
for start, goal in warm.log.executed:
    print(f"  {start:>10s} -> {goal}")
for e in warm.log.of("idle"):
    print(f"  t={e.t:.2f} s: already at {e.note}, idle")

ticks = [e.q for e in warm.log.events]
margin = sphere_margins(load_robot(), load_scene(), ticks).min()
print(f"closest end-effector approach to the sphere over {len(ticks)} ticks: {margin:.3f} m outside")
