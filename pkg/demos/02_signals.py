"""Inspect the four-phase signal plan and its single adjustable split.

Run:  python3 demos/02_signals.py
"""

from atsclab import Movement, SignalPlan, apply_split, phase_timeline
from atsclab.netmodel import NS, WE, Turn
from atsclab.signals import PlanSchedule, green_start_after, green_start_before

plan = SignalPlan()  # cycle 100 s, split 50 s, left 8 s, yellow 2 s, all-red 2 s
print("phase timeline of the first cycle (split = 50):")
for kind, start, end in phase_timeline(plan, 0):
    print(f"  {kind:3s} [{start:3d}, {end:3d})")

# The split is the north-south green total; pushing it around reallocates
# green time between the north-south and east-west straight phases.
for split in (30, 50, 70):
    d = SignalPlan(split=split).durations
    print(f"split {split}: NS straight {d[0]:2d}s, EW straight {d[2]:2d}s")

# Adjustments are cumulative and clamp at the bounds.
p = plan
for _ in range(12):
    p = apply_split(p, +2)
print("after twelve +2 nudges the split clamps at", p.split)

# Queue sensing leans on green-start queries.
ns = Movement(0, NS, Turn.STRAIGHT)
print("most recent NS-straight green start before t=150:",
      green_start_before(plan, ns, 150))
print("next NS-straight green start after t=41:",
      green_start_after(plan, ns, 41))

# A schedule records split changes over time; changes latch at the next
# cycle boundary, never mid-cycle.
sched = PlanSchedule(plan)
sched.set_split(60, at_time=150)
print("split during cycle 1:", sched.split_at(199),
      "/ from cycle 2:", sched.split_at(200))
we = Movement(1, WE, Turn.STRAIGHT)
print("EW-straight green start after t=160 reflects the new split:",
      sched.green_start_after(we, 160))
