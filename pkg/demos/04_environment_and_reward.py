"""Drive the control environment with the reference agents.

The observation is an M x M matrix (diagonal: normalized splits,
off-diagonal: normalized link queues); actions pick one intersection and
nudge its split by -2, 0, or +2 seconds; the reward penalizes congested
links with a tenfold multiplier above the heavy threshold.

Run:  python3 demos/04_environment_and_reward.py
"""

import numpy as np

from atsclab import TrafficEnv, load_scenario
from atsclab.learner import FixedTimeAgent, RandomAgent, run_episode
from atsclab.rlenv import RewardParams, region_reward

# The piecewise per-link reward with the default constants:
params = RewardParams(w_t=0.0)
for q in (5, 10, 15, 25, 30, 50):
    print(f"  queue {q:2d} -> link reward {region_reward({'x': q}, 0.0, params):8.1f}")

spec = load_scenario("scenario1")
env = TrafficEnv(spec)
obs, info = env.reset(seed=0)
print(f"\nobservation shape {obs.shape}, action count {env.action_count}")
print("diagonal (normalized splits):", np.diag(obs))
print("sensed queues entering the episode:", info["queues_raw"])

for agent, name in ((FixedTimeAgent(), "fixed-time"),
                    (RandomAgent(env.action_count, seed=3), "random")):
    traj, stats = run_episode(env, agent, seed=0)
    print(f"\n{name}: total reward {stats['total_reward']:12.1f}, "
          f"mean travel time {stats['mean_tt_per_vehicle']:7.1f} s, "
          f"max sensed queue {stats['max_sensed_queue']}")
    print(f"  final splits: {stats['final_splits']}")
