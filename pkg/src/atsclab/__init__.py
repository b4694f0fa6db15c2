"""atsclab: a laboratory for regional adaptive traffic signal control.

Deterministic mesoscopic simulation of signalized grids, probe-vehicle queue
sensing, a queue-driven single-agent control environment, a small policy
gradient learner, and a wire protocol for external agents.
"""

__version__ = "0.1.0"

from .netmodel import (ArrivalSchedule, Network, ODMatrix, Route, Turn,
                       build_grid, generate_demand, shortest_route)
from .signals import (Movement, PlanSchedule, SignalPlan, apply_split,
                      green_start_after, green_start_before, is_green,
                      phase_timeline)
from .mesosim import (LinkRecord, RecordStore, SaturationRates, Simulation,
                      StepMetrics)
from .sensing import (QueueEstimate, mean_link_travel_time, probe_queue,
                      select_probes, true_queue)
from .scenario import ScenarioSpec, load_scenario, save_scenario
from .rlenv import (EpisodeConfig, EpisodeFinishedError, InvalidActionError,
                    RewardParams, TrafficEnv, action_space_size, decode_action,
                    region_reward)
from .learner import (EvalReport, FixedTimeAgent, PolicyAgent, PolicyParams,
                      RandomAgent, TrainConfig, Trajectory, evaluate,
                      load_checkpoint, policy_forward, reinforce_update,
                      sample_action, save_checkpoint, train)
from .harness import export_metrics, make_agent, run_scenario
