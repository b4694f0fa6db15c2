"""Single-agent control environment over the mesoscopic simulator.

Observation
    An M x M matrix in [0, 1] for M signalized intersections.  Diagonal
    entry (i, i) is the normalized split at intersection i,
    (s_i - s_lb) / (s_ub - s_lb).  Off-diagonal entry (i, j) is the sensed
    queue of the directed link i -> j divided by q_ub when that link exists,
    and 0 otherwise, so the non-zero pattern mirrors network adjacency.

Action
    One integer in [0, 3M): pick an intersection m = a // 3 and nudge its
    split by (-ds, 0, +ds)[a % 3].  The change is cumulative, clamps to the
    split bounds, and latches at the cycle boundary where the control step
    lands.  One intersection is adjusted per step, so the action space grows
    linearly with M.

Reward
    Sum over weighted links of a piecewise queue penalty: zero up to the
    light-congestion threshold, -(w_l * q) - (w_t * t) in light congestion,
    and both terms multiplied by w_cp above the heavy threshold, where t is
    the vehicle-seconds accrued network-wide over the elapsed control
    interval.  Boundaries resolve toward the milder branch.

Episodes
    A fixed warm-up under unchanged signals, then a fixed number of control
    steps of one cycle each; the episode truncates (never terminates) on the
    last step.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .mesosim import Simulation, StepMetrics
from .netmodel import Link, Network, generate_demand
from .scenario import ScenarioSpec
from .sensing import queue_from_active, select_probes, upstream_green_start
from .signals import PlanSchedule, SignalPlan


class EpisodeFinishedError(RuntimeError):
    """step() called after the episode truncated."""


class InvalidActionError(ValueError):
    """Action code outside [0, 3M)."""


@dataclass(frozen=True)
class RewardParams:
    q_lc: int = 10
    q_hc: int = 25
    q_ub: int = 50
    w_cp: float = 10.0
    w_t: float = 0.0
    w_l: dict[str, float] = field(default_factory=dict)
    w_l_default: float = 1.0
    t_once_per_region: bool = False

    def __post_init__(self):
        if not 0 < self.q_lc < self.q_hc <= self.q_ub:
            raise ValueError("thresholds must satisfy 0 < q_lc < q_hc <= q_ub")
        if self.w_cp < 0 or self.w_t < 0:
            raise ValueError("weights must be non-negative")

    def weight(self, link: str) -> float:
        return self.w_l.get(link, self.w_l_default)


@dataclass(frozen=True)
class EpisodeConfig:
    warmup: int = 1800
    horizon: int = 16200
    control_interval: int = 100
    initial_split: int = 50

    def __post_init__(self):
        if (self.horizon - self.warmup) % self.control_interval != 0:
            raise ValueError("episode must hold a whole number of control intervals")

    @property
    def steps(self) -> int:
        return (self.horizon - self.warmup) // self.control_interval


def action_space_size(M: int) -> int:
    """3 actions per intersection: the action space is linear in M."""
    if M < 1:
        raise ValueError("M must be positive")
    return 3 * M


def decode_action(a: int, M: int, delta_s: int = 2) -> tuple[int, int]:
    """Split an action code into (intersection index, split delta)."""
    if not 0 <= a < 3 * M:
        raise InvalidActionError(f"action {a} outside [0, {3 * M})")
    return a // 3, (-delta_s, 0, delta_s)[a % 3]


def region_reward(queues: dict[str, float], travel_time: float,
                  params: RewardParams) -> float:
    """Piecewise per-link penalty summed over the region.

    The travel-time term enters once per congested link (the literal
    reading); with ``t_once_per_region`` it enters once, scaled by the worst
    active penalty multiplier.
    """
    total = 0.0
    worst = 0.0
    for link in sorted(queues):
        q = queues[link]
        if q <= params.q_lc:
            continue
        w = params.weight(link)
        mult = 1.0 if q <= params.q_hc else params.w_cp
        total -= mult * w * q
        if params.t_once_per_region:
            worst = max(worst, mult)
        else:
            total -= mult * params.w_t * travel_time
    if params.t_once_per_region and worst:
        total -= worst * params.w_t * travel_time
    return total


class TrafficEnv:
    """reset/step control loop around one simulated scenario.

    One instance is strictly sequential; make independent instances for
    parallel rollouts.  All randomness flows from the seed passed to
    ``reset``, so (scenario, seed, action sequence) replays exactly.
    """

    def __init__(self, spec: ScenarioSpec, check_conservation_every: int = 100):
        self.spec = spec
        self.network: Network = spec.build_network()
        self.episode = EpisodeConfig(spec.warmup, spec.horizon,
                                     spec.control_interval, spec.initial_split)
        self.reward_params = RewardParams(
            q_lc=spec.q_lc, q_hc=spec.q_hc, q_ub=spec.q_ub, w_cp=spec.w_cp,
            w_t=spec.w_t, w_l=spec.link_weights(self.network),
            w_l_default=spec.w_l_default, t_once_per_region=spec.t_once_per_region)
        self._check_every = check_conservation_every
        self._monitored: list[Link] = self.network.internal_links
        self._upstream_mv = {}
        self.sim: Simulation | None = None
        self._step_index = 0
        self._truncated = True  # no episode yet

    # -- core API ------------------------------------------------------------

    @property
    def M(self) -> int:
        return self.network.M

    @property
    def action_count(self) -> int:
        return action_space_size(self.M)

    def reset(self, seed: int = 0) -> tuple[np.ndarray, dict]:
        spec = self.spec
        arrivals = generate_demand(self.network, spec.od_matrix(), seed)
        schedules = {}
        for n in self.network.intersections:
            plan = SignalPlan(cycle=spec.cycle, split=spec.initial_split,
                              left_phase=spec.left_phase, yellow=spec.yellow,
                              all_red=spec.all_red,
                              offset=spec.intersection_offset(n),
                              split_lb=spec.split_lb, split_ub=spec.split_ub)
            schedules[n] = PlanSchedule(plan)
        self.sim = Simulation(self.network, schedules, arrivals,
                              spec.saturation_rates(),
                              check_conservation_every=self._check_every)
        self._probes = None
        if spec.sensing_mode == "probe":
            rng = np.random.default_rng(np.random.SeedSequence([seed, 1]))
            self._probes = select_probes(
                (a.vehicle for a in arrivals.arrivals), spec.penetration, rng)
        self._step_index = 0
        self._truncated = False
        self.sim.run_until(spec.warmup)
        obs = self._observation()
        return obs, self._info(queues_raw=self._sense_raw(), metrics=None)

    def step(self, action: int) -> tuple[np.ndarray, float, bool, bool, dict]:
        if self.sim is None:
            raise RuntimeError("call reset() before step()")
        if self._truncated:
            raise EpisodeFinishedError("episode finished; call reset()")
        m, delta = decode_action(action, self.M, self.spec.delta_s)
        node = self.network.intersections[m]
        t0 = self.sim.clock
        self.sim.adjust_split(node, delta, t0)
        self.sim.run_until(t0 + self.spec.control_interval)
        t1 = self.sim.clock

        raw = self._sense_raw()
        clamped = {k: min(v, self.spec.q_ub) for k, v in raw.items()}
        metrics = self.sim.snapshot_metrics(t0, t1)
        reward = region_reward(clamped, metrics.total_travel_time, self.reward_params)

        self._step_index += 1
        truncated = self._step_index >= self.episode.steps
        self._truncated = truncated
        obs = self._observation()
        info = self._info(queues_raw=raw, metrics=metrics)
        return obs, reward, False, truncated, info

    # -- internals -------------------------------------------------------

    def _sense_raw(self) -> dict[str, int]:
        """Unclamped criteria-based queue count per monitored link."""
        sim = self.sim
        t = sim.clock
        out: dict[str, int] = {}
        probe = self._probes
        p = self.spec.penetration
        for link in self._monitored:
            gu = upstream_green_start(self.network, sim.schedules, link, t)
            if gu is None:
                out[link.name] = 0
                continue
            active = sim.store.active_on(link.name)
            if probe is None:
                out[link.name] = queue_from_active(active, gu)
            else:
                out[link.name] = queue_from_active(active, gu, probe, p)
        return out

    def _observation(self) -> np.ndarray:
        spec = self.spec
        M = self.M
        obs = np.zeros((M, M), dtype=np.float64)
        span = spec.split_ub - spec.split_lb
        t = self.sim.clock
        for i, n in enumerate(self.network.intersections):
            s = self.sim.schedules[n].split_at(t)
            obs[i, i] = (s - spec.split_lb) / span
        raw = self._sense_raw()
        for link in self._monitored:
            q = min(raw[link.name], spec.q_ub)
            obs[link.src, link.dst] = q / spec.q_ub
        return obs

    def _info(self, queues_raw: dict[str, int], metrics: StepMetrics | None) -> dict:
        t = self.sim.clock
        return {
            "clock": t,
            "step": self._step_index,
            "splits": {n: self.sim.schedules[n].split_at(t)
                       for n in self.network.intersections},
            "queues_raw": queues_raw,
            "queues": {k: min(v, self.spec.q_ub) for k, v in queues_raw.items()},
            "physical_queues": self.sim.queue_counts(),
            "metrics": metrics,
        }
