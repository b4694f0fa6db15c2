"""Policy network, REINFORCE-with-baseline training, and reference agents.

The policy is a two-hidden-layer tanh MLP (M*M -> 32 -> 32 -> 3M) over the
row-major flattened observation, producing action logits.  Training is
score-function policy gradient on discounted returns against an
exponential-moving-average baseline, plus an entropy bonus; one gradient
ascent step per episode.  Everything is float64 numpy and fully seeded.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field

import numpy as np

from .rlenv import TrafficEnv

HIDDEN = 32
CHECKPOINT_MAGIC = b"ATSCPOL1"


@dataclass
class PolicyParams:
    w1: np.ndarray
    b1: np.ndarray
    w2: np.ndarray
    b2: np.ndarray
    w3: np.ndarray
    b3: np.ndarray

    @classmethod
    def create(cls, obs_size: int, action_count: int, seed: int = 0,
               hidden: int = HIDDEN) -> "PolicyParams":
        """Uniform init in +/- 1/sqrt(fan_in) per layer, biases zero."""
        rng = np.random.default_rng(seed)

        def layer(fan_in, fan_out):
            bound = 1.0 / np.sqrt(fan_in)
            return rng.uniform(-bound, bound, size=(fan_out, fan_in))

        return cls(layer(obs_size, hidden), np.zeros(hidden),
                   layer(hidden, hidden), np.zeros(hidden),
                   layer(hidden, action_count), np.zeros(action_count))

    @classmethod
    def zeros(cls, obs_size: int, action_count: int, hidden: int = HIDDEN):
        return cls(np.zeros((hidden, obs_size)), np.zeros(hidden),
                   np.zeros((hidden, hidden)), np.zeros(hidden),
                   np.zeros((action_count, hidden)), np.zeros(action_count))

    def arrays(self) -> dict[str, np.ndarray]:
        return {"w1": self.w1, "b1": self.b1, "w2": self.w2, "b2": self.b2,
                "w3": self.w3, "b3": self.b3}

    def copy(self) -> "PolicyParams":
        return PolicyParams(**{k: v.copy() for k, v in self.arrays().items()})

    @property
    def obs_size(self) -> int:
        return self.w1.shape[1]

    @property
    def action_count(self) -> int:
        return self.w3.shape[0]


def policy_forward(params: PolicyParams, observation: np.ndarray) -> np.ndarray:
    """Action logits for one observation (matrix or already-flat vector)."""
    x = np.asarray(observation, dtype=np.float64).reshape(-1)
    if x.size != params.obs_size:
        raise ValueError(f"observation size {x.size}, expected {params.obs_size}")
    h1 = np.tanh(params.w1 @ x + params.b1)
    h2 = np.tanh(params.w2 @ h1 + params.b2)
    return params.w3 @ h2 + params.b3


def softmax(logits: np.ndarray) -> np.ndarray:
    z = logits - np.max(logits)
    e = np.exp(z)
    return e / e.sum()


def sample_action(logits: np.ndarray, rng: np.random.Generator) -> int:
    """Inverse-CDF sample from softmax(logits) on the given generator."""
    if not np.all(np.isfinite(logits)):
        raise FloatingPointError("non-finite logits")
    cdf = np.cumsum(softmax(logits))
    r = rng.random()
    return int(np.searchsorted(cdf, r, side="right"))


def greedy_action(logits: np.ndarray) -> int:
    """Argmax with ties resolved to the lowest index."""
    if not np.all(np.isfinite(logits)):
        raise FloatingPointError("non-finite logits")
    return int(np.argmax(logits))


@dataclass(frozen=True)
class TrainConfig:
    learning_rate: float = 0.003
    episodes: int = 500
    gamma: float = 0.99
    entropy_coef: float = 0.01
    baseline_decay: float = 0.9
    seed: int = 0
    checkpoint_every: int = 0  # 0 = only final
    reward_scale: float = 1.0  # applied to rewards before returns
    grad_clip: float = 0.0     # 0 = no clipping (global L2 norm otherwise)

    def __post_init__(self):
        if self.learning_rate <= 0:
            raise ValueError("learning rate must be positive")
        if not 0 < self.gamma <= 1:
            raise ValueError("gamma must be in (0, 1]")
        if self.entropy_coef < 0:
            raise ValueError("entropy coefficient must be non-negative")


@dataclass
class Trajectory:
    observations: list[np.ndarray] = field(default_factory=list)
    actions: list[int] = field(default_factory=list)
    rewards: list[float] = field(default_factory=list)

    def append(self, obs, action, reward):
        self.observations.append(obs)
        self.actions.append(action)
        self.rewards.append(reward)

    def __len__(self):
        return len(self.actions)


def discounted_returns(rewards, gamma: float) -> np.ndarray:
    out = np.zeros(len(rewards))
    g = 0.0
    for i in range(len(rewards) - 1, -1, -1):
        g = rewards[i] + gamma * g
        out[i] = g
    return out


def policy_objective_grad(params: PolicyParams, observations, actions,
                          advantages, entropy_coef: float):
    """Gradient of sum_t [log pi(a_t|s_t) * adv_t + beta * H(pi(.|s_t))].

    Returns (grads keyed like params.arrays(), stats dict).
    """
    grads = {k: np.zeros_like(v) for k, v in params.arrays().items()}
    entropy_total = 0.0
    for obs, a, adv in zip(observations, actions, advantages):
        x = np.asarray(obs, dtype=np.float64).reshape(-1)
        h1 = np.tanh(params.w1 @ x + params.b1)
        h2 = np.tanh(params.w2 @ h1 + params.b2)
        logits = params.w3 @ h2 + params.b3
        p = softmax(logits)
        logp = np.log(p)
        entropy = -float(p @ logp)
        entropy_total += entropy

        one_hot = np.zeros_like(p)
        one_hot[a] = 1.0
        # d/dlogits of [logpi * adv]  and of the entropy bonus
        dz = adv * (one_hot - p) - entropy_coef * p * (logp + entropy)

        grads["w3"] += np.outer(dz, h2)
        grads["b3"] += dz
        dh2 = (params.w3.T @ dz) * (1.0 - h2 * h2)
        grads["w2"] += np.outer(dh2, h1)
        grads["b2"] += dh2
        dh1 = (params.w2.T @ dh2) * (1.0 - h1 * h1)
        grads["w1"] += np.outer(dh1, x)
        grads["b1"] += dh1
    return grads, {"entropy": entropy_total / max(len(actions), 1)}


def reinforce_update(params: PolicyParams, trajectory: Trajectory,
                     config: TrainConfig, baseline_state: float
                     ) -> tuple[PolicyParams, float, dict]:
    """One gradient-ascent step from a complete episode.

    The baseline is an EMA of mean discounted return; advantages are
    G_t - baseline with the pre-update baseline.
    """
    rewards = [r * config.reward_scale for r in trajectory.rewards]
    returns = discounted_returns(rewards, config.gamma)
    advantages = returns - baseline_state
    grads, stats = policy_objective_grad(
        params, trajectory.observations, trajectory.actions, advantages,
        config.entropy_coef)

    norm = float(np.sqrt(sum(float((g * g).sum()) for g in grads.values())))
    if not np.isfinite(norm):
        raise FloatingPointError(
            f"non-finite policy gradient (|traj|={len(trajectory)})")
    scale = config.learning_rate
    if config.grad_clip and norm > config.grad_clip:
        scale *= config.grad_clip / norm

    arrays = params.arrays()
    new = PolicyParams(**{k: arrays[k] + scale * grads[k] for k in arrays})
    mean_return = float(returns.mean()) if len(returns) else 0.0
    new_baseline = (config.baseline_decay * baseline_state
                    + (1.0 - config.baseline_decay) * mean_return)
    diag = {"mean_return": mean_return, "grad_norm": norm,
            "entropy": stats["entropy"], "baseline": new_baseline}
    return new, new_baseline, diag


def run_episode(env: TrafficEnv, agent, seed: int) -> tuple[Trajectory, dict]:
    """Roll one full episode; returns the trajectory and summary stats."""
    obs, info = env.reset(seed=seed)
    agent.begin_episode(seed)
    traj = Trajectory()
    queue_samples = []
    truncated = False
    while not truncated:
        action = agent.act(obs)
        next_obs, reward, _, truncated, info = env.step(action)
        traj.append(obs, action, reward)
        step = info["step"]
        for link in sorted(info["queues_raw"]):
            queue_samples.append((link, step, info["queues_raw"][link]))
        obs = next_obs
    metrics = env.sim.snapshot_metrics(0, env.spec.horizon)
    mean_tt = (metrics.total_travel_time / metrics.vehicles_entered
               if metrics.vehicles_entered else None)
    stats = {
        "total_reward": float(sum(traj.rewards)),
        "mean_tt_per_vehicle": mean_tt,
        "vehicles": metrics.vehicles_entered,
        "queue_samples": queue_samples,
        "max_sensed_queue": max((q for _, _, q in queue_samples), default=0),
        "final_splits": {n: env.sim.schedules[n].split_at(env.sim.clock)
                         for n in env.network.intersections},
    }
    return traj, stats


class PolicyAgent:
    """Greedy (default) or sampling wrapper around PolicyParams."""

    def __init__(self, params: PolicyParams, greedy: bool = True, seed: int = 0):
        self.params = params
        self.greedy = greedy
        self._seed = seed
        self._rng = np.random.default_rng(seed)

    def begin_episode(self, seed: int):
        if not self.greedy:
            self._rng = np.random.default_rng(np.random.SeedSequence([self._seed, seed]))

    def act(self, obs) -> int:
        logits = policy_forward(self.params, obs)
        return greedy_action(logits) if self.greedy else sample_action(logits, self._rng)


class FixedTimeAgent:
    """Always emits a zero-delta action: splits never move."""

    def begin_episode(self, seed: int):
        pass

    def act(self, obs) -> int:
        return 1  # intersection 0, delta 0


class RandomAgent:
    """Uniform over the action space, seeded per episode."""

    def __init__(self, action_count: int, seed: int = 0):
        self.action_count = action_count
        self._seed = seed
        self._rng = np.random.default_rng(seed)

    def begin_episode(self, seed: int):
        self._rng = np.random.default_rng(np.random.SeedSequence([self._seed, seed]))

    def act(self, obs) -> int:
        return int(self._rng.integers(self.action_count))


def train(env: TrafficEnv, config: TrainConfig, out_dir=None,
          progress=None) -> tuple[PolicyParams, list[tuple[int, float]]]:
    """REINFORCE over `config.episodes` episodes; returns final params and
    the per-episode total-reward curve.

    Episode e runs on seed config.seed + e.  Checkpoints land in out_dir as
    policy_epNNNN.ckpt when a cadence is set, plus policy.ckpt at the end.
    """
    obs_size = env.M * env.M
    params = PolicyParams.create(obs_size, env.action_count, seed=config.seed)
    agent = PolicyAgent(params, greedy=False, seed=config.seed)
    baseline = 0.0
    curve: list[tuple[int, float]] = []
    for ep in range(config.episodes):
        agent.params = params
        traj, stats = run_episode(env, agent, seed=config.seed + ep)
        params, baseline, diag = reinforce_update(params, traj, config, baseline)
        curve.append((ep, stats["total_reward"]))
        if progress:
            progress(ep, stats, diag)
        if out_dir and config.checkpoint_every and (ep + 1) % config.checkpoint_every == 0:
            save_checkpoint(params, f"{out_dir}/policy_ep{ep + 1:04d}.ckpt")
    if out_dir:
        save_checkpoint(params, f"{out_dir}/policy.ckpt")
        write_curve(curve, f"{out_dir}/learning_curve.csv")
    return params, curve


def write_curve(curve, path) -> None:
    with open(path, "w") as fh:
        fh.write("episode,total_reward\n")
        for ep, total in curve:
            fh.write(f"{ep},{total!r}\n")


@dataclass
class EvalReport:
    agent: str
    seeds: list[int]
    episode_rewards: list[float]
    episode_mean_tt: list[float | None]
    queue_samples: list[tuple[str, int, int, int]]  # (link, step, episode, q)
    max_sensed_queue: int

    @property
    def mean_reward(self) -> float:
        return float(np.mean(self.episode_rewards))

    @property
    def mean_tt_per_vehicle(self) -> float | None:
        vals = [v for v in self.episode_mean_tt if v is not None]
        return float(np.mean(vals)) if vals else None


def evaluate(env: TrafficEnv, agent, agent_name: str, seeds) -> EvalReport:
    """Greedy evaluation across seeds; queue samples are collected once per
    (link, control step), L x steps rows per episode."""
    rewards, tts, samples = [], [], []
    for episode, seed in enumerate(seeds):
        _, stats = run_episode(env, agent, seed=seed)
        rewards.append(stats["total_reward"])
        tts.append(stats["mean_tt_per_vehicle"])
        samples.extend((link, step, episode, q)
                       for link, step, q in stats["queue_samples"])
    max_q = max((q for _, _, _, q in samples), default=0)
    return EvalReport(agent_name, list(seeds), rewards, tts, samples, max_q)


# -- checkpoint format ---------------------------------------------------
# magic (8 bytes) | version u32 | array count u32
# per array: name length u16, name utf-8, ndim u8, dims u32 each
# then all array payloads as little-endian float64 in header order.

def save_checkpoint(params: PolicyParams, path) -> None:
    arrays = params.arrays()
    with open(path, "wb") as fh:
        fh.write(CHECKPOINT_MAGIC)
        fh.write(struct.pack("<II", 1, len(arrays)))
        for name, arr in arrays.items():
            encoded = name.encode()
            fh.write(struct.pack("<H", len(encoded)))
            fh.write(encoded)
            fh.write(struct.pack("<B", arr.ndim))
            fh.write(struct.pack(f"<{arr.ndim}I", *arr.shape))
        for arr in arrays.values():
            fh.write(np.ascontiguousarray(arr, dtype="<f8").tobytes())


def load_checkpoint(path) -> PolicyParams:
    with open(path, "rb") as fh:
        magic = fh.read(8)
        if magic != CHECKPOINT_MAGIC:
            raise ValueError(f"not a policy checkpoint: {path}")
        version, count = struct.unpack("<II", fh.read(8))
        if version != 1:
            raise ValueError(f"unsupported checkpoint version {version}")
        shapes = []
        for _ in range(count):
            (name_len,) = struct.unpack("<H", fh.read(2))
            name = fh.read(name_len).decode()
            (ndim,) = struct.unpack("<B", fh.read(1))
            dims = struct.unpack(f"<{ndim}I", fh.read(4 * ndim))
            shapes.append((name, dims))
        arrays = {}
        for name, dims in shapes:
            n = int(np.prod(dims)) if dims else 1
            buf = fh.read(8 * n)
            arrays[name] = np.frombuffer(buf, dtype="<f8").reshape(dims).copy()
    return PolicyParams(**arrays)
