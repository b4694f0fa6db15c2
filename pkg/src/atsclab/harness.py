"""Run orchestration: scenario runs, artifact files, consolidated reports.

A run directory holds:

    manifest.json       scenario + agent + seeds + package version
    queues.csv          link,step,episode,q   (one row per link per step)
    travel_time.csv     agent,mean_tt_per_vehicle
    episodes.csv        episode,seed,total_reward,mean_tt_per_vehicle

Queue rows carry the unclamped criteria count, so oversaturation beyond the
reporting bound stays visible in the tables.  Identical invocations write
byte-identical artifacts.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass

from . import __version__
from .learner import (EvalReport, FixedTimeAgent, PolicyAgent, RandomAgent,
                      evaluate, load_checkpoint)
from .rlenv import TrafficEnv
from .scenario import ScenarioSpec

MANIFEST_NAME = "manifest.json"


def make_agent(kind: str, env: TrafficEnv, seed: int = 0):
    """Agent factory for 'fixed', 'random', or 'policy:CKPT_PATH'."""
    if kind == "fixed":
        return FixedTimeAgent()
    if kind == "random":
        return RandomAgent(env.action_count, seed=seed)
    if kind.startswith("policy:"):
        params = load_checkpoint(kind.split(":", 1)[1])
        return PolicyAgent(params, greedy=True)
    raise ValueError(f"unknown agent kind {kind!r}")


def run_scenario(spec: ScenarioSpec, agent_kind: str, out_dir,
                 episodes: int = 1, seed: int = 0,
                 seeds: list[int] | None = None) -> EvalReport:
    """Evaluate an agent on a scenario and persist the artifact files.

    Episode seeds default to seed, seed+1, ... so reruns reproduce exactly.
    """
    os.makedirs(out_dir, exist_ok=True)
    if seeds is None:
        seeds = [seed + i for i in range(episodes)]
    env = TrafficEnv(spec)
    agent = make_agent(agent_kind, env, seed=seed)
    report = evaluate(env, agent, agent_kind, seeds)

    with open(os.path.join(out_dir, "queues.csv"), "w") as fh:
        fh.write("link,step,episode,q\n")
        for link, step, episode, q in report.queue_samples:
            fh.write(f"{link},{step},{episode},{q}\n")

    mean_tt = report.mean_tt_per_vehicle
    with open(os.path.join(out_dir, "travel_time.csv"), "w") as fh:
        fh.write("agent,mean_tt_per_vehicle\n")
        fh.write(f"{agent_kind},{'no-data' if mean_tt is None else repr(mean_tt)}\n")

    with open(os.path.join(out_dir, "episodes.csv"), "w") as fh:
        fh.write("episode,seed,total_reward,mean_tt_per_vehicle\n")
        for i, s in enumerate(report.seeds):
            tt = report.episode_mean_tt[i]
            fh.write(f"{i},{s},{report.episode_rewards[i]!r},"
                     f"{'no-data' if tt is None else repr(tt)}\n")

    manifest = {
        "scenario": spec.to_dict(),
        "agent": agent_kind,
        "seeds": list(seeds),
        "episodes": len(seeds),
        "atsclab_version": __version__,
        "artifacts": ["queues.csv", "travel_time.csv", "episodes.csv"],
        "mean_tt_per_vehicle": mean_tt,
        "mean_reward": report.mean_reward,
        "max_sensed_queue": report.max_sensed_queue,
    }
    with open(os.path.join(out_dir, MANIFEST_NAME), "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return report


def export_metrics(run_dir, out_name: str = "report.csv") -> str:
    """Aggregate every run under run_dir into one table.

    Each immediate subdirectory must hold a manifest; the report adds a
    travel-time ratio column against the fixed-time baseline when one is
    present.  Returns the report path.
    """
    subdirs = sorted(
        d for d in os.listdir(run_dir)
        if os.path.isdir(os.path.join(run_dir, d)))
    if not subdirs:
        raise FileNotFoundError(f"no run directories under {run_dir}")
    missing = [d for d in subdirs
               if not os.path.exists(os.path.join(run_dir, d, MANIFEST_NAME))]
    if missing:
        raise FileNotFoundError(
            "missing manifest in run directories: " + ", ".join(missing))

    rows = []
    for d in subdirs:
        with open(os.path.join(run_dir, d, MANIFEST_NAME)) as fh:
            m = json.load(fh)
        rows.append((d, m["agent"], m["mean_reward"], m["mean_tt_per_vehicle"],
                     m["max_sensed_queue"]))

    baseline_tt = next((tt for _, agent, _, tt, _ in rows if agent == "fixed"), None)
    path = os.path.join(run_dir, out_name)
    with open(path, "w") as fh:
        fh.write("run,agent,mean_reward,mean_tt_per_vehicle,max_sensed_queue,tt_ratio_vs_fixed\n")
        for run, agent, reward, tt, max_q in rows:
            if tt is None or baseline_tt in (None, 0):
                ratio = ""
            else:
                ratio = repr(tt / baseline_tt)
            tt_s = "no-data" if tt is None else repr(tt)
            fh.write(f"{run},{agent},{reward!r},{tt_s},{max_q},{ratio}\n")
    return path
