"""Command-line entry points: simulate, train, evaluate, serve."""

from __future__ import annotations

import argparse
import json
import os
import sys

from .harness import export_metrics, run_scenario
from .learner import TrainConfig, train
from .protocol import serve_stdio, serve_tcp
from .rlenv import TrafficEnv
from .scenario import load_scenario


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="atsclab",
                                     description="Signal-grid control laboratory")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="run a scenario with a reference or saved agent")
    p.add_argument("--scenario", required=True, help="preset name or JSON file")
    p.add_argument("--agent", default="fixed",
                   help="fixed | random | policy:CKPT (default fixed)")
    p.add_argument("--episodes", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)

    p = sub.add_parser("train", help="train the built-in policy-gradient learner")
    p.add_argument("--scenario", required=True)
    p.add_argument("--config", help="JSON file with TrainConfig fields")
    p.add_argument("--out", required=True)

    p = sub.add_parser("evaluate", help="evaluate a checkpoint over seeds")
    p.add_argument("--scenario", required=True)
    p.add_argument("--ckpt", required=True)
    p.add_argument("--episodes", type=int, default=1)
    p.add_argument("--seeds", help="comma-separated seeds (default 0..episodes-1)")
    p.add_argument("--out", required=True)

    p = sub.add_parser("serve", help="serve the environment over the wire protocol")
    p.add_argument("--scenario", required=True)
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--listen", help="HOST:PORT to bind")
    group.add_argument("--stdio", action="store_true")
    p.add_argument("--max-sessions", type=int, default=8)

    p = sub.add_parser("report", help="consolidate run directories into one report")
    p.add_argument("--runs", required=True, help="directory containing run subdirectories")

    args = parser.parse_args(argv)
    try:
        return _run(args)
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def _run(args) -> int:
    if args.command == "simulate":
        spec = load_scenario(args.scenario)
        report = run_scenario(spec, args.agent, args.out,
                              episodes=args.episodes, seed=args.seed)
        tt = report.mean_tt_per_vehicle
        print(f"{args.agent}: mean reward {report.mean_reward:.3f}, "
              f"mean travel time {'no-data' if tt is None else f'{tt:.1f} s'}, "
              f"max sensed queue {report.max_sensed_queue}")
        return 0

    if args.command == "train":
        spec = load_scenario(args.scenario)
        fields = {}
        if args.config:
            with open(args.config) as fh:
                fields = json.load(fh)
        config = TrainConfig(**fields)
        os.makedirs(args.out, exist_ok=True)
        env = TrafficEnv(spec)

        def progress(ep, stats, diag):
            if (ep + 1) % 10 == 0 or ep == 0:
                print(f"episode {ep + 1}/{config.episodes}: "
                      f"total reward {stats['total_reward']:.1f}, "
                      f"grad norm {diag['grad_norm']:.2f}", flush=True)

        train(env, config, out_dir=args.out, progress=progress)
        print(f"checkpoint and learning curve written to {args.out}")
        return 0

    if args.command == "evaluate":
        spec = load_scenario(args.scenario)
        if args.seeds:
            seeds = [int(s) for s in args.seeds.split(",")]
            if len(seeds) == 1 and args.episodes > 1:
                seeds = [seeds[0] + i for i in range(args.episodes)]
        else:
            seeds = list(range(args.episodes))
        report = run_scenario(spec, f"policy:{args.ckpt}", args.out, seeds=seeds)
        tt = report.mean_tt_per_vehicle
        print(f"policy: mean reward {report.mean_reward:.3f}, "
              f"mean travel time {'no-data' if tt is None else f'{tt:.1f} s'}, "
              f"max sensed queue {report.max_sensed_queue}")
        return 0

    if args.command == "serve":
        spec = load_scenario(args.scenario)
        if args.stdio:
            serve_stdio(spec)
            return 0
        host, _, port = args.listen.rpartition(":")
        serve_tcp(spec, host or "127.0.0.1", int(port), args.max_sessions)
        return 0

    if args.command == "report":
        path = export_metrics(args.runs)
        print(f"report written to {path}")
        return 0

    raise AssertionError(f"unhandled command {args.command}")


if __name__ == "__main__":
    sys.exit(main())
