"""Environment server: newline-delimited JSON over stdio or TCP.

One session per connection; a session owns a private environment.  Every
request line yields exactly one response line.

Requests
    {"type": "spec"}
    {"type": "reset", "seed": int, "scenario": optional name or path}
    {"type": "step", "action": int}
    {"type": "close"}

Responses
    {"type": "spec", "obs_rows": M, "obs_cols": M, "action_count": 3M}
    {"type": "state", "observation": [...], "reward": float | null,
     "terminated": bool, "truncated": bool, "info": {...}}
    {"type": "error", "code": str, "message": str}
    {"type": "closed"}

Observations travel as row-major arrays; numbers are serialized at full
round-trip precision, so a remote client sees bit-identical values to an
in-process environment.  Malformed requests produce an ``error`` response
and leave the session alive.
"""

from __future__ import annotations

import json
import socket
import socketserver
import sys
import threading

from .rlenv import EpisodeFinishedError, InvalidActionError, TrafficEnv
from .scenario import ScenarioSpec, load_scenario


class Session:
    """Protocol state machine for one connection."""

    def __init__(self, spec: ScenarioSpec):
        self.spec = spec
        self.env = TrafficEnv(spec)
        self.has_reset = False
        self.closed = False

    def handle_line(self, line: str) -> str:
        try:
            response = self._dispatch(line)
        except Exception as exc:  # defensive: a session must not die
            response = _error("internal", f"{type(exc).__name__}: {exc}")
        return json.dumps(response)

    def _dispatch(self, line: str) -> dict:
        try:
            msg = json.loads(line)
        except json.JSONDecodeError as exc:
            return _error("bad-request", f"not valid JSON: {exc}")
        if not isinstance(msg, dict) or "type" not in msg:
            return _error("bad-request", "message must be an object with a 'type'")
        kind = msg["type"]
        if kind == "spec":
            return {"type": "spec", "obs_rows": self.env.M,
                    "obs_cols": self.env.M, "action_count": self.env.action_count}
        if kind == "reset":
            return self._reset(msg)
        if kind == "step":
            return self._step(msg)
        if kind == "close":
            self.closed = True
            return {"type": "closed"}
        return _error("bad-request", f"unknown request type {kind!r}")

    def _reset(self, msg: dict) -> dict:
        seed = msg.get("seed", 0)
        if not isinstance(seed, int):
            return _error("bad-request", "seed must be an integer")
        scenario = msg.get("scenario")
        if scenario is not None:
            try:
                self.spec = load_scenario(scenario)
                self.env = TrafficEnv(self.spec)
            except (OSError, ValueError) as exc:
                return _error("invalid-scenario", str(exc))
        obs, info = self.env.reset(seed=seed)
        self.has_reset = True
        return _state(obs, None, False, False, info)

    def _step(self, msg: dict) -> dict:
        if not self.has_reset:
            return _error("not-reset", "reset the environment before stepping")
        if "action" not in msg or not isinstance(msg["action"], int):
            return _error("bad-request", "step needs an integer 'action'")
        try:
            obs, reward, terminated, truncated, info = self.env.step(msg["action"])
        except InvalidActionError as exc:
            return _error("invalid-action", str(exc))
        except EpisodeFinishedError as exc:
            return _error("episode-finished", str(exc))
        return _state(obs, reward, terminated, truncated, info)


def _state(obs, reward, terminated, truncated, info) -> dict:
    metrics = info.get("metrics")
    return {
        "type": "state",
        "observation": [float(v) for v in obs.reshape(-1)],
        "reward": reward,
        "terminated": terminated,
        "truncated": truncated,
        "info": {
            "clock": info["clock"],
            "step": info["step"],
            "splits": {str(k): v for k, v in info["splits"].items()},
            "queues": info["queues"],
            "queues_raw": info["queues_raw"],
            "total_travel_time": None if metrics is None else metrics.total_travel_time,
        },
    }


def _error(code: str, message: str) -> dict:
    return {"type": "error", "code": code, "message": message}


def serve_stdio(spec: ScenarioSpec, stdin=None, stdout=None) -> None:
    """Single session on standard I/O; returns at EOF or close."""
    stdin = stdin or sys.stdin
    stdout = stdout or sys.stdout
    session = Session(spec)
    for line in stdin:
        line = line.strip()
        if not line:
            continue
        stdout.write(session.handle_line(line) + "\n")
        stdout.flush()
        if session.closed:
            break


class _Handler(socketserver.StreamRequestHandler):
    def handle(self):
        server = self.server
        with server.session_slots:  # type: ignore[attr-defined]
            session = Session(server.spec)  # type: ignore[attr-defined]
            for raw in self.rfile:
                line = raw.decode().strip()
                if not line:
                    continue
                self.wfile.write((session.handle_line(line) + "\n").encode())
                self.wfile.flush()
                if session.closed:
                    break


class EnvServer(socketserver.ThreadingTCPServer):
    allow_reuse_address = True
    daemon_threads = True

    def __init__(self, spec: ScenarioSpec, address: tuple[str, int],
                 max_sessions: int = 8):
        super().__init__(address, _Handler)
        self.spec = spec
        self.session_slots = threading.Semaphore(max_sessions)


def serve_tcp(spec: ScenarioSpec, host: str, port: int,
              max_sessions: int = 8) -> EnvServer:
    """Bind and serve forever (blocking); raises OSError on bind failure."""
    server = EnvServer(spec, (host, port), max_sessions)
    try:
        server.serve_forever()
    finally:
        server.server_close()
    return server
