"""Operational surface: a line-delimited JSON env server and a rollout CLI.

Protocol (one JSON object per line, strict request/response):

    -> {"op": "reset", "seed": 7, "scenario": "straight_empty", "id": 1}
    <- {"ok": true, "obs": "<base64>", "info": {...}, "id": 1}
    -> {"op": "step", "action": [0.1, 0.5]}
    <- {"ok": true, "obs": "...", "reward": 1.0, "terminated": false,
        "truncated": false, "info": {...}}
    -> {"op": "spec"}
    <- {"ok": true, "spec": {"action_low": [-0.3, -1.0], ...}}
    -> {"op": "close"}
    <- {"ok": true}

Observations travel as base64 of the raw uint8 buffer in the declared shape.
Each connection owns one environment; malformed lines get ok=false and the
connection stays up. Stepping before reset (or after an episode ended)
answers with error "not reset".

CLI: ``drivebox --scenario NAME [--policy idle|random|FILE] [--episodes N]
[--seed S] [--csv PATH] [--frames DIR]`` runs rollouts and writes metrics;
``drivebox --serve HOST:PORT --scenario NAME`` starts the server.
"""
from __future__ import annotations

import argparse
import base64
import csv
import json
import socketserver
import sys
from pathlib import Path

import numpy as np

from .env import DrivingEnv
from .errors import BindFailure, DriveboxError, SteppedAfterDone
from .renderer import write_ppm
from .scenario import bundled_scenario_names, resolve_scenario


def _encode_obs(obs: np.ndarray) -> str:
    return base64.b64encode(np.ascontiguousarray(obs).tobytes()).decode("ascii")


class _EnvSession:
    """Per-connection protocol state machine; independent of the transport."""

    def __init__(self, default_scenario: str | None):
        self.default_scenario = default_scenario
        self.env: DrivingEnv | None = None
        self.scenario_name: str | None = None

    def handle(self, line: str) -> dict:
        try:
            req = json.loads(line)
        except json.JSONDecodeError as exc:
            return {"ok": False, "error": f"malformed JSON: {exc.msg}"}
        if not isinstance(req, dict):
            return {"ok": False, "error": "request must be a JSON object"}
        resp = self._dispatch(req)
        if "id" in req:
            resp["id"] = req["id"]
        return resp

    def _dispatch(self, req: dict) -> dict:
        op = req.get("op")
        try:
            if op == "reset":
                return self._reset(req)
            if op == "step":
                return self._step(req)
            if op == "spec":
                return self._spec(req)
            if op == "close":
                self.env = None
                return {"ok": True}
            return {"ok": False, "error": f"unknown op {op!r}"}
        except SteppedAfterDone:
            return {"ok": False, "error": "not reset"}
        except DriveboxError as exc:
            return {"ok": False, "error": str(exc)}
        except (TypeError, ValueError, KeyError) as exc:
            return {"ok": False, "error": f"bad request: {exc}"}

    def _ensure_env(self, scenario: str | None) -> DrivingEnv:
        name = scenario or self.scenario_name or self.default_scenario
        if name is None:
            raise ValueError("no scenario configured")
        if self.env is None or name != self.scenario_name:
            self.env = DrivingEnv(name)
            self.scenario_name = name
        return self.env

    def _reset(self, req: dict) -> dict:
        env = self._ensure_env(req.get("scenario"))
        seed = req.get("seed")
        if seed is not None and not isinstance(seed, int):
            return {"ok": False, "error": "seed must be an integer"}
        obs, info = env.reset(seed=seed)
        return {"ok": True, "obs": _encode_obs(obs), "info": info}

    def _step(self, req: dict) -> dict:
        if self.env is None:
            return {"ok": False, "error": "not reset"}
        action = req.get("action")
        if (not isinstance(action, (list, tuple)) or len(action) != 2
                or not all(isinstance(v, (int, float)) for v in action)):
            return {"ok": False, "error": "action must be [steering, acceleration]"}
        obs, reward, terminated, truncated, info = self.env.step(action)
        return {
            "ok": True,
            "obs": _encode_obs(obs),
            "reward": reward,
            "terminated": terminated,
            "truncated": truncated,
            "info": info,
        }

    def _spec(self, req: dict) -> dict:
        env = self._ensure_env(req.get("scenario"))
        return {"ok": True, "spec": env.spec_info}


class _Handler(socketserver.StreamRequestHandler):
    def handle(self) -> None:
        session = _EnvSession(self.server.default_scenario)  # type: ignore[attr-defined]
        while True:
            try:
                line = self.rfile.readline()
            except (ConnectionError, OSError):
                break
            if not line:
                break
            text = line.decode("utf-8", errors="replace").strip()
            if not text:
                continue
            resp = session.handle(text)
            try:
                self.wfile.write(json.dumps(resp).encode("utf-8") + b"\n")
                self.wfile.flush()
            except (ConnectionError, OSError):
                break


class EnvServer(socketserver.ThreadingTCPServer):
    allow_reuse_address = True
    daemon_threads = True

    def __init__(self, address: tuple[str, int], default_scenario: str | None):
        try:
            super().__init__(address, _Handler)
        except OSError as exc:
            raise BindFailure(f"cannot bind {address[0]}:{address[1]}: {exc}") from exc
        self.default_scenario = default_scenario


def serve(address: str, scenario: str | None) -> None:
    """Run the environment server until interrupted."""
    host, _, port = address.rpartition(":")
    server = EnvServer((host or "127.0.0.1", int(port)), scenario)
    host, port = server.server_address[:2]
    print(f"serving on {host}:{port}", flush=True)
    try:
        server.serve_forever()
    finally:
        server.server_close()


def _make_policy(spec: str, rng: np.random.Generator, env: DrivingEnv):
    if spec == "idle":
        return lambda t: (0.0, 0.0)
    if spec == "random":
        low = np.array(env.spec_info["action_low"])
        high = np.array(env.spec_info["action_high"])

        def random_policy(t: int):
            return tuple(rng.uniform(low, high))

        return random_policy
    script = json.loads(Path(spec).read_text(encoding="utf-8"))
    if not isinstance(script, list):
        raise ValueError("scripted policy file must hold a JSON list of [b, c] pairs")

    def scripted(t: int):
        return tuple(script[t]) if t < len(script) else (0.0, 0.0)

    return scripted


def rollout(scenario: str, policy_spec: str, episodes: int, seed: int,
            csv_path: str | None, frames_dir: str | None) -> list[dict]:
    """Run episodes and collect metric rows (also written to csv_path)."""
    env = DrivingEnv(resolve_scenario(scenario))
    rows = []
    for ep in range(episodes):
        ep_seed = seed + ep
        rng = np.random.default_rng(ep_seed)
        policy = _make_policy(policy_spec, rng, env)
        _obs, _info = env.reset(seed=ep_seed)
        if frames_dir:
            _dump_frame(env, frames_dir, ep, 0)
        t = 0
        while True:
            _obs, _r, terminated, truncated, _i = env.step(policy(t))
            t += 1
            if frames_dir:
                _dump_frame(env, frames_dir, ep, t)
            if terminated or truncated:
                break
        metrics = env.episode_metrics()
        rows.append({"episode": ep, "seed": ep_seed, **metrics})
    if csv_path:
        with open(csv_path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.DictWriter(
                fh, fieldnames=["episode", "seed", "return", "horizon",
                                "waypoints", "ended_by"]
            )
            writer.writeheader()
            writer.writerows(rows)
    return rows


def _dump_frame(env: DrivingEnv, directory: str, ep: int, t: int) -> None:
    path = Path(directory)
    path.mkdir(parents=True, exist_ok=True)
    write_ppm(path / f"ep{ep:03d}_{t:06d}.ppm", env.current_frame())


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="drivebox",
        description="Rollouts and a JSON-lines server for the driving environment.",
    )
    parser.add_argument("--scenario", help="bundled scenario name or JSON path")
    parser.add_argument("--policy", default="idle",
                        help="idle, random, or path to a JSON action script")
    parser.add_argument("--episodes", type=int, default=1)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--csv", help="write per-episode metrics CSV here")
    parser.add_argument("--frames", help="dump per-step PPM frames to this directory")
    parser.add_argument("--serve", metavar="ADDR",
                        help="serve the JSON-lines protocol on HOST:PORT")
    parser.add_argument("--list-scenarios", action="store_true",
                        help="print bundled scenario names and exit")
    args = parser.parse_args(argv)

    try:
        if args.list_scenarios:
            for name in bundled_scenario_names():
                print(name)
            return 0
        if args.serve:
            serve(args.serve, args.scenario)
            return 0
        if not args.scenario:
            parser.error("--scenario is required for rollouts")
        rows = rollout(args.scenario, args.policy, args.episodes, args.seed,
                       args.csv, args.frames)
    except (DriveboxError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    mean = lambda key: sum(r[key] for r in rows) / len(rows)  # noqa: E731
    print(
        f"episodes={len(rows)} mean_return={mean('return'):.3f} "
        f"mean_horizon={mean('horizon'):.1f} mean_waypoints={mean('waypoints'):.2f}"
    )
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
