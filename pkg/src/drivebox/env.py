"""The waypoint-following RL environment.

Lifecycle mirrors the usual gym conventions: ``reset(seed)`` returns
``(obs, info)``, ``step(action)`` returns ``(obs, reward, terminated,
truncated, info)``. The observation is a uint8 array of shape (3, 3, 64, 64):
three channel-first frames ordered oldest to newest; at reset all three hold
the initial frame.

Per step, in order: clip the action; advance the ego with the bicycle model
(and tick controls); obtain NPC next states from the behavior policy's drive
call (built from the pre-step world) and teleport-apply them, pinning agents
marked static; evaluate ego infractions; pop the leading waypoint if reached;
compute the reward; decide termination (collision, off-road, red-light
crossing, or final waypoint reached) and truncation (step limit); render.

The reward is alpha1 * [moved >= 0.5 m] + alpha2 * [waypoint reached]
- beta1 * (1 - cos(heading change)), with optional per-infraction penalty
weights that default to zero.
"""
from __future__ import annotations

import math
from typing import NamedTuple

import numpy as np

from .errors import IncompleteEpisode, PlacementExhausted, SteppedAfterDone
from .geometry import Pose2, shortest_angle_diff
from .infraction import (
    InfractionReport,
    check_collision,
    check_offroad,
    infraction_report,
)
from .kinematics import BicycleModel
from .maps import MapBundle, load_bundled_map, load_map
from .npc import (
    BehaviorPolicy,
    DriveRequest,
    InitializeRequest,
    LocalMockPolicy,
    apply_npc_states,
)
from .renderer import RenderConfig, render
from .scenario import RewardConfig, Scenario, resolve_scenario
from .world import VEHICLE, AgentBatch, WorldState, world_step

EGO_MODEL = BicycleModel(max_steering=0.3, accel_bounds=(-1.0, 1.0))
FRAME_STACK = 3
SPAWN_JITTER_POS = 0.5
SPAWN_JITTER_PSI = 0.05
SPAWN_TRIES = 100


class StepResult(NamedTuple):
    obs: np.ndarray
    reward: float
    terminated: bool
    truncated: bool
    info: dict


def compute_reward(prev_state: np.ndarray, next_state: np.ndarray,
                   waypoints: list[np.ndarray], cfg: RewardConfig,
                   report: InfractionReport | None = None) -> tuple[float, dict]:
    """Reward for one transition; pops waypoints[0] in place when reached."""
    dx = next_state[0] - prev_state[0]
    dy = next_state[1] - prev_state[1]
    distance = math.hypot(dx, dy)
    moved = distance >= cfg.move_eps
    hit = False
    if waypoints:
        wp = waypoints[0]
        if math.hypot(next_state[0] - wp[0], next_state[1] - wp[1]) <= cfg.waypoint_radius:
            waypoints.pop(0)
            hit = True
    smoothness = 1.0 - math.cos(shortest_angle_diff(next_state[2], prev_state[2]))
    reward = cfg.alpha1 * moved + cfg.alpha2 * hit - cfg.beta1 * smoothness
    if report is not None:
        reward -= (
            cfg.lambda_collision * report.collision
            + cfg.lambda_offroad * report.offroad
            + cfg.lambda_traffic_light * report.traffic_light
            + cfg.lambda_wrong_way * report.wrong_way
        )
    return reward, {
        "distance_moved": distance,
        "movement_bonus": bool(moved),
        "waypoint_bonus": bool(hit),
        "smoothness_penalty": smoothness,
    }


class DrivingEnv:
    """One simulated driving task; single-threaded, cheap to instantiate."""

    def __init__(self, scenario: Scenario | str, policy: BehaviorPolicy | None = None,
                 render_config: RenderConfig | None = None,
                 map_bundle: MapBundle | None = None,
                 lane_radius: float = 10.0):
        self.scenario = resolve_scenario(scenario)
        if map_bundle is not None:
            self.map = map_bundle
        else:
            try:
                self.map = load_bundled_map(self.scenario.map_name)
            except FileNotFoundError:
                self.map = load_map(self.scenario.map_name)
        self.scenario.validate_against(self.map)
        self.policy = policy or LocalMockPolicy(self.map)
        self.render_config = render_config or RenderConfig()
        self.lane_radius = lane_radius
        self.world: WorldState | None = None
        self._waypoints: list[np.ndarray] = []
        self._frames: list[np.ndarray] = []
        self._static_rows: tuple[int, ...] = ()
        self._done = True
        self._return = 0.0
        self._steps = 0
        self._waypoints_hit = 0
        self._ended_by: str | None = None

    # -- gym-style surface ---------------------------------------------------

    @property
    def spec_info(self) -> dict:
        cfg = self.render_config
        return {
            "action_low": [-EGO_MODEL.max_steering, EGO_MODEL.accel_bounds[0]],
            "action_high": [EGO_MODEL.max_steering, EGO_MODEL.accel_bounds[1]],
            "obs_shape": [FRAME_STACK, 3, cfg.size, cfg.size],
            "obs_dtype": "uint8",
            "dt": 0.1,
            "max_steps": self.scenario.max_steps,
            "reward": self.scenario.reward.to_dict(),
        }

    def reset(self, seed: int | None = None) -> tuple[np.ndarray, dict]:
        rng = np.random.default_rng(seed)
        ego_state = self._place_ego(rng)
        init = self.policy.initialize(
            InitializeRequest(
                map_name=self.map.name,
                predefined=tuple(
                    (p.attrs, np.asarray(p.state, dtype=np.float64))
                    for p in self.scenario.predefined
                ),
                npc_count=self.scenario.npc_count,
                control_states=tuple(
                    (c.id, c.kind, c.state) for c in self.scenario.build_controls(self.map)
                ),
                seed=int(rng.integers(2 ** 31)),
            )
        )
        attrs = [self.scenario.ego_attrs] + [a for a, _ in init]
        states = np.vstack([ego_state[None, :]] + [s[None, :] for _, s in init])
        batch = AgentBatch.create(EGO_MODEL, attrs, states)
        self._static_rows = tuple(
             1 + k for k, p in enumerate(self.scenario.predefined) if p.static
        )
        self.world = WorldState(
            map=self.map,
            agents={VEHICLE: batch},
            controls=self.scenario.build_controls(self.map),
            step_index=0,
            dt=0.1,
        )
        self._waypoints = [w.copy() for w in self.scenario.waypoints]
        self._done = False
        self._return = 0.0
        self._steps = 0
        self._waypoints_hit = 0
        self._ended_by = None
        frame = self._render_frame()
        self._frames = [frame, frame, frame]
        info = {
            "waypoints_remaining": len(self._waypoints),
            "spawn": ego_state.tolist(),
            "npc_count": batch.n - 1,
        }
        return self._obs(), info

    def step(self, action) -> StepResult:
        if self._done or self.world is None:
            raise SteppedAfterDone("call reset() before stepping")
        action = np.asarray(action, dtype=np.float64).reshape(2)
        clipped = EGO_MODEL.clip_action(action)
        world = self.world
        batch = world.agents[VEHICLE]
        prev_states = batch.states.copy()

        acts = np.zeros((batch.n, 2))
        acts[0] = clipped
        next_world = world_step(world, {VEHICLE: acts})

        if batch.n > 1:
            resp = self.policy.drive(
                DriveRequest(
                    map_name=self.map.name,
                    attrs=batch.attrs,
                    states=prev_states,
                    control_states=tuple((c.id, c.kind, c.state) for c in world.controls),
                    t=world.step_index,
                    dt=world.dt,
                )
            )
            npc_states = resp.states[1:].copy()
            for row in self._static_rows:
                npc_states[row - 1] = prev_states[row]
            next_world = apply_npc_states(next_world, npc_states, start=1)

        self.world = next_world
        report = infraction_report(
            next_world, VEHICLE, 0, prev_states[0], self.lane_radius
        )
        reward, reward_info = compute_reward(
            prev_states[0], next_world.agents[VEHICLE].states[0],
            self._waypoints, self.scenario.reward, report,
        )
        if reward_info["waypoint_bonus"]:
            self._waypoints_hit += 1
        self._steps += 1
        self._return += reward

        cause = None
        if report.collision:
            cause = "collision"
        elif report.offroad:
            cause = "offroad"
        elif report.traffic_light:
            cause = "traffic_light"
        elif not self._waypoints:
            cause = "goal"
        terminated = cause is not None
        truncated = not terminated and self._steps >= self.scenario.max_steps
        if terminated or truncated:
            self._done = True
            self._ended_by = cause or "truncation"

        frame = self._render_frame()
        self._frames = [self._frames[1], self._frames[2], frame]

        info = {
            "infractions": report.to_dict(),
            "waypoints_remaining": len(self._waypoints),
            "action_clipped": bool((clipped != action).any()),
            **reward_info,
        }
        if self._done:
            info["ended_by"] = self._ended_by
        return StepResult(self._obs(), float(reward), terminated, truncated, info)

    def close(self) -> None:
        self.world = None
        self._done = True

    def current_frame(self) -> np.ndarray:
        """Newest rendered frame as (H, W, 3) uint8 (PPM-ready layout)."""
        return np.ascontiguousarray(self._frames[-1].transpose(1, 2, 0))

    def episode_metrics(self) -> dict:
        """Summary of the last finished episode."""
        if not self._done or self._ended_by is None:
            raise IncompleteEpisode("episode still in progress (or never started)")
        return {
            "return": self._return,
            "horizon": self._steps,
            "waypoints": self._waypoints_hit,
            "ended_by": self._ended_by,
        }

    # -- internals ------------------------------------------------------------

    def _place_ego(self, rng: np.random.Generator) -> np.ndarray:
        spawns = self.scenario.ego_spawns
        base = spawns[int(rng.integers(spawns.shape[0]))]
        predef = [
            (p.attrs, np.asarray(p.state, dtype=np.float64))
            for p in self.scenario.predefined
        ]
        for _ in range(SPAWN_TRIES):
            cand = base.copy()
            cand[0] += rng.normal(0.0, SPAWN_JITTER_POS)
            cand[1] += rng.normal(0.0, SPAWN_JITTER_POS)
            cand[2] += rng.normal(0.0, SPAWN_JITTER_PSI)
            if self._spawn_clear(cand, predef):
                return cand
        if self._spawn_clear(base.copy(), predef):
            return base.copy()
        raise PlacementExhausted(0)

    def _spawn_clear(self, state: np.ndarray, predef) -> bool:
        probe = WorldState(
            map=self.map,
            agents={
                VEHICLE: AgentBatch.create(
                    EGO_MODEL,
                    [self.scenario.ego_attrs] + [a for a, _ in predef],
                    np.vstack([state[None, :]] + [s[None, :] for _, s in predef]),
                )
            },
        )
        collision, _ = check_collision(probe, VEHICLE, 0)
        return not collision and not check_offroad(probe, VEHICLE, 0)

    def _render_frame(self) -> np.ndarray:
        x, y, psi, _ = self.world.agents[VEHICLE].states[0]
        waypoint = tuple(self._waypoints[0]) if self._waypoints else None
        frame = render(self.world, Pose2(x, y, psi), self.render_config, waypoint)
        return np.ascontiguousarray(frame.pixels.transpose(2, 0, 1))

    def _obs(self) -> np.ndarray:
        return np.stack(self._frames)
