"""Behavior layer: INITIALIZE/DRIVE service contract, a local mock, replay.

A BehaviorPolicy populates a scene once (initialize) and predicts every
agent's next state each step (drive). The local mock places agents on lane
centerlines by rejection sampling and drives them with pure-pursuit steering
plus a car-following rule; its responses respect the plausibility bound
|dv|/dt <= 5 m/s^2. NPC states are applied to the world by teleporting,
never by integrating their actions.

Replay logs are JSON lines, one object per step:
``{"t": 0, "agents": [[x, y, psi, v], ...]}``.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Protocol

import numpy as np

from . import _kernels
from .errors import HorizonExceeded, LengthMismatch, PlacementExhausted
from .geometry import rect_corners_batch, shortest_angle_diff
from .kinematics import AgentAttributes, BicycleModel, TeleportingModel
from .maps import Lane, MapBundle
from .world import VEHICLE, WRAPPERS, WorldState

# Car-following tuning: comfortable acceleration, desired speed, standstill
# gap, time headway, and the red-light slowdown horizon used at placement.
ACCEL_MAX = 2.0
DESIRED_SPEED = 8.0
MIN_GAP = 2.0
TIME_HEADWAY = 1.5
RED_STOP_RANGE = 15.0
LOOKAHEAD = 5.0
LANE_RADIUS = 10.0
ON_LANE_LATERAL = 3.5
PLAUSIBLE_ACCEL = 5.0
MAX_PLACEMENT_TRIES = 1000

NPC_MODEL = BicycleModel(max_steering=1.0, accel_bounds=(-PLAUSIBLE_ACCEL, PLAUSIBLE_ACCEL))


@dataclass(frozen=True)
class InitializeRequest:
    map_name: str
    predefined: tuple[tuple[AgentAttributes, np.ndarray], ...]
    npc_count: int
    control_states: tuple[tuple[str, str, str], ...]  # (id, kind, state)
    seed: int
    agent_type: str = VEHICLE


@dataclass(frozen=True)
class DriveRequest:
    map_name: str
    attrs: np.ndarray   # (N, 3): length, width, rear_axis_offset
    states: np.ndarray  # (N, 4): x, y, psi, v
    control_states: tuple[tuple[str, str, str], ...]
    t: int
    dt: float = 0.1


@dataclass(frozen=True)
class DriveResponse:
    states: np.ndarray  # (N, 4), aligned with the request rows

    def __post_init__(self) -> None:
        object.__setattr__(
            self, "states", np.asarray(self.states, dtype=np.float64).reshape(-1, 4)
        )


class BehaviorPolicy(Protocol):
    def initialize(self, req: InitializeRequest) -> list[tuple[AgentAttributes, np.ndarray]]: ...

    def drive(self, req: DriveRequest) -> DriveResponse: ...


def _lane_arc_position(lane: Lane, x: float, y: float) -> tuple[float, float]:
    """(arc length, perpendicular distance) of the point's lane projection."""
    a, b = lane.points[:-1], lane.points[1:]
    idx, d2 = _kernels.nearest_segment(x, y, a, b)
    seg = b[idx] - a[idx]
    seg_len = float(np.hypot(seg[0], seg[1]))
    t = ((x - a[idx, 0]) * seg[0] + (y - a[idx, 1]) * seg[1]) / (seg_len * seg_len)
    t = min(max(t, 0.0), 1.0)
    return float(lane.arc_lengths()[idx] + t * seg_len), math.sqrt(d2)


def _lane_is_closed(lane: Lane) -> bool:
    return bool(np.all(lane.points[0] == lane.points[-1]))


def _lane_point_ahead(lane: Lane, s: float, ahead: float) -> np.ndarray:
    """Point ``ahead`` meters further along the lane (wraps on closed lanes)."""
    total = float(lane.arc_lengths()[-1])
    target = s + ahead
    if _lane_is_closed(lane) and total > 0:
        target = target % total
    return lane.point_at(target)[0]


class LocalMockPolicy:
    """Self-contained stand-in for the remote behavior service.

    Placement rejection-samples lane positions; driving follows the nearest
    lane with pure pursuit and brakes for leading agents and red lights.
    Deterministic given the request (drive uses no randomness at all).
    """

    def __init__(self, bundle: MapBundle, max_init_speed: float = 10.0,
                 default_attrs: AgentAttributes | None = None):
        self.bundle = bundle
        self.max_init_speed = max_init_speed
        self.default_attrs = default_attrs or AgentAttributes()

    # -- INITIALIZE ---------------------------------------------------------

    def initialize(self, req: InitializeRequest) -> list[tuple[AgentAttributes, np.ndarray]]:
        rng = np.random.default_rng(req.seed)
        out = [(attrs, np.asarray(state, dtype=np.float64).copy())
               for attrs, state in req.predefined]
        if req.npc_count == 0:
            return out
        if not self.bundle.lanes:
            raise PlacementExhausted(0)
        red_spots = self._red_line_arcs(req.control_states)
        for _ in range(req.npc_count):
            placed = self._sample_one(rng, out, red_spots)
            if placed is None:
                raise PlacementExhausted(len(out) - len(req.predefined))
            out.append(placed)
        return out

    def _red_line_arcs(self, control_states) -> dict[int, list[float]]:
        """Arc positions of red lights per lane id, for slow-zone checks."""
        state_by_id = {cid: state for cid, _kind, state in control_states}
        spots: dict[int, list[float]] = {}
        for rect, control_id in self.bundle.stop_lines:
            if state_by_id.get(control_id) != "red":
                continue
            for lane in self.bundle.lanes:
                s, dist = _lane_arc_position(lane, rect.center.x, rect.center.y)
                if dist <= ON_LANE_LATERAL:
                    spots.setdefault(lane.id, []).append(s)
        return spots

    def _sample_one(self, rng, existing, red_spots):
        lanes = self.bundle.lanes
        attrs = self.default_attrs
        occupied = [
            rect_corners_batch(
                np.array([s[0]]), np.array([s[1]]), np.array([s[2]]),
                np.array([a.length]), np.array([a.width]),
            )[0]
            for a, s in existing
        ]
        for _ in range(MAX_PLACEMENT_TRIES):
            lane = lanes[int(rng.integers(len(lanes)))]
            total = float(lane.arc_lengths()[-1])
            s = float(rng.uniform(0.0, total))
            pos, tangent = lane.point_at(s)
            speed = float(rng.uniform(0.0, self.max_init_speed))
            for s_red in red_spots.get(lane.id, ()):
                if 0.0 <= s_red - s <= RED_STOP_RANGE:
                    speed = 0.0
                    break
            state = np.array([pos[0], pos[1], tangent, speed])
            corners = rect_corners_batch(
                state[0:1], state[1:2], state[2:3],
                np.array([attrs.length]), np.array([attrs.width]),
            )[0]
            if not self.bundle.mesh.contains(corners).all():
                continue
            if any(_kernels.sat_rects_overlap(corners, other) for other in occupied):
                continue
            return attrs, state
        return None

    # -- DRIVE --------------------------------------------------------------

    def drive(self, req: DriveRequest) -> DriveResponse:
        states = np.asarray(req.states, dtype=np.float64).reshape(-1, 4)
        attrs = np.asarray(req.attrs, dtype=np.float64).reshape(-1, 3)
        n = states.shape[0]
        out = np.empty_like(states)
        red_spots = self._red_line_arcs(req.control_states)
        lane_cache: dict[int, tuple] = {}
        for i in range(n):
            out[i] = self._drive_one(i, states, attrs, red_spots, lane_cache, req.dt)
        return DriveResponse(out)

    def _drive_one(self, i, states, attrs, red_spots, lane_cache, dt):
        x, y, psi, v = states[i]
        length, _width, l_r = attrs[i]
        near = self.bundle.nearest_lane_direction(x, y, radius=LANE_RADIUS)
        if near is None:
            # off-lane: hold the pose and bleed speed away
            return np.array([x, y, psi, max(0.0, v - ACCEL_MAX * dt)])
        lane = self.bundle.lane(near[0])
        s_self, _ = _lane_arc_position(lane, x, y)

        target = _lane_point_ahead(lane, s_self, LOOKAHEAD)
        alpha = shortest_angle_diff(math.atan2(target[1] - y, target[0] - x), psi)
        dist = max(0.1, math.hypot(target[0] - x, target[1] - y))
        curvature = 2.0 * math.sin(alpha) / dist
        delta = math.asin(min(1.0, max(-1.0, curvature * l_r)))

        gap = math.inf
        total = float(lane.arc_lengths()[-1])
        closed = _lane_is_closed(lane)
        for j in range(states.shape[0]):
            if j == i:
                continue
            s_j, lat_j = _lane_arc_position(lane, states[j, 0], states[j, 1])
            if lat_j > ON_LANE_LATERAL:
                continue
            ds = s_j - s_self
            if closed and ds < 0:
                ds += total
            if ds <= 0:
                continue
            gap = min(gap, ds - 0.5 * attrs[j, 0] - 0.5 * length)
        for s_red in red_spots.get(lane.id, ()):
            ds = s_red - s_self
            if closed and ds < 0:
                ds += total
            if ds <= 0:
                continue
            gap = min(gap, ds - 0.5 * length)

        accel = ACCEL_MAX * (1.0 - (v / DESIRED_SPEED) ** 2)
        if math.isfinite(gap):
            desired_gap = MIN_GAP + v * TIME_HEADWAY
            accel = ACCEL_MAX * (
                1.0 - (v / DESIRED_SPEED) ** 2 - (desired_gap / max(gap, 0.1)) ** 2
            )
        accel = min(PLAUSIBLE_ACCEL, max(-PLAUSIBLE_ACCEL, accel))
        accel = max(accel, -v / dt)  # never integrate through standstill
        return NPC_MODEL.step(states[i], np.array([delta, accel]), l_r, dt)


def drive_request_from_world(w: WorldState, agent_type: str = VEHICLE) -> DriveRequest:
    """Snapshot the world's agents and control states into a DriveRequest."""
    batch = w.agents[agent_type]
    return DriveRequest(
        map_name=w.map.name,
        attrs=batch.attrs.copy(),
        states=batch.states.copy(),
        control_states=tuple((c.id, c.kind, c.state) for c in w.controls),
        t=w.step_index,
        dt=w.dt,
    )


def apply_npc_states(w: WorldState, states: np.ndarray, start: int = 1,
                     agent_type: str = VEHICLE) -> WorldState:
    """Teleport rows [start, start+len) of a batch to the given states.

    Row 0 (the ego) is never written by the default start. Returns a new
    world; raises LengthMismatch when the rows do not fit the batch.
    """
    states = np.asarray(states, dtype=np.float64).reshape(-1, 4)
    out = w.copy()
    batch = out.agents[agent_type]
    if start + states.shape[0] > batch.n:
        raise LengthMismatch(
            f"{states.shape[0]} response rows at offset {start} exceed batch of {batch.n}"
        )
    if states.shape[0]:
        rows = slice(start, start + states.shape[0])
        batch.states[rows] = TeleportingModel().step_batch(
            batch.states[rows], states, batch.attrs[rows, 2], w.dt
        )
    return out


@dataclass
class ReplayPolicy:
    """Replays logged trajectories; not reactive by design."""

    frames: list[np.ndarray]  # frames[t] has shape (N_t, 4)

    def initialize(self, req: InitializeRequest) -> list[tuple[AgentAttributes, np.ndarray]]:
        first = self.frames[0]
        out = [(attrs, np.asarray(state, dtype=np.float64).copy())
               for attrs, state in req.predefined]
        out.extend((AgentAttributes(), first[k].copy()) for k in range(len(out), first.shape[0]))
        return out

    def drive(self, req: DriveRequest) -> DriveResponse:
        return DriveResponse(replay_drive(self.frames, req.t + 1))


def replay_drive(frames: list[np.ndarray], t: int) -> np.ndarray:
    """Logged states at step t, verbatim; HorizonExceeded past the log end."""
    if t < 0 or t >= len(frames):
        raise HorizonExceeded(f"step {t} outside replay log of {len(frames)} frames")
    return np.asarray(frames[t], dtype=np.float64).reshape(-1, 4).copy()


class RemoteStub:
    """Protocol-shaped stand-in for the remote service: records every request
    and plays back pre-configured responses."""

    def __init__(self, init_response=None, drive_responses=()):
        self.init_response = init_response or []
        self.drive_responses = list(drive_responses)
        self.requests: list = []

    def initialize(self, req: InitializeRequest):
        self.requests.append(req)
        return list(self.init_response)

    def drive(self, req: DriveRequest) -> DriveResponse:
        self.requests.append(req)
        if not self.drive_responses:
            return DriveResponse(req.states.copy())
        return DriveResponse(self.drive_responses.pop(0))


def write_replay_log(path: str | Path, frames: list[np.ndarray]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for t, states in enumerate(frames):
            row = {"t": t, "agents": np.asarray(states, dtype=np.float64).reshape(-1, 4).tolist()}
            fh.write(json.dumps(row) + "\n")


def read_replay_log(path: str | Path) -> list[np.ndarray]:
    frames: dict[int, np.ndarray] = {}
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            row = json.loads(line)
            frames[int(row["t"])] = np.asarray(row["agents"], dtype=np.float64).reshape(-1, 4)
    return [frames[t] for t in sorted(frames)]


class NpcController:
    """Wrapper driving all non-ego rows of a batch through a BehaviorPolicy.

    The caller supplies actions for rows below ``first_npc_row`` only; NPC
    rows are advanced by teleporting to the policy's drive response computed
    from the pre-step world. Rows listed in ``static_rows`` are pinned to
    their current state (parked or disabled vehicles).
    """

    def __init__(self, inner, policy, agent_type: str = VEHICLE,
                 first_npc_row: int = 1, static_rows: tuple[int, ...] = ()):
        self.inner = inner
        self.policy = policy
        self.agent_type = agent_type
        self.first_npc_row = first_npc_row
        self.static_rows = tuple(static_rows)

    @property
    def world(self) -> WorldState:
        return self.inner.world

    @world.setter
    def world(self, value: WorldState) -> None:
        self.inner.world = value

    def step(self, actions) -> WorldState:
        w = self.world
        batch = w.agents[self.agent_type]
        req = drive_request_from_world(w, self.agent_type)
        resp = self.policy.drive(req)
        if resp.states.shape[0] != batch.n:
            raise LengthMismatch(
                f"drive returned {resp.states.shape[0]} rows for {batch.n} agents"
            )
        full = dict(actions or {})
        arr = np.zeros((batch.n, batch.model.action_dim))
        if self.agent_type in full:
            given = np.asarray(full[self.agent_type], dtype=np.float64).reshape(
                -1, batch.model.action_dim
            )
            arr[: given.shape[0]] = given[: batch.n]
        full[self.agent_type] = arr
        pinned = {row: batch.states[row].copy() for row in self.static_rows}
        world = self.inner.step(full)
        npc_states = resp.states[self.first_npc_row:].copy()
        for row, state in pinned.items():
            if row >= self.first_npc_row:
                npc_states[row - self.first_npc_row] = state
        world = apply_npc_states(world, npc_states, start=self.first_npc_row,
                                 agent_type=self.agent_type)
        self.world = world
        return world


WRAPPERS["npc_controller"] = NpcController
