"""The core simulator: batched agents grouped by type, traffic controls, a
clock, and composable wrappers over the step interface.

Agents of one type live in an AgentBatch (flat numpy arrays plus a present
mask); a world maps type names to batches. ``world_step`` has value
semantics: it never mutates its input, and agent states never influence each
other within a step (interaction happens only through the actions supplied).

By convention the ego, when one exists, is agents["vehicle"] row 0.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Callable, Iterable, Mapping, Sequence

import numpy as np

from . import infraction as _infraction
from .errors import (
    ConfigError,
    DimensionMismatch,
    HorizonExceeded,
    LiftError,
    MissingActions,
)
from .geometry import OrientedRect, Pose2, rect_corners_batch
from .kinematics import AgentAttributes, KinematicModel
from .maps import MapBundle
from .renderer import RenderConfig, render, write_ppm

VEHICLE = "vehicle"

CONTROL_KINDS = ("traffic_light", "stop_sign", "yield_sign")
LIGHT_STATES = ("red", "yellow", "green")


@dataclass(frozen=True)
class TrafficControl:
    """A stop-line rectangle with internal state; semantics are not enforced.

    Lights follow a cyclic (state, duration-in-steps) program evaluated
    statelessly from the world's step index; signs hold the constant "n/a".
    """

    id: str
    rect: OrientedRect
    kind: str = "traffic_light"
    program: tuple[tuple[str, int], ...] = ()
    state: str = "n/a"

    def __post_init__(self) -> None:
        if self.kind not in CONTROL_KINDS:
            raise ConfigError(f"unknown control kind {self.kind!r}")
        if self.kind == "traffic_light":
            if not self.program:
                raise ConfigError(f"traffic light {self.id!r} needs a program")
            for state, duration in self.program:
                if state not in LIGHT_STATES:
                    raise ConfigError(f"bad light state {state!r}")
                if duration < 1:
                    raise ConfigError("program durations must be >= 1")
        elif self.program:
            raise ConfigError("signs do not take programs")

    def state_at(self, step_index: int) -> str:
        if self.kind != "traffic_light":
            return "n/a"
        cycle = sum(d for _, d in self.program)
        t = step_index % cycle
        for state, duration in self.program:
            if t < duration:
                return state
            t -= duration
        raise AssertionError("unreachable")


def advance_controls(controls: Sequence[TrafficControl], step_index: int) -> list[TrafficControl]:
    """Controls with each state re-evaluated at the given step index."""
    return [replace(c, state=c.state_at(step_index)) for c in controls]


@dataclass
class AgentBatch:
    """All agents of one type: states (N,4) as [x,y,psi,v], static attrs
    (N,3) as [length,width,rear_axis_offset], and a present mask."""

    model: KinematicModel
    attrs: np.ndarray
    states: np.ndarray
    present: np.ndarray

    @classmethod
    def create(cls, model: KinematicModel,
               attrs: Iterable[AgentAttributes],
               states: np.ndarray | Sequence[Sequence[float]],
               present: np.ndarray | None = None) -> "AgentBatch":
        attr_rows = np.array(
            [[a.length, a.width, a.rear_axis_offset] for a in attrs], dtype=np.float64
        ).reshape(-1, 3)
        state_rows = np.asarray(states, dtype=np.float64).reshape(-1, 4)
        if attr_rows.shape[0] != state_rows.shape[0]:
            raise DimensionMismatch("attrs and states row counts differ")
        if present is None:
            present = np.ones(state_rows.shape[0], dtype=bool)
        return cls(model, attr_rows, state_rows, np.asarray(present, dtype=bool).copy())

    @classmethod
    def empty(cls, model: KinematicModel) -> "AgentBatch":
        return cls(model, np.zeros((0, 3)), np.zeros((0, 4)), np.zeros(0, dtype=bool))

    @property
    def n(self) -> int:
        return self.states.shape[0]

    def copy(self) -> "AgentBatch":
        return AgentBatch(self.model, self.attrs, self.states.copy(), self.present.copy())

    def corners(self) -> np.ndarray:
        """Body rectangles of all rows as (N,4,2) corner arrays."""
        s, a = self.states, self.attrs
        return rect_corners_batch(s[:, 0], s[:, 1], s[:, 2], a[:, 0], a[:, 1])

    def rect(self, idx: int) -> OrientedRect:
        x, y, psi, _ = self.states[idx]
        return OrientedRect(Pose2(x, y, psi), self.attrs[idx, 0], self.attrs[idx, 1])


@dataclass
class WorldState:
    """One simulated world; treated as immutable (step returns a new one)."""

    map: MapBundle
    agents: dict[str, AgentBatch]
    controls: list[TrafficControl] = field(default_factory=list)
    step_index: int = 0
    dt: float = 0.1

    def copy(self) -> "WorldState":
        return WorldState(
            self.map,
            {name: b.copy() for name, b in self.agents.items()},
            list(self.controls),
            self.step_index,
            self.dt,
        )


def world_step(w: WorldState, actions: Mapping[str, np.ndarray] | None) -> WorldState:
    """Advance every present agent by its model; tick controls and the clock.

    ``actions`` maps agent type to an (N, action_dim) array aligned with the
    batch. Absent agents keep their rows untouched (their action values are
    ignored). Raises MissingActions when a type with present agents has no
    entry, DimensionMismatch on misaligned shapes.
    """
    new_agents: dict[str, AgentBatch] = {}
    for name, batch in w.agents.items():
        present = batch.present
        new_states = batch.states.copy()
        if present.any():
            if actions is None or name not in actions:
                raise MissingActions(name, int(np.argmax(present)))
            act = np.asarray(actions[name], dtype=np.float64)
            if act.ndim != 2 or act.shape[0] != batch.n:
                raise DimensionMismatch(
                    f"actions[{name!r}]: expected ({batch.n}, {batch.model.action_dim}),"
                    f" got {act.shape}"
                )
            if present.all():
                new_states = batch.model.step_batch(
                    batch.states, act, batch.attrs[:, 2], w.dt
                )
            else:
                new_states[present] = batch.model.step_batch(
                    batch.states[present], act[present], batch.attrs[present, 2], w.dt
                )
        new_agents[name] = AgentBatch(batch.model, batch.attrs, new_states, present.copy())
    next_index = w.step_index + 1
    return WorldState(
        map=w.map,
        agents=new_agents,
        controls=advance_controls(w.controls, next_index),
        step_index=next_index,
        dt=w.dt,
    )


def lift(f: Callable[[AgentBatch], object]) -> Callable[[Mapping[str, AgentBatch]], dict]:
    """Turn a per-batch function into one over a type->batch mapping.

    On a single-type mapping the lifted function's sole result equals f on
    that batch, so homogeneous worlds need no special casing. Errors raised
    by f are re-raised as LiftError tagged with the agent type.
    """

    def lifted(agents: Mapping[str, AgentBatch]) -> dict:
        out = {}
        for name, batch in agents.items():
            try:
                out[name] = f(batch)
            except Exception as exc:
                raise LiftError(name, exc) from exc
        return out

    return lifted


class Simulator:
    """Mutable handle over a WorldState exposing the step interface that
    wrappers decorate."""

    def __init__(self, world: WorldState):
        self.world = world

    def step(self, actions: Mapping[str, np.ndarray] | None) -> WorldState:
        self.world = world_step(self.world, actions)
        return self.world


class _Wrapper:
    """Base delegating wrapper; subclasses hook before_step/after_step."""

    def __init__(self, inner):
        self.inner = inner

    @property
    def world(self) -> WorldState:
        return self.inner.world

    @world.setter
    def world(self, value: WorldState) -> None:
        self.inner.world = value

    def step(self, actions: Mapping[str, np.ndarray] | None) -> WorldState:
        actions = self.before_step(actions)
        world = self.inner.step(actions)
        return self.after_step(world)

    def before_step(self, actions):
        return actions

    def after_step(self, world: WorldState) -> WorldState:
        return world


class ReplayController(_Wrapper):
    """Forces a subset of one type's agents to follow logged trajectories.

    trajectories: (T, N, 4) array of states, row-aligned with the batch; at
    step t the controlled agents' actions are replaced by fit_action toward
    the logged state at t+1. Raises HorizonExceeded past the log's end.
    """

    def __init__(self, inner, trajectories: np.ndarray,
                 controlled: Sequence[int], agent_type: str = VEHICLE):
        super().__init__(inner)
        self.trajectories = np.asarray(trajectories, dtype=np.float64)
        if self.trajectories.ndim != 3 or self.trajectories.shape[2] != 4:
            raise ConfigError("trajectories must have shape (T, N, 4)")
        self.controlled = list(controlled)
        self.agent_type = agent_type

    def before_step(self, actions):
        world = self.world
        t_next = world.step_index + 1
        if t_next >= self.trajectories.shape[0]:
            raise HorizonExceeded(
                f"replay log ends at step {self.trajectories.shape[0] - 1}"
            )
        batch = world.agents[self.agent_type]
        acts = dict(actions or {})
        arr = np.array(
            acts.get(self.agent_type, np.zeros((batch.n, batch.model.action_dim))),
            dtype=np.float64,
        )
        for i in self.controlled:
            arr[i] = batch.model.fit_action(
                batch.states[i], self.trajectories[t_next, i], batch.attrs[i, 2], world.dt
            )
        acts[self.agent_type] = arr
        return acts


class BoundaryRemoval(_Wrapper):
    """Marks agents absent once their center leaves an axis-aligned area."""

    def __init__(self, inner, area: tuple[float, float, float, float]):
        super().__init__(inner)
        minx, miny, maxx, maxy = area
        if not (minx < maxx and miny < maxy):
            raise ConfigError("area must be (minx, miny, maxx, maxy) with positive extent")
        self.area = (minx, miny, maxx, maxy)

    def after_step(self, world: WorldState) -> WorldState:
        minx, miny, maxx, maxy = self.area
        for batch in world.agents.values():
            s = batch.states
            inside = (
                (s[:, 0] >= minx) & (s[:, 0] <= maxx)
                & (s[:, 1] >= miny) & (s[:, 1] <= maxy)
            )
            batch.present &= inside
        self.world = world
        return world


class InfractionMonitor(_Wrapper):
    """Accumulates per-step infraction reports for one agent."""

    def __init__(self, inner, agent_type: str = VEHICLE, index: int = 0,
                 lane_radius: float = 10.0):
        super().__init__(inner)
        self.agent_type = agent_type
        self.index = index
        self.lane_radius = lane_radius
        self.reports: list[_infraction.InfractionReport] = []

    def step(self, actions):
        prev = self.world.agents[self.agent_type].states[self.index].copy()
        world = self.inner.step(actions)
        self.reports.append(
            _infraction.infraction_report(
                world, self.agent_type, self.index, prev, self.lane_radius
            )
        )
        return world


class FrameRecorder(_Wrapper):
    """Writes one numbered PPM frame per step (plus frame 0 on attach)."""

    def __init__(self, inner, directory, config: RenderConfig | None = None,
                 agent_type: str = VEHICLE, index: int = 0):
        super().__init__(inner)
        from pathlib import Path

        self.directory = Path(directory)
        self.directory.mkdir(parents=True, exist_ok=True)
        self.config = config or RenderConfig()
        self.agent_type = agent_type
        self.index = index
        self.frame_count = 0
        self._write_frame()

    def _camera(self) -> Pose2:
        x, y, psi, _ = self.world.agents[self.agent_type].states[self.index]
        return Pose2(x, y, psi)

    def _write_frame(self) -> None:
        frame = render(self.world, self._camera(), self.config)
        write_ppm(self.directory / f"{self.frame_count:06d}.ppm", frame.pixels)
        self.frame_count += 1

    def after_step(self, world: WorldState) -> WorldState:
        self._write_frame()
        return world


WRAPPERS = {
    "replay_controller": ReplayController,
    "boundary_removal": BoundaryRemoval,
    "infraction_monitor": InfractionMonitor,
    "frame_recorder": FrameRecorder,
}


def wrap(handle, kind: str, **config):
    """Wrap a simulator handle by wrapper name; wrappers compose freely."""
    try:
        cls = WRAPPERS[kind]
    except KeyError:
        raise ConfigError(f"unknown wrapper {kind!r}") from None
    return cls(handle, **config)
