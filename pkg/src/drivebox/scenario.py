"""Scenario definitions: everything an episode needs besides the map.

Scenario JSON schema:

    {
      "map": "straight_road",
      "ego_spawns": [[x, y, psi, v], ...],
      "waypoints": [[x, y], ...],
      "predefined_agents": [{"state": [x, y, psi, v], "length": 4.6,
                             "width": 2.0, "rear_axis_offset": 1.4,
                             "static": false}, ...],
      "npc_count": 0,
      "controls": [{"id": "tl0", "kind": "traffic_light",
                    "program": [["green", 50], ["yellow", 10], ["red", 40]]},
                   {"id": "s0", "kind": "stop_sign"}],
      "max_steps": 200,
      "reward": {"alpha1": 1.0, "alpha2": 10.0, "beta1": 0.05,
                 "move_eps": 0.5, "waypoint_radius": 2.0}
    }

Control entries bind programs to stop-line rectangles declared by the map
(matched by control id). ``static`` marks predefined agents the behavior
policy must not move (parked vehicles). Reward accepts optional
``lambda_collision`` / ``lambda_offroad`` / ``lambda_traffic_light`` /
``lambda_wrong_way`` penalty weights, all defaulting to 0.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import MalformedScenario
from .kinematics import AgentAttributes
from .maps import MapBundle, _DATA_DIR
from .world import CONTROL_KINDS, TrafficControl, advance_controls


@dataclass(frozen=True)
class RewardConfig:
    alpha1: float = 1.0
    alpha2: float = 10.0
    beta1: float = 0.05
    move_eps: float = 0.5
    waypoint_radius: float = 2.0
    lambda_collision: float = 0.0
    lambda_offroad: float = 0.0
    lambda_traffic_light: float = 0.0
    lambda_wrong_way: float = 0.0

    def to_dict(self) -> dict:
        return {
            "alpha1": self.alpha1, "alpha2": self.alpha2, "beta1": self.beta1,
            "move_eps": self.move_eps, "waypoint_radius": self.waypoint_radius,
            "lambda_collision": self.lambda_collision,
            "lambda_offroad": self.lambda_offroad,
            "lambda_traffic_light": self.lambda_traffic_light,
            "lambda_wrong_way": self.lambda_wrong_way,
        }


@dataclass(frozen=True)
class PredefinedAgent:
    attrs: AgentAttributes
    state: tuple[float, float, float, float]
    static: bool = False


@dataclass(frozen=True)
class ControlSpec:
    id: str
    kind: str = "traffic_light"
    program: tuple[tuple[str, int], ...] = ()


@dataclass(frozen=True)
class Scenario:
    map_name: str
    ego_spawns: np.ndarray            # (K, 4): x, y, psi, v
    waypoints: np.ndarray             # (M, 2)
    predefined: tuple[PredefinedAgent, ...] = ()
    npc_count: int = 0
    controls: tuple[ControlSpec, ...] = ()
    max_steps: int = 200
    reward: RewardConfig = field(default_factory=RewardConfig)
    ego_attrs: AgentAttributes = field(default_factory=AgentAttributes)

    def __post_init__(self) -> None:
        spawns = np.asarray(self.ego_spawns, dtype=np.float64).reshape(-1, 4)
        waypoints = np.asarray(self.waypoints, dtype=np.float64).reshape(-1, 2)
        if spawns.shape[0] < 1:
            raise MalformedScenario("need at least one ego spawn")
        if waypoints.shape[0] < 1:
            raise MalformedScenario("need at least one waypoint")
        if not (np.isfinite(spawns).all() and np.isfinite(waypoints).all()):
            raise MalformedScenario("non-finite spawn or waypoint")
        if self.npc_count < 0 or self.max_steps < 1:
            raise MalformedScenario("npc_count must be >= 0 and max_steps >= 1")
        object.__setattr__(self, "ego_spawns", spawns)
        object.__setattr__(self, "waypoints", waypoints)

    def validate_against(self, bundle: MapBundle) -> None:
        """Checks that need the map: waypoints must lie on the drivable mesh
        and control ids must match a stop line."""
        on = bundle.mesh.contains(self.waypoints)
        if not on.all():
            bad = int(np.flatnonzero(~on)[0])
            raise MalformedScenario(
                f"waypoint {bad} at {self.waypoints[bad].tolist()} is off the drivable mesh"
            )
        declared = {control_id for _, control_id in bundle.stop_lines}
        for spec in self.controls:
            if spec.id not in declared:
                raise MalformedScenario(
                    f"control {spec.id!r} has no stop line on map {bundle.name!r}"
                )

    def build_controls(self, bundle: MapBundle) -> list[TrafficControl]:
        """Bind control programs to the map's stop-line rectangles.

        Map stop lines without a scenario entry become stateless stop signs.
        """
        spec_by_id = {c.id: c for c in self.controls}
        out = []
        for rect, control_id in bundle.stop_lines:
            spec = spec_by_id.get(control_id)
            if spec is None:
                out.append(TrafficControl(control_id, rect, "stop_sign"))
            else:
                out.append(TrafficControl(control_id, rect, spec.kind, spec.program))
        return advance_controls(out, 0)


def _reject_constant(token: str) -> float:
    raise MalformedScenario(f"non-finite JSON constant {token!r}")


def scenario_from_dict(data: dict) -> Scenario:
    if not isinstance(data, dict):
        raise MalformedScenario("scenario must be a JSON object")
    try:
        map_name = data["map"]
        ego_spawns = data["ego_spawns"]
        waypoints = data["waypoints"]
    except KeyError as exc:
        raise MalformedScenario(f"missing required field {exc}") from exc
    if not isinstance(map_name, str) or not map_name:
        raise MalformedScenario("map must be a nonempty string")

    predefined = []
    for entry in data.get("predefined_agents", []):
        try:
            attrs = AgentAttributes(
                length=float(entry.get("length", 4.6)),
                width=float(entry.get("width", 2.0)),
                rear_axis_offset=float(entry.get("rear_axis_offset", 1.4)),
            )
            state = tuple(float(v) for v in entry["state"])
        except (KeyError, TypeError, ValueError) as exc:
            raise MalformedScenario(f"bad predefined agent: {exc}") from exc
        if len(state) != 4:
            raise MalformedScenario("predefined agent state must be [x, y, psi, v]")
        predefined.append(PredefinedAgent(attrs, state, bool(entry.get("static", False))))

    controls = []
    for entry in data.get("controls", []):
        kind = entry.get("kind", "traffic_light")
        if kind not in CONTROL_KINDS:
            raise MalformedScenario(f"unknown control kind {kind!r}")
        program = tuple(
            (str(state), int(duration)) for state, duration in entry.get("program", [])
        )
        controls.append(ControlSpec(str(entry["id"]), kind, program))

    reward_raw = data.get("reward", {})
    try:
        reward = RewardConfig(**{k: float(v) for k, v in reward_raw.items()})
    except TypeError as exc:
        raise MalformedScenario(f"bad reward config: {exc}") from exc

    ego_raw = data.get("ego", {})
    ego_attrs = AgentAttributes(
        length=float(ego_raw.get("length", 4.6)),
        width=float(ego_raw.get("width", 2.0)),
        rear_axis_offset=float(ego_raw.get("rear_axis_offset", 1.4)),
    )

    return Scenario(
        map_name=map_name,
        ego_spawns=np.asarray(ego_spawns, dtype=np.float64),
        waypoints=np.asarray(waypoints, dtype=np.float64),
        predefined=tuple(predefined),
        npc_count=int(data.get("npc_count", 0)),
        controls=tuple(controls),
        max_steps=int(data.get("max_steps", 200)),
        reward=reward,
        ego_attrs=ego_attrs,
    )


def scenario_to_dict(sc: Scenario) -> dict:
    return {
        "map": sc.map_name,
        "ego_spawns": sc.ego_spawns.tolist(),
        "waypoints": sc.waypoints.tolist(),
        "predefined_agents": [
            {
                "state": list(p.state),
                "length": p.attrs.length,
                "width": p.attrs.width,
                "rear_axis_offset": p.attrs.rear_axis_offset,
                "static": p.static,
            }
            for p in sc.predefined
        ],
        "npc_count": sc.npc_count,
        "controls": [
            {"id": c.id, "kind": c.kind, "program": [list(p) for p in c.program]}
            for c in sc.controls
        ],
        "max_steps": sc.max_steps,
        "reward": sc.reward.to_dict(),
        "ego": {
            "length": sc.ego_attrs.length,
            "width": sc.ego_attrs.width,
            "rear_axis_offset": sc.ego_attrs.rear_axis_offset,
        },
    }


def load_scenario(path: str | Path) -> Scenario:
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"),
                          parse_constant=_reject_constant)
    except OSError as exc:
        raise MalformedScenario(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise MalformedScenario(f"invalid JSON in {path}: {exc}") from exc
    return scenario_from_dict(data)


def save_scenario(sc: Scenario, path: str | Path) -> None:
    Path(path).write_text(json.dumps(scenario_to_dict(sc), indent=1), encoding="utf-8")


def bundled_scenario_path(name: str) -> Path:
    return _DATA_DIR / "scenarios" / f"{name}.json"


def load_bundled_scenario(name: str) -> Scenario:
    return load_scenario(bundled_scenario_path(name))


def bundled_scenario_names() -> list[str]:
    return sorted(p.stem for p in (_DATA_DIR / "scenarios").glob("*.json"))


def resolve_scenario(ref: str | Path | Scenario) -> Scenario:
    """Accept a Scenario, a bundled name, or a filesystem path."""
    if isinstance(ref, Scenario):
        return ref
    path = Path(ref)
    if path.suffix == ".json" and path.exists():
        return load_scenario(path)
    bundled = bundled_scenario_path(str(ref))
    if bundled.exists():
        return load_scenario(bundled)
    raise MalformedScenario(f"no scenario named or at {ref!r}")
