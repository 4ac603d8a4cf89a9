"""Infraction predicates over a world: collision, off-road, wrong-way,
red-light crossing.

All checks are pure functions of the world (plus the previous state for the
light check, which is defined on the motion segment). Conventions:

- collision uses the closed separating-axis test, so touching counts;
- off-road means at least one of the four body corners is on no triangle;
- wrong-way is a strictly-greater-than pi/2 heading deviation from the
  nearest lane within ``lane_radius`` (perpendicular is not an infraction);
- a traffic-light violation is the motion segment intersecting a red light's
  rectangle, except when both endpoints are inside it (a vehicle stopped on
  the stop line does not trigger).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np

from . import _kernels
from .errors import AbsentAgent
from .geometry import segment_intersects_rect, shortest_angle_diff

if TYPE_CHECKING:
    from .world import WorldState


@dataclass(frozen=True)
class InfractionReport:
    collision: bool = False
    collision_with: tuple[str, int] | None = None
    offroad: bool = False
    wrong_way: bool = False
    wrong_way_lane: int | None = None
    traffic_light: bool = False
    traffic_light_id: str | None = None

    def any(self) -> bool:
        return self.collision or self.offroad or self.wrong_way or self.traffic_light

    def to_dict(self) -> dict:
        return {
            "collision": self.collision,
            "collision_with": list(self.collision_with) if self.collision_with else None,
            "offroad": self.offroad,
            "wrong_way": self.wrong_way,
            "wrong_way_lane": self.wrong_way_lane,
            "traffic_light": self.traffic_light,
            "traffic_light_id": self.traffic_light_id,
        }


def _require_present(w: WorldState, agent_type: str, idx: int) -> None:
    batch = w.agents.get(agent_type)
    if batch is None or idx < 0 or idx >= batch.n or not batch.present[idx]:
        raise AbsentAgent(f"no present agent {agent_type}[{idx}]")


def check_collision(w: WorldState, agent_type: str, idx: int) -> tuple[bool, tuple[str, int] | None]:
    """Whether the agent's rectangle overlaps any other present agent's."""
    _require_present(w, agent_type, idx)
    own = w.agents[agent_type].corners()[idx]
    for name, batch in w.agents.items():
        if batch.n == 0:
            continue
        mask = batch.present.copy()
        if name == agent_type:
            mask[idx] = False
        if not mask.any():
            continue
        hit = _kernels.sat_overlap_first(own, batch.corners(), mask)
        if hit >= 0:
            return True, (name, int(hit))
    return False, None


def check_offroad(w: WorldState, agent_type: str, idx: int) -> bool:
    """Whether any of the agent's four corners leaves the drivable mesh."""
    _require_present(w, agent_type, idx)
    corners = w.agents[agent_type].corners()[idx]
    return not bool(w.map.mesh.contains(corners).all())


def check_wrong_way(w: WorldState, agent_type: str, idx: int,
                    lane_radius: float = 10.0) -> tuple[bool, int | None]:
    """Whether the agent drives against the nearest lane's direction."""
    _require_present(w, agent_type, idx)
    x, y, psi = w.agents[agent_type].states[idx, :3]
    near = w.map.nearest_lane_direction(x, y, radius=lane_radius)
    if near is None:
        return False, None
    lane_id, tangent = near
    if abs(shortest_angle_diff(psi, tangent)) > 0.5 * math.pi:
        return True, lane_id
    return False, None


def check_traffic_light(w: WorldState, agent_type: str, idx: int,
                        prev_state: np.ndarray) -> tuple[bool, str | None]:
    """Whether the motion segment from prev_state crossed a red light rect."""
    _require_present(w, agent_type, idx)
    cur = w.agents[agent_type].states[idx]
    p0 = np.asarray(prev_state, dtype=np.float64)[:2]
    p1 = cur[:2]
    for control in w.controls:
        if control.kind != "traffic_light" or control.state != "red":
            continue
        rect = control.rect
        if not segment_intersects_rect(p0, p1, rect):
            continue
        if rect.contains_point(p0[0], p0[1]) and rect.contains_point(p1[0], p1[1]):
            continue
        return True, control.id
    return False, None


def infraction_report(w: WorldState, agent_type: str, idx: int,
                      prev_state: np.ndarray,
                      lane_radius: float = 10.0) -> InfractionReport:
    """Run all four checks for one agent and bundle the outcome."""
    collision, hit = check_collision(w, agent_type, idx)
    offroad = check_offroad(w, agent_type, idx)
    wrong_way, lane_id = check_wrong_way(w, agent_type, idx, lane_radius)
    light, control_id = check_traffic_light(w, agent_type, idx, prev_state)
    return InfractionReport(
        collision=collision, collision_with=hit,
        offroad=offroad,
        wrong_way=wrong_way, wrong_way_lane=lane_id,
        traffic_light=light, traffic_light_id=control_id,
    )


def pairwise_collisions(corners: np.ndarray, present: np.ndarray) -> list[tuple[int, int]]:
    """All colliding index pairs (i < j) among rects given as (N,4,2) corners."""
    out = []
    n = corners.shape[0]
    for i in range(n):
        if not present[i]:
            continue
        mask = present.copy()
        mask[: i + 1] = False
        j = _kernels.sat_overlap_first(corners[i], corners, mask)
        while j >= 0:
            out.append((i, int(j)))
            mask[: j + 1] = False
            j = _kernels.sat_overlap_first(corners[i], corners, mask)
    return out
