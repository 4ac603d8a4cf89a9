"""Author the bundled synthetic maps.

Run from the repo root: ``python3 scripts/generate_maps.py``. Writes the five
map JSON files into src/drivebox/data/maps/ and validates each one by
loading it back and checking that every lane vertex lies on the drivable
mesh (so lane-based agent placement stays on-road).
"""
from __future__ import annotations

import math
import sys
from pathlib import Path

import numpy as np

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from drivebox.maps import map_from_dict, save_map  # noqa: E402

OUT_DIR = Path(__file__).resolve().parents[1] / "src" / "drivebox" / "data" / "maps"

ROAD_HALF = 3.5      # 7 m roads, one lane each way
LANE_OFF = 1.75


def strip_quads(points_lo: np.ndarray, points_hi: np.ndarray) -> list:
    """Triangulate the quad strip between two matched polylines."""
    tris = []
    for k in range(len(points_lo) - 1):
        a, b = points_lo[k], points_lo[k + 1]
        c, d = points_hi[k], points_hi[k + 1]
        tris.append([list(a), list(b), list(d)])
        tris.append([list(a), list(d), list(c)])
    return tris


def axis_strip(x0: float, x1: float, y_lo: float, y_hi: float, pieces: int) -> list:
    xs = np.linspace(x0, x1, pieces + 1)
    lo = np.stack([xs, np.full_like(xs, y_lo)], axis=1)
    hi = np.stack([xs, np.full_like(xs, y_hi)], axis=1)
    return strip_quads(lo, hi)


def vertical_strip(y0: float, y1: float, x_lo: float, x_hi: float, pieces: int) -> list:
    ys = np.linspace(y0, y1, pieces + 1)
    lo = np.stack([np.full_like(ys, x_lo), ys], axis=1)
    hi = np.stack([np.full_like(ys, x_hi), ys], axis=1)
    return strip_quads(lo, hi)


def arc_points(cx: float, cy: float, radius: float, a0: float, a1: float,
               n: int) -> list:
    angles = np.linspace(a0, a1, n)
    return [[cx + radius * math.cos(a), cy + radius * math.sin(a)] for a in angles]


def stop_line(control: str, x: float, y: float, psi: float) -> dict:
    return {"control": control, "center": [x, y], "psi": psi,
            "length": 0.6, "width": 3.5}


def straight_road() -> dict:
    return {
        "name": "straight_road",
        "triangles": axis_strip(0.0, 200.0, -ROAD_HALF, ROAD_HALF, 10),
        "lanes": [
            {"id": 0, "points": [[0.0, -LANE_OFF], [200.0, -LANE_OFF]]},
            {"id": 1, "points": [[200.0, LANE_OFF], [0.0, LANE_OFF]]},
        ],
        "stop_lines": [],
    }


def four_way() -> dict:
    tris = axis_strip(-60.0, 60.0, -ROAD_HALF, ROAD_HALF, 12)
    tris += vertical_strip(-60.0, 60.0, -ROAD_HALF, ROAD_HALF, 12)
    # left-turn guide: eastbound approach to northbound exit
    turn = arc_points(-6.0, 6.0, 7.75, -0.5 * math.pi, 0.0, 9)
    lanes = [
        {"id": 0, "points": [[-60.0, -LANE_OFF], [60.0, -LANE_OFF]]},
        {"id": 1, "points": [[60.0, LANE_OFF], [-60.0, LANE_OFF]]},
        {"id": 2, "points": [[LANE_OFF, -60.0], [LANE_OFF, 60.0]]},
        {"id": 3, "points": [[-LANE_OFF, 60.0], [-LANE_OFF, -60.0]]},
        {"id": 4, "points": [[-12.0, -LANE_OFF], [-6.0, -LANE_OFF]] + turn[1:-1]
                  + [[LANE_OFF, 6.0], [LANE_OFF, 12.0]]},
    ]
    stops = [
        stop_line("tl_e", -5.0, -LANE_OFF, 0.0),
        stop_line("tl_w", 5.0, LANE_OFF, 0.0),
        stop_line("tl_n", LANE_OFF, -5.0, 0.5 * math.pi),
        stop_line("tl_s", -LANE_OFF, 5.0, 0.5 * math.pi),
    ]
    return {"name": "four_way", "triangles": tris, "lanes": lanes,
            "stop_lines": stops}


def three_way() -> dict:
    tris = axis_strip(-60.0, 60.0, -ROAD_HALF, ROAD_HALF, 12)
    tris += vertical_strip(-60.0, 0.0, -ROAD_HALF, ROAD_HALF, 6)
    merge = arc_points(6.0, -6.0, 4.25, math.pi, 0.5 * math.pi, 7)
    lanes = [
        {"id": 0, "points": [[-60.0, -LANE_OFF], [60.0, -LANE_OFF]]},
        {"id": 1, "points": [[60.0, LANE_OFF], [-60.0, LANE_OFF]]},
        {"id": 2, "points": [[LANE_OFF, -60.0], [LANE_OFF, -6.0]] + merge[1:]},
        {"id": 3, "points": [[-LANE_OFF, -4.0], [-LANE_OFF, -60.0]]},
    ]
    stops = [stop_line("stop_n", LANE_OFF, -5.0, 0.5 * math.pi)]
    return {"name": "three_way", "triangles": tris, "lanes": lanes,
            "stop_lines": stops}


def roundabout() -> dict:
    r_in, r_out, r_lane = 12.0, 26.0, 19.0
    n = 40
    angles = np.linspace(0.0, 2.0 * math.pi, n + 1)
    inner = np.stack([r_in * np.cos(angles), r_in * np.sin(angles)], axis=1)
    outer = np.stack([r_out * np.cos(angles), r_out * np.sin(angles)], axis=1)
    tris = strip_quads(inner, outer)
    tris += axis_strip(24.0, 60.0, -ROAD_HALF, ROAD_HALF, 4)
    tris += axis_strip(-60.0, -24.0, -ROAD_HALF, ROAD_HALF, 4)
    tris += vertical_strip(24.0, 60.0, -ROAD_HALF, ROAD_HALF, 4)
    tris += vertical_strip(-60.0, -24.0, -ROAD_HALF, ROAD_HALF, 4)
    ring = arc_points(0.0, 0.0, r_lane, 0.0, 2.0 * math.pi, 48)
    ring[-1] = ring[0]  # exactly closed
    lanes = [
        {"id": 0, "points": ring},
        # east approach: inbound toward the ring, outbound away
        {"id": 1, "points": [[60.0, LANE_OFF], [27.0, LANE_OFF]]},
        {"id": 2, "points": [[27.0, -LANE_OFF], [60.0, -LANE_OFF]]},
        # west approach
        {"id": 3, "points": [[-60.0, -LANE_OFF], [-27.0, -LANE_OFF]]},
        {"id": 4, "points": [[-27.0, LANE_OFF], [-60.0, LANE_OFF]]},
        # north approach
        {"id": 5, "points": [[-LANE_OFF, 60.0], [-LANE_OFF, 27.0]]},
        {"id": 6, "points": [[LANE_OFF, 27.0], [LANE_OFF, 60.0]]},
        # south approach
        {"id": 7, "points": [[LANE_OFF, -60.0], [LANE_OFF, -27.0]]},
        {"id": 8, "points": [[-LANE_OFF, -27.0], [-LANE_OFF, -60.0]]},
    ]
    stops = [
        {"control": "yield_e", "center": [28.0, LANE_OFF], "psi": 0.0,
         "length": 0.6, "width": 3.5},
        {"control": "yield_w", "center": [-28.0, -LANE_OFF], "psi": 0.0,
         "length": 0.6, "width": 3.5},
        {"control": "yield_n", "center": [-LANE_OFF, 28.0], "psi": 0.5 * math.pi,
         "length": 0.6, "width": 3.5},
        {"control": "yield_s", "center": [LANE_OFF, -28.0], "psi": 0.5 * math.pi,
         "length": 0.6, "width": 3.5},
    ]
    return {"name": "roundabout", "triangles": tris, "lanes": lanes,
            "stop_lines": stops}


def rural_road() -> dict:
    xs = np.linspace(0.0, 160.0, 41)
    ys = 15.0 * np.sin(xs / 40.0)
    dy_dx = 15.0 / 40.0 * np.cos(xs / 40.0)
    center = np.stack([xs, ys], axis=1)
    tangent = np.stack([np.ones_like(xs), dy_dx], axis=1)
    tangent /= np.linalg.norm(tangent, axis=1, keepdims=True)
    normal = np.stack([-tangent[:, 1], tangent[:, 0]], axis=1)
    tris = strip_quads(center - ROAD_HALF * normal, center + ROAD_HALF * normal)
    # keep lane ends one cross-section inside the mesh
    fwd = (center - LANE_OFF * normal)[1:-1].tolist()
    bwd = (center + LANE_OFF * normal)[1:-1][::-1].tolist()
    heading = math.atan2(tangent[15, 1], tangent[15, 0])
    fwd_pt = center[15] - LANE_OFF * normal[15]
    bwd_pt = center[30] + LANE_OFF * normal[30]
    heading_b = math.atan2(tangent[30, 1], tangent[30, 0])
    stops = [
        {"control": "stop_r1", "center": [float(fwd_pt[0]), float(fwd_pt[1])],
         "psi": heading, "length": 0.6, "width": 3.5},
        {"control": "yield_r1", "center": [float(bwd_pt[0]), float(bwd_pt[1])],
         "psi": heading_b, "length": 0.6, "width": 3.5},
    ]
    return {
        "name": "rural_road",
        "triangles": tris,
        "lanes": [{"id": 0, "points": fwd}, {"id": 1, "points": bwd}],
        "stop_lines": stops,
    }


def main() -> int:
    OUT_DIR.mkdir(parents=True, exist_ok=True)
    builders = [straight_road, four_way, three_way, roundabout, rural_road]
    for build in builders:
        data = build()
        bundle = map_from_dict(data)
        for lane in bundle.lanes:
            on = bundle.mesh.contains(lane.points)
            if not on.all():
                bad = lane.points[~on]
                raise SystemExit(
                    f"{bundle.name}: lane {lane.id} leaves the mesh at {bad[:3]}"
                )
        for rect, control in bundle.stop_lines:
            if not bundle.mesh.contains(
                np.array([[rect.center.x, rect.center.y]])
            )[0]:
                raise SystemExit(f"{bundle.name}: stop line {control} off mesh")
        path = OUT_DIR / f"{data['name']}.json"
        save_map(bundle, path)
        print(
            f"{bundle.name}: {bundle.mesh.tris.shape[0]} tris, "
            f"{len(bundle.lanes)} lanes, {len(bundle.stop_lines)} stop lines "
            f"-> {path.relative_to(Path.cwd()) if path.is_relative_to(Path.cwd()) else path}"
        )
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
