"""Static world data: drivable triangle mesh, lane centerlines, stop lines.

Maps are interchanged as JSON (see ``load_map``); geometry is held in flat
numpy arrays. A uniform 5 m grid over the mesh accelerates point-on-drivable
queries; ``contains_brute`` keeps the exhaustive scan around as an oracle.
MapBundle instances are immutable after load and safe to share across threads.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import _kernels
from .errors import EmptyMesh, MalformedMap
from .geometry import OrientedRect, Pose2, polyline_segments, segment_tangents

GRID_CELL_M = 5.0


@dataclass
class Lane:
    """Directed centerline; vertex order defines the driving direction."""

    id: int
    points: np.ndarray  # (P, 2)

    def __post_init__(self) -> None:
        pts = np.asarray(self.points, dtype=np.float64)
        if pts.ndim != 2 or pts.shape[0] < 2 or pts.shape[1] != 2:
            raise MalformedMap(f"lane {self.id}: need >=2 2D points")
        if not np.isfinite(pts).all():
            raise MalformedMap(f"lane {self.id}: non-finite coordinate")
        if (np.linalg.norm(np.diff(pts, axis=0), axis=1) == 0.0).any():
            raise MalformedMap(f"lane {self.id}: repeated consecutive point")
        self.points = pts

    def arc_lengths(self) -> np.ndarray:
        """Cumulative arc length at each vertex, starting at 0."""
        d = np.linalg.norm(np.diff(self.points, axis=0), axis=1)
        return np.concatenate([[0.0], np.cumsum(d)])

    def point_at(self, s: float) -> tuple[np.ndarray, float]:
        """Position and tangent heading at arc length s (clamped to range)."""
        cum = self.arc_lengths()
        s = min(max(s, 0.0), float(cum[-1]))
        k = int(np.searchsorted(cum, s, side="right") - 1)
        k = min(k, len(cum) - 2)
        seg = self.points[k + 1] - self.points[k]
        seg_len = float(np.linalg.norm(seg))
        t = (s - cum[k]) / seg_len
        return self.points[k] + t * seg, math.atan2(seg[1], seg[0])


@dataclass
class DrivableMesh:
    """Triangle soup with a uniform spatial grid for containment queries."""

    tris: np.ndarray  # (K, 6): ax, ay, bx, by, cx, cy
    bounds: tuple[float, float, float, float] = field(init=False)
    _grid: tuple = field(init=False, repr=False)

    def __post_init__(self) -> None:
        tris = np.asarray(self.tris, dtype=np.float64).reshape(-1, 6)
        area2 = (
            (tris[:, 2] - tris[:, 0]) * (tris[:, 5] - tris[:, 1])
            - (tris[:, 3] - tris[:, 1]) * (tris[:, 4] - tris[:, 0])
        )
        if not (area2 != 0.0).any():
            raise EmptyMesh("mesh has no triangle with nonzero area")
        self.tris = tris
        xs = tris[:, 0::2]
        ys = tris[:, 1::2]
        self.bounds = (float(xs.min()), float(ys.min()), float(xs.max()), float(ys.max()))
        self._grid = self._build_grid()

    def _build_grid(self) -> tuple:
        minx, miny, maxx, maxy = self.bounds
        nx = int(math.ceil((maxx - minx) / GRID_CELL_M)) + 1
        ny = int(math.ceil((maxy - miny) / GRID_CELL_M)) + 1
        tris = self.tris
        tminx = np.minimum.reduce([tris[:, 0], tris[:, 2], tris[:, 4]])
        tmaxx = np.maximum.reduce([tris[:, 0], tris[:, 2], tris[:, 4]])
        tminy = np.minimum.reduce([tris[:, 1], tris[:, 3], tris[:, 5]])
        tmaxy = np.maximum.reduce([tris[:, 1], tris[:, 3], tris[:, 5]])
        ix0 = np.clip(np.floor((tminx - minx) / GRID_CELL_M).astype(np.int64), 0, nx - 1)
        ix1 = np.clip(np.floor((tmaxx - minx) / GRID_CELL_M).astype(np.int64), 0, nx - 1)
        iy0 = np.clip(np.floor((tminy - miny) / GRID_CELL_M).astype(np.int64), 0, ny - 1)
        iy1 = np.clip(np.floor((tmaxy - miny) / GRID_CELL_M).astype(np.int64), 0, ny - 1)
        cells: list[list[int]] = [[] for _ in range(nx * ny)]
        for t in range(tris.shape[0]):
            for iy in range(iy0[t], iy1[t] + 1):
                base = iy * nx
                for ix in range(ix0[t], ix1[t] + 1):
                    cells[base + ix].append(t)
        cell_start = np.zeros(nx * ny + 1, dtype=np.int64)
        cell_start[1:] = np.cumsum([len(c) for c in cells])
        cell_items = np.fromiter(
            (t for c in cells for t in c), dtype=np.int64, count=int(cell_start[-1])
        )
        return cell_start, cell_items, minx, miny, 1.0 / GRID_CELL_M, nx, ny

    def contains(self, pts: np.ndarray) -> np.ndarray:
        """Grid-accelerated closed containment for points (P,2) -> bool (P,)."""
        cell_start, cell_items, minx, miny, inv, nx, ny = self._grid
        return _kernels.points_on_mesh(
            np.asarray(pts, dtype=np.float64).reshape(-1, 2),
            self.tris, cell_start, cell_items, minx, miny, inv, nx, ny,
        )

    def contains_brute(self, pts: np.ndarray) -> np.ndarray:
        """Exhaustive all-triangles scan; oracle for contains()."""
        return _kernels.points_in_tris_any(
            np.asarray(pts, dtype=np.float64).reshape(-1, 2), self.tris
        )


@dataclass
class MapBundle:
    """A named map: mesh + lanes + stop-line rectangles bound to control ids."""

    name: str
    mesh: DrivableMesh
    lanes: list[Lane]
    stop_lines: list[tuple[OrientedRect, str]]

    def __post_init__(self) -> None:
        self.lanes = sorted(self.lanes, key=lambda ln: ln.id)
        ids = [ln.id for ln in self.lanes]
        if len(set(ids)) != len(ids):
            raise MalformedMap("duplicate lane id")
        seg_a, seg_b, tangent, lane_id = [], [], [], []
        for ln in self.lanes:
            a, b = polyline_segments(ln.points)
            seg_a.append(a)
            seg_b.append(b)
            tangent.append(segment_tangents(a, b))
            lane_id.append(np.full(a.shape[0], ln.id, dtype=np.int64))
        if self.lanes:
            self._seg_a = np.concatenate(seg_a)
            self._seg_b = np.concatenate(seg_b)
            self._seg_tangent = np.concatenate(tangent)
            self._seg_lane = np.concatenate(lane_id)
        else:
            self._seg_a = np.zeros((0, 2))
            self._seg_b = np.zeros((0, 2))
            self._seg_tangent = np.zeros(0)
            self._seg_lane = np.zeros(0, dtype=np.int64)
        self._lane_by_id = {ln.id: ln for ln in self.lanes}

    def lane(self, lane_id: int) -> Lane:
        return self._lane_by_id[lane_id]

    def point_on_drivable(self, x: float, y: float) -> bool:
        return bool(self.mesh.contains(np.array([[x, y]]))[0])

    def nearest_lane_direction(self, x: float, y: float,
                               radius: float = 10.0) -> tuple[int, float] | None:
        """(lane id, tangent heading) of the closest centerline segment.

        None when no lane comes within radius. Exact distance ties resolve to
        the smallest lane id (segments are stored sorted by lane id).
        """
        idx, d2 = _kernels.nearest_segment(x, y, self._seg_a, self._seg_b)
        if idx < 0 or d2 > radius * radius:
            return None
        return int(self._seg_lane[idx]), float(self._seg_tangent[idx])

    def lane_segments(self) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
        """Flattened (seg_a, seg_b, tangent, lane_id) arrays over all lanes."""
        return self._seg_a, self._seg_b, self._seg_tangent, self._seg_lane


def _reject_constant(token: str) -> float:
    raise MalformedMap(f"non-finite JSON constant {token!r}")


def _load_json(path: str | Path) -> dict:
    try:
        text = Path(path).read_text(encoding="utf-8")
        data = json.loads(text, parse_constant=_reject_constant)
    except OSError as exc:
        raise MalformedMap(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise MalformedMap(f"invalid JSON in {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise MalformedMap("top-level JSON value must be an object")
    return data


def load_map(path: str | Path) -> MapBundle:
    """Load and validate a map JSON file.

    Schema: {"name": str, "triangles": [[[x,y],[x,y],[x,y]], ...],
    "lanes": [{"id": int, "points": [[x,y], ...]}, ...],
    "stop_lines": [{"control": str, "center": [x,y], "psi": float,
    "length": float, "width": float}, ...]}. Units meters/radians; NaN and
    infinities are rejected.
    """
    data = _load_json(path)
    return map_from_dict(data)


def map_from_dict(data: dict) -> MapBundle:
    name = data.get("name")
    if not isinstance(name, str) or not name:
        raise MalformedMap("missing or empty map name")
    tris_raw = data.get("triangles")
    if not isinstance(tris_raw, list) or not tris_raw:
        raise MalformedMap("triangles must be a nonempty list")
    tris = np.asarray(tris_raw, dtype=np.float64)
    if tris.ndim != 3 or tris.shape[1:] != (3, 2):
        raise MalformedMap("each triangle must be three [x, y] vertices")
    if not np.isfinite(tris).all():
        raise MalformedMap("non-finite triangle coordinate")
    lanes = []
    for entry in data.get("lanes", []):
        if not isinstance(entry, dict) or "id" not in entry or "points" not in entry:
            raise MalformedMap("lane entries need id and points")
        if not isinstance(entry["id"], int):
            raise MalformedMap("lane id must be an integer")
        lanes.append(Lane(entry["id"], np.asarray(entry["points"], dtype=np.float64)))
    stop_lines = []
    for entry in data.get("stop_lines", []):
        try:
            center = entry["center"]
            rect = OrientedRect(
                Pose2(float(center[0]), float(center[1]), float(entry["psi"])),
                float(entry["length"]), float(entry["width"]),
            )
            control = entry["control"]
        except (KeyError, TypeError, IndexError, ValueError) as exc:
            raise MalformedMap(f"bad stop_line entry: {exc}") from exc
        if not isinstance(control, str) or not control:
            raise MalformedMap("stop_line control id must be a nonempty string")
        if not (rect.length > 0 and rect.width > 0):
            raise MalformedMap("stop_line dimensions must be positive")
        if not all(math.isfinite(v) for v in (rect.center.x, rect.center.y,
                                              rect.center.psi, rect.length, rect.width)):
            raise MalformedMap("non-finite stop_line field")
        stop_lines.append((rect, control))
    mesh = DrivableMesh(tris.reshape(-1, 6))
    return MapBundle(name=name, mesh=mesh, lanes=lanes, stop_lines=stop_lines)


def map_to_dict(bundle: MapBundle) -> dict:
    return {
        "name": bundle.name,
        "triangles": bundle.mesh.tris.reshape(-1, 3, 2).tolist(),
        "lanes": [
            {"id": ln.id, "points": ln.points.tolist()} for ln in bundle.lanes
        ],
        "stop_lines": [
            {
                "control": control,
                "center": [rect.center.x, rect.center.y],
                "psi": rect.center.psi,
                "length": rect.length,
                "width": rect.width,
            }
            for rect, control in bundle.stop_lines
        ],
    }


def save_map(bundle: MapBundle, path: str | Path) -> None:
    """Serialize a MapBundle back to the JSON schema (load_map round-trips)."""
    Path(path).write_text(json.dumps(map_to_dict(bundle), indent=1), encoding="utf-8")


def convert_lanelet2(path: str | Path) -> MapBundle:
    """Placeholder for an external Lanelet2/OSM converter."""
    raise NotImplementedError(
        "Lanelet2 ingestion is delegated to an external converter; "
        "produce the JSON schema consumed by load_map instead"
    )


_DATA_DIR = Path(__file__).parent / "data"


def bundled_map_path(name: str) -> Path:
    return _DATA_DIR / "maps" / f"{name}.json"


def load_bundled_map(name: str) -> MapBundle:
    """Load one of the maps shipped with the package by bare name."""
    return load_map(bundled_map_path(name))


def bundled_map_names() -> list[str]:
    return sorted(p.stem for p in (_DATA_DIR / "maps").glob("*.json"))
