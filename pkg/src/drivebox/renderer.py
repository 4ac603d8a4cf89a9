"""Egocentric birdview rasterization.

The camera sits on the ego pose: the heading points screen-up and the camera
center maps to 3/4 of the frame height, so most of the view lies ahead of
the vehicle. Painting order is background, drivable mesh, lane markings,
stop-line rectangles (colored by light state; stateless signs are skipped),
non-ego agents, ego, then the next-waypoint disc.

Two backends: "cpu" is the real fixed-point rasterizer (deterministic,
bitwise reproducible across machines); "dummy" returns an all-zero buffer of
the requested size and ignores the world entirely.

Lane markings are 0.7 m strips centered on the centerline offset by +-1.75 m
(left/right of the driving direction). Pixels where a left and a right
boundary coincide are painted with the dedicated overlap color.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import TYPE_CHECKING

import numpy as np

from . import _kernels
from .errors import BackendUnavailable
from .geometry import Pose2

if TYPE_CHECKING:
    from .world import WorldState

RGB = tuple[int, int, int]


@dataclass(frozen=True)
class ColorMap:
    """RGB byte triples for every element class the renderer can paint."""

    background: RGB = (0, 0, 0)
    drivable: RGB = (128, 128, 128)
    ego: RGB = (255, 0, 0)
    vehicle_npc: RGB = (0, 64, 255)
    waypoint: RGB = (0, 200, 0)
    light_red: RGB = (255, 0, 0)
    light_yellow: RGB = (255, 255, 0)
    light_green: RGB = (0, 255, 0)
    lane_left: RGB = (0, 100, 0)
    lane_right: RGB = (160, 32, 240)
    lane_overlap: RGB = (255, 255, 255)

    def __post_init__(self) -> None:
        for f in fields(self):
            value = getattr(self, f.name)
            if len(value) != 3 or not all(
                isinstance(v, int) and 0 <= v <= 255 for v in value
            ):
                raise ValueError(f"{f.name} must be three ints in 0..255")
            object.__setattr__(self, f.name, tuple(value))

    @classmethod
    def from_dict(cls, mapping: dict) -> "ColorMap":
        return cls(**{k: tuple(v) for k, v in mapping.items()})


@dataclass(frozen=True)
class RenderConfig:
    size: int = 64
    meters_per_pixel: float = 0.6
    colormap: ColorMap = field(default_factory=ColorMap)
    backend: str = "cpu"
    ego_row_frac: float = 0.75  # camera center sits at this fraction of height
    lane_offset: float = 1.75
    marking_width: float = 0.7
    waypoint_radius: float = 2.0

    def __post_init__(self) -> None:
        if self.size <= 0 or self.meters_per_pixel <= 0:
            raise ValueError("size and meters_per_pixel must be positive")


@dataclass(frozen=True)
class BirdviewFrame:
    width: int
    height: int
    pixels: np.ndarray  # (H, W, 3) uint8
    meters_per_pixel: float
    camera: Pose2


def _to_pixels(camera: Pose2, xs: np.ndarray, ys: np.ndarray,
               cfg: RenderConfig) -> tuple[np.ndarray, np.ndarray]:
    """World coords -> continuous (col, row) pixel coords, heading screen-up."""
    c, s = math.cos(camera.psi), math.sin(camera.psi)
    dx = xs - camera.x
    dy = ys - camera.y
    forward = c * dx + s * dy
    left = -s * dx + c * dy
    col = 0.5 * cfg.size - left / cfg.meters_per_pixel
    row = cfg.ego_row_frac * cfg.size - forward / cfg.meters_per_pixel
    return col, row


def _fill_tris(img: np.ndarray, cols: np.ndarray, rows: np.ndarray, color: RGB) -> None:
    """Rasterize triangles given as (K,3) col/row vertex arrays, with culling."""
    size = img.shape[0]
    keep = (
        (cols.min(axis=1) <= size) & (cols.max(axis=1) >= 0.0)
        & (rows.min(axis=1) <= size) & (rows.max(axis=1) >= 0.0)
    )
    r, g, b = color
    for k in np.flatnonzero(keep):
        _kernels.tri_fill(img, cols[k, 0], rows[k, 0], cols[k, 1], rows[k, 1],
                          cols[k, 2], rows[k, 2], r, g, b)


def _fill_marking_tris(img: np.ndarray, cols: np.ndarray, rows: np.ndarray,
                       color: RGB, other: RGB, overlap: RGB) -> None:
    size = img.shape[0]
    keep = (
        (cols.min(axis=1) <= size) & (cols.max(axis=1) >= 0.0)
        & (rows.min(axis=1) <= size) & (rows.max(axis=1) >= 0.0)
    )
    for k in np.flatnonzero(keep):
        _kernels.tri_fill_marking(img, cols[k, 0], rows[k, 0], cols[k, 1], rows[k, 1],
                                  cols[k, 2], rows[k, 2], color, other, overlap)


def _offset_strip_tris(points: np.ndarray, offset: float, width: float) -> np.ndarray:
    """Triangles (K,3,2) for a strip of the given width centered on the
    polyline shifted sideways by offset (positive = left of travel)."""
    a = points[:-1]
    b = points[1:]
    d = b - a
    norm = np.hypot(d[:, 0], d[:, 1])[:, None]
    n = np.stack([-d[:, 1], d[:, 0]], axis=1) / norm
    lo = offset - 0.5 * width
    hi = offset + 0.5 * width
    c0 = a + lo * n
    c1 = a + hi * n
    c2 = b + hi * n
    c3 = b + lo * n
    return np.concatenate(
        [np.stack([c0, c1, c2], axis=1), np.stack([c0, c2, c3], axis=1)]
    )


def _lane_marking_tris(bundle, cfg: RenderConfig) -> tuple[np.ndarray, np.ndarray]:
    """Per-map cache of world-frame marking triangles (left, right)."""
    cache = getattr(bundle, "_marking_cache", None)
    if cache is None:
        cache = {}
        bundle._marking_cache = cache
    key = (cfg.lane_offset, cfg.marking_width)
    if key not in cache:
        left, right = [], []
        for lane in bundle.lanes:
            left.append(_offset_strip_tris(lane.points, cfg.lane_offset, cfg.marking_width))
            right.append(_offset_strip_tris(lane.points, -cfg.lane_offset, cfg.marking_width))
        empty = np.zeros((0, 3, 2))
        cache[key] = (
            np.concatenate(left) if left else empty,
            np.concatenate(right) if right else empty,
        )
    return cache[key]


def _tri_pixel_coords(camera: Pose2, tris: np.ndarray,
                      cfg: RenderConfig) -> tuple[np.ndarray, np.ndarray]:
    """(K,3,2) world triangles -> per-vertex (K,3) col and row arrays."""
    cols, rows = _to_pixels(camera, tris[..., 0], tris[..., 1], cfg)
    return cols, rows


def render(w: "WorldState", camera: Pose2, cfg: RenderConfig | None = None,
           waypoint: tuple[float, float] | None = None) -> BirdviewFrame:
    """Rasterize the world around the camera pose into an RGB frame."""
    cfg = cfg or RenderConfig()
    size = cfg.size
    if cfg.backend == "dummy":
        pixels = np.zeros((size, size, 3), dtype=np.uint8)
        return BirdviewFrame(size, size, pixels, cfg.meters_per_pixel, camera)
    if cfg.backend != "cpu":
        raise BackendUnavailable(f"unknown render backend {cfg.backend!r}")
    cm = cfg.colormap
    img = np.empty((size, size, 3), dtype=np.uint8)
    img[:] = cm.background

    mesh_tris = w.map.mesh.tris.reshape(-1, 3, 2)
    cols, rows = _tri_pixel_coords(camera, mesh_tris, cfg)
    _fill_tris(img, cols, rows, cm.drivable)

    left, right = _lane_marking_tris(w.map, cfg)
    if right.shape[0]:
        cols, rows = _tri_pixel_coords(camera, right, cfg)
        _fill_marking_tris(img, cols, rows, cm.lane_right, cm.lane_left, cm.lane_overlap)
    if left.shape[0]:
        cols, rows = _tri_pixel_coords(camera, left, cfg)
        _fill_marking_tris(img, cols, rows, cm.lane_left, cm.lane_right, cm.lane_overlap)

    light_colors = {
        "red": cm.light_red, "yellow": cm.light_yellow, "green": cm.light_green
    }
    for control in w.controls:
        color = light_colors.get(control.state)
        if color is None:
            continue
        quad = control.rect.corners()
        tris = np.stack([quad[[0, 1, 2]], quad[[0, 2, 3]]])
        cols, rows = _tri_pixel_coords(camera, tris, cfg)
        _fill_tris(img, cols, rows, color)

    ego_tris = None
    for name, batch in w.agents.items():
        if batch.n == 0 or not batch.present.any():
            continue
        quads = batch.corners()
        for i in np.flatnonzero(batch.present):
            tris = np.stack([quads[i, [0, 1, 2]], quads[i, [0, 2, 3]]])
            if name == "vehicle" and i == 0:
                ego_tris = tris
                continue
            cols, rows = _tri_pixel_coords(camera, tris, cfg)
            _fill_tris(img, cols, rows, cm.vehicle_npc)
    if ego_tris is not None:
        cols, rows = _tri_pixel_coords(camera, ego_tris, cfg)
        _fill_tris(img, cols, rows, cm.ego)

    if waypoint is not None:
        col, row = _to_pixels(
            camera, np.asarray([waypoint[0]]), np.asarray([waypoint[1]]), cfg
        )
        radius_px = cfg.waypoint_radius / cfg.meters_per_pixel
        if (-radius_px <= col[0] <= size + radius_px
                and -radius_px <= row[0] <= size + radius_px):
            _kernels.disc_fill(img, float(col[0]), float(row[0]), radius_px,
                               *cm.waypoint)

    return BirdviewFrame(size, size, img, cfg.meters_per_pixel, camera)


def write_ppm(path: str | Path, pixels: np.ndarray) -> None:
    """Write an (H, W, 3) uint8 array as binary PPM (P6)."""
    h, w = pixels.shape[0], pixels.shape[1]
    with open(path, "wb") as fh:
        fh.write(f"P6\n{w} {h}\n255\n".encode("ascii"))
        fh.write(np.ascontiguousarray(pixels, dtype=np.uint8).tobytes())


def read_ppm(path: str | Path) -> np.ndarray:
    """Read a binary PPM (P6) file into an (H, W, 3) uint8 array."""
    raw = Path(path).read_bytes()
    parts = []
    pos = 0
    while len(parts) < 4:
        while pos < len(raw) and raw[pos:pos + 1].isspace():
            pos += 1
        if raw[pos:pos + 1] == b"#":
            pos = raw.index(b"\n", pos) + 1
            continue
        start = pos
        while pos < len(raw) and not raw[pos:pos + 1].isspace():
            pos += 1
        parts.append(raw[start:pos])
    pos += 1  # single whitespace byte after maxval
    if parts[0] != b"P6" or parts[3] != b"255":
        raise ValueError("not an 8-bit P6 PPM file")
    w, h = int(parts[1]), int(parts[2])
    data = np.frombuffer(raw, dtype=np.uint8, count=w * h * 3, offset=pos)
    return data.reshape(h, w, 3).copy()
