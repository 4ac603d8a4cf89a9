"""2D primitives shared by collision, infraction, and rendering code.

Conventions: world frame is x-east / y-north, headings are radians
counterclockwise from +x and normalized to (-pi, pi]. All containment and
overlap predicates are closed: boundary contact counts.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels

TWO_PI = 2.0 * math.pi


def normalize_angle(psi: float) -> float:
    """Wrap a scalar angle into (-pi, pi]."""
    r = math.remainder(psi, TWO_PI)
    if r <= -math.pi:
        r += TWO_PI
    return r


def normalize_angles(psi: np.ndarray) -> np.ndarray:
    """Wrap an array of angles into (-pi, pi]."""
    r = np.mod(np.asarray(psi, dtype=np.float64) + np.pi, TWO_PI) - np.pi
    return np.where(r == -np.pi, np.pi, r)


def shortest_angle_diff(a: float, b: float) -> float:
    """Signed smallest rotation taking b to a, in (-pi, pi]."""
    return normalize_angle(a - b)


@dataclass(frozen=True)
class Pose2:
    """Planar pose; the heading is normalized on construction."""

    x: float
    y: float
    psi: float = 0.0

    def __post_init__(self) -> None:
        object.__setattr__(self, "psi", normalize_angle(self.psi))

    def transform_points(self, pts: np.ndarray) -> np.ndarray:
        """Map local-frame points (N,2) into the world frame."""
        c, s = math.cos(self.psi), math.sin(self.psi)
        pts = np.asarray(pts, dtype=np.float64)
        out = np.empty_like(pts)
        out[:, 0] = c * pts[:, 0] - s * pts[:, 1] + self.x
        out[:, 1] = s * pts[:, 0] + c * pts[:, 1] + self.y
        return out

    def inverse_transform_points(self, pts: np.ndarray) -> np.ndarray:
        """Map world-frame points (N,2) into this pose's local frame."""
        c, s = math.cos(self.psi), math.sin(self.psi)
        pts = np.asarray(pts, dtype=np.float64)
        dx = pts[:, 0] - self.x
        dy = pts[:, 1] - self.y
        out = np.empty_like(pts)
        out[:, 0] = c * dx + s * dy
        out[:, 1] = -s * dx + c * dy
        return out


@dataclass(frozen=True)
class OrientedRect:
    """Rectangle centered on a pose, extending length/2 forward and back."""

    center: Pose2
    length: float
    width: float

    def corners(self) -> np.ndarray:
        """Corners as a (4,2) array, counterclockwise from front-left."""
        hl, hw = 0.5 * self.length, 0.5 * self.width
        local = np.array(
            [[hl, hw], [-hl, hw], [-hl, -hw], [hl, -hw]], dtype=np.float64
        )
        return self.center.transform_points(local)

    def contains_point(self, x: float, y: float) -> bool:
        p = self.center.inverse_transform_points(np.array([[x, y]]))
        return bool(
            abs(p[0, 0]) <= 0.5 * self.length and abs(p[0, 1]) <= 0.5 * self.width
        )


def rect_corners_batch(x: np.ndarray, y: np.ndarray, psi: np.ndarray,
                       length: np.ndarray, width: np.ndarray) -> np.ndarray:
    """Corners for N rectangles at once, shape (N,4,2), CCW from front-left."""
    c, s = np.cos(psi), np.sin(psi)
    hl, hw = 0.5 * np.asarray(length), 0.5 * np.asarray(width)
    lx = np.stack([hl, -hl, -hl, hl], axis=-1)
    ly = np.stack([hw, hw, -hw, -hw], axis=-1)
    out = np.empty(lx.shape + (2,), dtype=np.float64)
    out[..., 0] = c[..., None] * lx - s[..., None] * ly + np.asarray(x)[..., None]
    out[..., 1] = s[..., None] * lx + c[..., None] * ly + np.asarray(y)[..., None]
    return out


def rects_overlap(a: OrientedRect, b: OrientedRect) -> bool:
    """Closed overlap test between two oriented rectangles."""
    return bool(_kernels.sat_rects_overlap(a.corners(), b.corners()))


def point_in_triangle(px: float, py: float, tri: np.ndarray) -> bool:
    """Closed containment of a point in a triangle given as (3,2) vertices."""
    t = np.asarray(tri, dtype=np.float64)
    return bool(
        _kernels.point_in_triangle_scalar(
            px, py, t[0, 0], t[0, 1], t[1, 0], t[1, 1], t[2, 0], t[2, 1]
        )
    )


def segment_intersects_rect(p0: np.ndarray, p1: np.ndarray, rect: OrientedRect) -> bool:
    """Closed intersection test between segment p0->p1 and a rectangle.

    Uses a slab clip in the rectangle's local frame; a zero-length segment
    degenerates to point containment.
    """
    pts = rect.center.inverse_transform_points(
        np.array([p0, p1], dtype=np.float64)
    )
    hx, hy = 0.5 * rect.length, 0.5 * rect.width
    t0, t1 = 0.0, 1.0
    d = pts[1] - pts[0]
    for k in range(2):
        h = hx if k == 0 else hy
        if d[k] == 0.0:
            if abs(pts[0, k]) > h:
                return False
            continue
        ta = (-h - pts[0, k]) / d[k]
        tb = (h - pts[0, k]) / d[k]
        if ta > tb:
            ta, tb = tb, ta
        t0 = max(t0, ta)
        t1 = min(t1, tb)
        if t0 > t1:
            return False
    return True


def polyline_segments(points: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Split polyline vertices (P,2) into per-segment endpoint arrays."""
    pts = np.asarray(points, dtype=np.float64)
    return pts[:-1], pts[1:]


def segment_tangents(seg_a: np.ndarray, seg_b: np.ndarray) -> np.ndarray:
    """Heading of each segment A[i]->B[i]."""
    d = seg_b - seg_a
    return np.arctan2(d[:, 1], d[:, 0])
