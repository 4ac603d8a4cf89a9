"""Pure numpy implementations of the hot kernels.

Semantics here are the reference: the compiled backend in ``_compiled.pyx``
mirrors these functions exactly (same fixed-point snapping, same tie rules,
same operation order) so the two backends produce bitwise-identical results.

Rasterization uses 1/256-pixel fixed-point coordinates and integer edge
functions, so coverage decisions are exact: two triangles sharing an edge
paint every pixel of that edge exactly once (top-left fill rule).
"""
from __future__ import annotations

import math

import numpy as np

SUBPIX = 256
HALF = SUBPIX // 2


def _snap(v: float) -> int:
    return int(math.floor(v * SUBPIX + 0.5))


def _axis_range(lo: int, hi: int, n: int) -> tuple[int, int]:
    # first/last pixel index whose center (i*SUBPIX + HALF) lies in [lo, hi]
    first = -((HALF - lo) // SUBPIX)
    last = (hi - HALF) // SUBPIX
    return max(0, first), min(n - 1, last)


def _top_left(dx: int, dy: int) -> bool:
    # screen coords, y down: top edge runs right, left edge runs up
    return dx > 0 if dy == 0 else dy < 0


def tri_fill(img: np.ndarray, ax: float, ay: float, bx: float, by: float,
             cx: float, cy: float, r: int, g: int, b: int) -> None:
    """Fill a triangle given in pixel coordinates; modifies img in place."""
    h, w = img.shape[0], img.shape[1]
    x0, y0, x1, y1, x2, y2 = (_snap(ax), _snap(ay), _snap(bx), _snap(by),
                              _snap(cx), _snap(cy))
    area2 = (x1 - x0) * (y2 - y0) - (y1 - y0) * (x2 - x0)
    if area2 == 0:
        return
    if area2 < 0:
        x1, y1, x2, y2 = x2, y2, x1, y1
    c0, c1 = _axis_range(min(x0, x1, x2), max(x0, x1, x2), w)
    r0, r1 = _axis_range(min(y0, y1, y2), max(y0, y1, y2), h)
    if c0 > c1 or r0 > r1:
        return
    sx = np.arange(c0, c1 + 1, dtype=np.int64) * SUBPIX + HALF
    sy = (np.arange(r0, r1 + 1, dtype=np.int64) * SUBPIX + HALF)[:, None]
    w0 = (x1 - x0) * (sy - y0) - (y1 - y0) * (sx - x0)
    w1 = (x2 - x1) * (sy - y1) - (y2 - y1) * (sx - x1)
    w2 = (x0 - x2) * (sy - y2) - (y0 - y2) * (sx - x2)
    cover = (
        ((w0 > 0) | ((w0 == 0) & _top_left(x1 - x0, y1 - y0)))
        & ((w1 > 0) | ((w1 == 0) & _top_left(x2 - x1, y2 - y1)))
        & ((w2 > 0) | ((w2 == 0) & _top_left(x0 - x2, y0 - y2)))
    )
    sub = img[r0:r1 + 1, c0:c1 + 1]
    sub[cover] = (r, g, b)


def tri_fill_marking(img: np.ndarray, ax: float, ay: float, bx: float, by: float,
                     cx: float, cy: float, color, other, overlap) -> None:
    """tri_fill variant for lane markings: pixels already holding the other
    marking color (or the overlap color) are painted with the overlap color."""
    h, w = img.shape[0], img.shape[1]
    x0, y0, x1, y1, x2, y2 = (_snap(ax), _snap(ay), _snap(bx), _snap(by),
                              _snap(cx), _snap(cy))
    area2 = (x1 - x0) * (y2 - y0) - (y1 - y0) * (x2 - x0)
    if area2 == 0:
        return
    if area2 < 0:
        x1, y1, x2, y2 = x2, y2, x1, y1
    c0, c1 = _axis_range(min(x0, x1, x2), max(x0, x1, x2), w)
    r0, r1 = _axis_range(min(y0, y1, y2), max(y0, y1, y2), h)
    if c0 > c1 or r0 > r1:
        return
    sx = np.arange(c0, c1 + 1, dtype=np.int64) * SUBPIX + HALF
    sy = (np.arange(r0, r1 + 1, dtype=np.int64) * SUBPIX + HALF)[:, None]
    w0 = (x1 - x0) * (sy - y0) - (y1 - y0) * (sx - x0)
    w1 = (x2 - x1) * (sy - y1) - (y2 - y1) * (sx - x1)
    w2 = (x0 - x2) * (sy - y2) - (y0 - y2) * (sx - x2)
    cover = (
        ((w0 > 0) | ((w0 == 0) & _top_left(x1 - x0, y1 - y0)))
        & ((w1 > 0) | ((w1 == 0) & _top_left(x2 - x1, y2 - y1)))
        & ((w2 > 0) | ((w2 == 0) & _top_left(x0 - x2, y0 - y2)))
    )
    sub = img[r0:r1 + 1, c0:c1 + 1]
    cur = sub[cover]
    other = np.asarray(other, dtype=np.uint8)
    overlap = np.asarray(overlap, dtype=np.uint8)
    hit = ((cur == other).all(axis=1)) | ((cur == overlap).all(axis=1))
    out = np.where(hit[:, None], overlap, np.asarray(color, dtype=np.uint8))
    sub[cover] = out


def disc_fill(img: np.ndarray, cx: float, cy: float, radius: float,
              r: int, g: int, b: int) -> None:
    """Fill a closed disc given in pixel coordinates; modifies img in place."""
    h, w = img.shape[0], img.shape[1]
    xc, yc, rad = _snap(cx), _snap(cy), _snap(radius)
    if rad < 0:
        return
    c0, c1 = _axis_range(xc - rad, xc + rad, w)
    r0, r1 = _axis_range(yc - rad, yc + rad, h)
    if c0 > c1 or r0 > r1:
        return
    dx = np.arange(c0, c1 + 1, dtype=np.int64) * SUBPIX + HALF - xc
    dy = (np.arange(r0, r1 + 1, dtype=np.int64) * SUBPIX + HALF - yc)[:, None]
    cover = dx * dx + dy * dy <= rad * rad
    sub = img[r0:r1 + 1, c0:c1 + 1]
    sub[cover] = (r, g, b)


def sat_rects_overlap(ca: np.ndarray, cb: np.ndarray) -> bool:
    """Separating-axis test for two convex quads given as (4,2) corner arrays.

    Closed convention: touching boundaries count as overlap.
    """
    for corners in (ca, cb):
        for k in range(2):
            axx = corners[k + 1, 0] - corners[k, 0]
            axy = corners[k + 1, 1] - corners[k, 1]
            amin = amax = ca[0, 0] * axx + ca[0, 1] * axy
            for i in range(1, 4):
                p = ca[i, 0] * axx + ca[i, 1] * axy
                if p < amin:
                    amin = p
                elif p > amax:
                    amax = p
            bmin = bmax = cb[0, 0] * axx + cb[0, 1] * axy
            for i in range(1, 4):
                p = cb[i, 0] * axx + cb[i, 1] * axy
                if p < bmin:
                    bmin = p
                elif p > bmax:
                    bmax = p
            if amax < bmin or bmax < amin:
                return False
    return True


def sat_overlap_first(ca: np.ndarray, others: np.ndarray, mask: np.ndarray) -> int:
    """Index of the first masked quad in others (M,4,2) overlapping ca, else -1."""
    for j in range(others.shape[0]):
        if mask[j] and sat_rects_overlap(ca, others[j]):
            return j
    return -1


def point_in_triangle_scalar(px: float, py: float, ax: float, ay: float,
                             bx: float, by: float, cx: float, cy: float) -> bool:
    """Closed-triangle containment; degenerate triangles contain nothing."""
    if (bx - ax) * (cy - ay) - (by - ay) * (cx - ax) == 0.0:
        return False
    d1 = (bx - ax) * (py - ay) - (by - ay) * (px - ax)
    d2 = (cx - bx) * (py - by) - (cy - by) * (px - bx)
    d3 = (ax - cx) * (py - cy) - (ay - cy) * (px - cx)
    return bool((d1 >= 0 and d2 >= 0 and d3 >= 0) or (d1 <= 0 and d2 <= 0 and d3 <= 0))


def points_in_tris_any(pts: np.ndarray, tris: np.ndarray) -> np.ndarray:
    """For each point (P,2), whether it lies in any triangle of tris (K,6)."""
    pts = np.asarray(pts, dtype=np.float64)
    if tris.shape[0] == 0:
        return np.zeros(pts.shape[0], dtype=bool)
    ax, ay, bx, by, cx, cy = (tris[:, k] for k in range(6))
    ok = (bx - ax) * (cy - ay) - (by - ay) * (cx - ax) != 0.0
    px = pts[:, 0][:, None]
    py = pts[:, 1][:, None]
    d1 = (bx - ax) * (py - ay) - (by - ay) * (px - ax)
    d2 = (cx - bx) * (py - by) - (cy - by) * (px - bx)
    d3 = (ax - cx) * (py - cy) - (ay - cy) * (px - cx)
    inside = ((d1 >= 0) & (d2 >= 0) & (d3 >= 0)) | ((d1 <= 0) & (d2 <= 0) & (d3 <= 0))
    return np.any(inside & ok, axis=1)


def points_on_mesh(pts: np.ndarray, tris: np.ndarray, cell_start: np.ndarray,
                   cell_items: np.ndarray, minx: float, miny: float,
                   inv_cell: float, nx: int, ny: int) -> np.ndarray:
    """Grid-accelerated mesh containment for points (P,2).

    cell_start/cell_items are a CSR layout of triangle indices per grid cell,
    row-major over (ny, nx) cells anchored at (minx, miny).
    """
    pts = np.asarray(pts, dtype=np.float64)
    out = np.zeros(pts.shape[0], dtype=bool)
    for i in range(pts.shape[0]):
        px, py = pts[i, 0], pts[i, 1]
        ix = int(math.floor((px - minx) * inv_cell))
        iy = int(math.floor((py - miny) * inv_cell))
        if ix < 0 or iy < 0 or ix >= nx or iy >= ny:
            continue
        cell = iy * nx + ix
        idx = cell_items[cell_start[cell]:cell_start[cell + 1]]
        if idx.shape[0]:
            out[i] = bool(points_in_tris_any(pts[i:i + 1], tris[idx])[0])
    return out


def nearest_segment(px: float, py: float, seg_a: np.ndarray, seg_b: np.ndarray) -> tuple[int, float]:
    """Closest segment to a point among A[i]->B[i]; returns (index, squared dist).

    Exact ties keep the lowest index. Returns (-1, inf) when no segments exist.
    """
    if seg_a.shape[0] == 0:
        return -1, math.inf
    dx = seg_b[:, 0] - seg_a[:, 0]
    dy = seg_b[:, 1] - seg_a[:, 1]
    wx = px - seg_a[:, 0]
    wy = py - seg_a[:, 1]
    seg_len2 = dx * dx + dy * dy
    safe = np.where(seg_len2 > 0.0, seg_len2, 1.0)
    t = np.clip((wx * dx + wy * dy) / safe, 0.0, 1.0)
    t = np.where(seg_len2 > 0.0, t, 0.0)
    ex = wx - t * dx
    ey = wy - t * dy
    d2 = ex * ex + ey * ey
    idx = int(np.argmin(d2))
    return idx, float(d2[idx])
