# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels, mirroring ``pure.py`` operation for operation.

Every function keeps the exact arithmetic of the pure backend (same
fixed-point snapping, same operation order, same tie rules) so outputs are
bitwise identical. Change both files together or parity tests will fail.
"""
from libc.math cimport floor, INFINITY

import numpy as np

cimport numpy as cnp

cnp.import_array()

SUBPIX = 256

cdef long long _SUB = 256
cdef long long _HALF = 128


cdef inline long long _snap(double v) noexcept nogil:
    return <long long>floor(v * 256.0 + 0.5)


cdef inline long long _floordiv(long long a, long long b) noexcept nogil:
    cdef long long q = a // b  # Cython emits truncating C division here
    if a % b != 0 and ((a < 0) != (b < 0)):
        q -= 1
    return q


cdef inline long long _first_center(long long lo) noexcept nogil:
    return -_floordiv(_HALF - lo, _SUB)


cdef inline long long _last_center(long long hi) noexcept nogil:
    return _floordiv(hi - _HALF, _SUB)


cdef inline bint _top_left(long long dx, long long dy) noexcept nogil:
    if dy == 0:
        return dx > 0
    return dy < 0


cdef inline long long _min3(long long a, long long b, long long c) noexcept nogil:
    cdef long long m = a
    if b < m:
        m = b
    if c < m:
        m = c
    return m


cdef inline long long _max3(long long a, long long b, long long c) noexcept nogil:
    cdef long long m = a
    if b > m:
        m = b
    if c > m:
        m = c
    return m


def tri_fill(unsigned char[:, :, ::1] img, double ax, double ay, double bx,
             double by, double cx, double cy, int r, int g, int b):
    """Fill a triangle given in pixel coordinates; modifies img in place."""
    cdef long long h = img.shape[0], w = img.shape[1]
    cdef long long x0 = _snap(ax), y0 = _snap(ay)
    cdef long long x1 = _snap(bx), y1 = _snap(by)
    cdef long long x2 = _snap(cx), y2 = _snap(cy)
    cdef long long area2 = (x1 - x0) * (y2 - y0) - (y1 - y0) * (x2 - x0)
    cdef long long tmp
    if area2 == 0:
        return
    if area2 < 0:
        tmp = x1; x1 = x2; x2 = tmp
        tmp = y1; y1 = y2; y2 = tmp
    cdef long long c0 = _first_center(_min3(x0, x1, x2))
    cdef long long c1 = _last_center(_max3(x0, x1, x2))
    cdef long long r0 = _first_center(_min3(y0, y1, y2))
    cdef long long r1 = _last_center(_max3(y0, y1, y2))
    if c0 < 0: c0 = 0
    if r0 < 0: r0 = 0
    if c1 > w - 1: c1 = w - 1
    if r1 > h - 1: r1 = h - 1
    if c0 > c1 or r0 > r1:
        return
    cdef bint tl0 = _top_left(x1 - x0, y1 - y0)
    cdef bint tl1 = _top_left(x2 - x1, y2 - y1)
    cdef bint tl2 = _top_left(x0 - x2, y0 - y2)
    cdef long long row, col, sx, sy, w0, w1, w2
    cdef unsigned char cr = <unsigned char>r, cg = <unsigned char>g, cb = <unsigned char>b
    with nogil:
        for row in range(r0, r1 + 1):
            sy = row * _SUB + _HALF
            for col in range(c0, c1 + 1):
                sx = col * _SUB + _HALF
                w0 = (x1 - x0) * (sy - y0) - (y1 - y0) * (sx - x0)
                w1 = (x2 - x1) * (sy - y1) - (y2 - y1) * (sx - x1)
                w2 = (x0 - x2) * (sy - y2) - (y0 - y2) * (sx - x2)
                if ((w0 > 0 or (w0 == 0 and tl0))
                        and (w1 > 0 or (w1 == 0 and tl1))
                        and (w2 > 0 or (w2 == 0 and tl2))):
                    img[row, col, 0] = cr
                    img[row, col, 1] = cg
                    img[row, col, 2] = cb


def tri_fill_marking(unsigned char[:, :, ::1] img, double ax, double ay,
                     double bx, double by, double cx, double cy,
                     color, other, overlap):
    """tri_fill variant for lane markings: pixels already holding the other
    marking color (or the overlap color) are painted with the overlap color."""
    cdef long long h = img.shape[0], w = img.shape[1]
    cdef long long x0 = _snap(ax), y0 = _snap(ay)
    cdef long long x1 = _snap(bx), y1 = _snap(by)
    cdef long long x2 = _snap(cx), y2 = _snap(cy)
    cdef long long area2 = (x1 - x0) * (y2 - y0) - (y1 - y0) * (x2 - x0)
    cdef long long tmp
    if area2 == 0:
        return
    if area2 < 0:
        tmp = x1; x1 = x2; x2 = tmp
        tmp = y1; y1 = y2; y2 = tmp
    cdef long long c0 = _first_center(_min3(x0, x1, x2))
    cdef long long c1 = _last_center(_max3(x0, x1, x2))
    cdef long long r0 = _first_center(_min3(y0, y1, y2))
    cdef long long r1 = _last_center(_max3(y0, y1, y2))
    if c0 < 0: c0 = 0
    if r0 < 0: r0 = 0
    if c1 > w - 1: c1 = w - 1
    if r1 > h - 1: r1 = h - 1
    if c0 > c1 or r0 > r1:
        return
    cdef unsigned char pr = color[0], pg = color[1], pb = color[2]
    cdef unsigned char qr = other[0], qg = other[1], qb = other[2]
    cdef unsigned char vr = overlap[0], vg = overlap[1], vb = overlap[2]
    cdef bint tl0 = _top_left(x1 - x0, y1 - y0)
    cdef bint tl1 = _top_left(x2 - x1, y2 - y1)
    cdef bint tl2 = _top_left(x0 - x2, y0 - y2)
    cdef long long row, col, sx, sy, w0, w1, w2
    cdef bint hit
    with nogil:
        for row in range(r0, r1 + 1):
            sy = row * _SUB + _HALF
            for col in range(c0, c1 + 1):
                sx = col * _SUB + _HALF
                w0 = (x1 - x0) * (sy - y0) - (y1 - y0) * (sx - x0)
                w1 = (x2 - x1) * (sy - y1) - (y2 - y1) * (sx - x1)
                w2 = (x0 - x2) * (sy - y2) - (y0 - y2) * (sx - x2)
                if ((w0 > 0 or (w0 == 0 and tl0))
                        and (w1 > 0 or (w1 == 0 and tl1))
                        and (w2 > 0 or (w2 == 0 and tl2))):
                    hit = ((img[row, col, 0] == qr and img[row, col, 1] == qg
                            and img[row, col, 2] == qb)
                           or (img[row, col, 0] == vr and img[row, col, 1] == vg
                               and img[row, col, 2] == vb))
                    if hit:
                        img[row, col, 0] = vr
                        img[row, col, 1] = vg
                        img[row, col, 2] = vb
                    else:
                        img[row, col, 0] = pr
                        img[row, col, 1] = pg
                        img[row, col, 2] = pb


def disc_fill(unsigned char[:, :, ::1] img, double cx, double cy,
              double radius, int r, int g, int b):
    """Fill a closed disc given in pixel coordinates; modifies img in place."""
    cdef long long h = img.shape[0], w = img.shape[1]
    cdef long long xc = _snap(cx), yc = _snap(cy), rad = _snap(radius)
    if rad < 0:
        return
    cdef long long c0 = _first_center(xc - rad)
    cdef long long c1 = _last_center(xc + rad)
    cdef long long r0 = _first_center(yc - rad)
    cdef long long r1 = _last_center(yc + rad)
    if c0 < 0: c0 = 0
    if r0 < 0: r0 = 0
    if c1 > w - 1: c1 = w - 1
    if r1 > h - 1: r1 = h - 1
    if c0 > c1 or r0 > r1:
        return
    cdef long long row, col, dx, dy
    cdef unsigned char cr = <unsigned char>r, cg = <unsigned char>g, cb = <unsigned char>b
    with nogil:
        for row in range(r0, r1 + 1):
            dy = row * _SUB + _HALF - yc
            for col in range(c0, c1 + 1):
                dx = col * _SUB + _HALF - xc
                if dx * dx + dy * dy <= rad * rad:
                    img[row, col, 0] = cr
                    img[row, col, 1] = cg
                    img[row, col, 2] = cb


cdef bint _sat_axes(const double[:, :] edges, const double[:, :] ca,
                    const double[:, :] cb) noexcept nogil:
    cdef int k, i
    cdef double axx, axy, amin, amax, bmin, bmax, p
    for k in range(2):
        axx = edges[k + 1, 0] - edges[k, 0]
        axy = edges[k + 1, 1] - edges[k, 1]
        amin = ca[0, 0] * axx + ca[0, 1] * axy
        amax = amin
        for i in range(1, 4):
            p = ca[i, 0] * axx + ca[i, 1] * axy
            if p < amin:
                amin = p
            elif p > amax:
                amax = p
        bmin = cb[0, 0] * axx + cb[0, 1] * axy
        bmax = bmin
        for i in range(1, 4):
            p = cb[i, 0] * axx + cb[i, 1] * axy
            if p < bmin:
                bmin = p
            elif p > bmax:
                bmax = p
        if amax < bmin or bmax < amin:
            return False
    return True


cdef bint _sat_overlap(const double[:, :] ca, const double[:, :] cb) noexcept nogil:
    return _sat_axes(ca, ca, cb) and _sat_axes(cb, ca, cb)


def sat_rects_overlap(const double[:, :] ca, const double[:, :] cb):
    """Separating-axis test for two convex quads given as (4,2) corner arrays.

    Closed convention: touching boundaries count as overlap.
    """
    return bool(_sat_overlap(ca, cb))


def sat_overlap_first(const double[:, :] ca, const double[:, :, :] others, mask):
    """Index of the first masked quad in others (M,4,2) overlapping ca, else -1."""
    cdef const unsigned char[:] m = np.ascontiguousarray(mask).view(np.uint8)
    cdef Py_ssize_t j
    for j in range(others.shape[0]):
        if m[j] and _sat_overlap(ca, others[j]):
            return int(j)
    return -1


cdef inline bint _pt_in_tri(double px, double py, double ax, double ay,
                            double bx, double by, double cx, double cy) noexcept nogil:
    cdef double d1, d2, d3
    if (bx - ax) * (cy - ay) - (by - ay) * (cx - ax) == 0.0:
        return False
    d1 = (bx - ax) * (py - ay) - (by - ay) * (px - ax)
    d2 = (cx - bx) * (py - by) - (cy - by) * (px - bx)
    d3 = (ax - cx) * (py - cy) - (ay - cy) * (px - cx)
    return ((d1 >= 0 and d2 >= 0 and d3 >= 0)
            or (d1 <= 0 and d2 <= 0 and d3 <= 0))


def point_in_triangle_scalar(double px, double py, double ax, double ay,
                             double bx, double by, double cx, double cy):
    """Closed-triangle containment; degenerate triangles contain nothing."""
    return bool(_pt_in_tri(px, py, ax, ay, bx, by, cx, cy))


def points_in_tris_any(pts, tris):
    """For each point (P,2), whether it lies in any triangle of tris (K,6)."""
    cdef const double[:, :] p = np.ascontiguousarray(pts, dtype=np.float64)
    cdef const double[:, :] t = np.ascontiguousarray(tris, dtype=np.float64)
    cdef Py_ssize_t n = p.shape[0], k = t.shape[0]
    out = np.zeros(n, dtype=bool)
    cdef unsigned char[:] o = out.view(np.uint8)
    cdef Py_ssize_t i, j
    with nogil:
        for i in range(n):
            for j in range(k):
                if _pt_in_tri(p[i, 0], p[i, 1], t[j, 0], t[j, 1], t[j, 2],
                              t[j, 3], t[j, 4], t[j, 5]):
                    o[i] = 1
                    break
    return out


def points_on_mesh(pts, tris, cell_start, cell_items, double minx, double miny,
                   double inv_cell, long long nx, long long ny):
    """Grid-accelerated mesh containment for points (P,2).

    cell_start/cell_items are a CSR layout of triangle indices per grid cell,
    row-major over (ny, nx) cells anchored at (minx, miny).
    """
    cdef const double[:, :] p = np.ascontiguousarray(pts, dtype=np.float64)
    cdef const double[:, :] t = np.ascontiguousarray(tris, dtype=np.float64)
    cdef const long long[:] cs = np.ascontiguousarray(cell_start, dtype=np.int64)
    cdef const long long[:] ci = np.ascontiguousarray(cell_items, dtype=np.int64)
    cdef Py_ssize_t n = p.shape[0]
    out = np.zeros(n, dtype=bool)
    cdef unsigned char[:] o = out.view(np.uint8)
    cdef Py_ssize_t i
    cdef long long ix, iy, cell, a, j
    cdef double px, py
    with nogil:
        for i in range(n):
            px = p[i, 0]
            py = p[i, 1]
            ix = <long long>floor((px - minx) * inv_cell)
            iy = <long long>floor((py - miny) * inv_cell)
            if ix < 0 or iy < 0 or ix >= nx or iy >= ny:
                continue
            cell = iy * nx + ix
            for a in range(cs[cell], cs[cell + 1]):
                j = ci[a]
                if _pt_in_tri(px, py, t[j, 0], t[j, 1], t[j, 2], t[j, 3],
                              t[j, 4], t[j, 5]):
                    o[i] = 1
                    break
    return out


def nearest_segment(double px, double py, seg_a, seg_b):
    """Closest segment to a point among A[i]->B[i]; returns (index, squared dist).

    Exact ties keep the lowest index. Returns (-1, inf) when no segments exist.
    """
    cdef const double[:, :] a = np.ascontiguousarray(seg_a, dtype=np.float64)
    cdef const double[:, :] b = np.ascontiguousarray(seg_b, dtype=np.float64)
    cdef Py_ssize_t n = a.shape[0]
    if n == 0:
        return -1, float("inf")
    cdef Py_ssize_t i, best = 0
    cdef double dx, dy, wx, wy, seg_len2, tpar, ex, ey, d2
    cdef double best_d2 = INFINITY
    with nogil:
        for i in range(n):
            dx = b[i, 0] - a[i, 0]
            dy = b[i, 1] - a[i, 1]
            wx = px - a[i, 0]
            wy = py - a[i, 1]
            seg_len2 = dx * dx + dy * dy
            if seg_len2 > 0.0:
                tpar = (wx * dx + wy * dy) / seg_len2
                if tpar < 0.0:
                    tpar = 0.0
                elif tpar > 1.0:
                    tpar = 1.0
            else:
                tpar = 0.0
            ex = wx - tpar * dx
            ey = wy - tpar * dy
            d2 = ex * ex + ey * ey
            if d2 < best_d2:
                best_d2 = d2
                best = i
    return int(best), float(best_d2)
