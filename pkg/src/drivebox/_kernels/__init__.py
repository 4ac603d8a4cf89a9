"""Kernel backend selection.

The compiled Cython extension is used when it imported cleanly; otherwise the
pure numpy fallback takes over. Setting ``DRIVEBOX_PURE=1`` forces the
fallback, which is useful for parity tests and debugging.

Both backends implement the same contract (see ``pure.py`` docstrings) and
produce bitwise-identical outputs.
"""
from __future__ import annotations

import os

from . import pure as _pure

BACKEND = "pure"
_impl = _pure

if not os.environ.get("DRIVEBOX_PURE"):
    try:
        from . import _compiled as _impl  # type: ignore[no-redef]

        BACKEND = "compiled"
    except ImportError:
        _impl = _pure

SUBPIX = _pure.SUBPIX

tri_fill = _impl.tri_fill
tri_fill_marking = _impl.tri_fill_marking
disc_fill = _impl.disc_fill
sat_rects_overlap = _impl.sat_rects_overlap
sat_overlap_first = _impl.sat_overlap_first
point_in_triangle_scalar = _impl.point_in_triangle_scalar
points_in_tris_any = _impl.points_in_tris_any
points_on_mesh = _impl.points_on_mesh
nearest_segment = _impl.nearest_segment

__all__ = [
    "BACKEND",
    "SUBPIX",
    "tri_fill",
    "tri_fill_marking",
    "disc_fill",
    "sat_rects_overlap",
    "sat_overlap_first",
    "point_in_triangle_scalar",
    "points_in_tris_any",
    "points_on_mesh",
    "nearest_segment",
]
