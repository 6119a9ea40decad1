"""Two-dimensional assignment along a polyline boundary.

A boundary is an ordered open polyline; points to the left of the direction
of travel are control (label 0), points to the right are intervention
(label 1). Points landing on the path itself (within 1e-9) are assigned to
the intervention side, consistent with the ">= threshold" convention of the
one-dimensional case, and a warning is issued.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from . import gp, inference
from .errors import DataError, InputError
from .gp import GPFit

ON_PATH_TOL = 1e-9


def _cross2(u, v) -> float:
    return float(u[0] * v[1] - u[1] * v[0])


def _segments_intersect(p1, p2, p3, p4) -> bool:
    """Proper intersection test for open segments (shared endpoints allowed)."""
    d1 = _cross2(p4 - p3, p1 - p3)
    d2 = _cross2(p4 - p3, p2 - p3)
    d3 = _cross2(p2 - p1, p3 - p1)
    d4 = _cross2(p2 - p1, p4 - p1)
    return ((d1 > 0) != (d2 > 0)) and ((d3 > 0) != (d4 > 0))


@dataclass(frozen=True)
class BoundaryPolyline:
    """Ordered 2D vertices; left of the path is control, right is intervention."""

    vertices: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.vertices, dtype=float)
        if v.ndim != 2 or v.shape[1] != 2 or v.shape[0] < 2:
            raise InputError("a boundary needs >= 2 two-dimensional vertices")
        if not np.all(np.isfinite(v)):
            raise InputError("boundary vertices must be finite")
        if np.any(np.all(v[1:] == v[:-1], axis=1)):
            raise InputError("consecutive boundary vertices must be distinct")
        # simple-path check: non-adjacent segments must not cross
        m = v.shape[0] - 1
        for i in range(m):
            for j in range(i + 2, m):
                if _segments_intersect(v[i], v[i + 1], v[j], v[j + 1]):
                    raise InputError("boundary polyline is self-intersecting")
        object.__setattr__(self, "vertices", v)

    @property
    def segment_lengths(self) -> np.ndarray:
        return np.linalg.norm(np.diff(self.vertices, axis=0), axis=1)

    @property
    def length(self) -> float:
        return float(self.segment_lengths.sum())

    def reversed(self) -> "BoundaryPolyline":
        return BoundaryPolyline(self.vertices[::-1].copy())


def _nearest_segment_side(boundary: BoundaryPolyline, point: np.ndarray
                          ) -> tuple[float, float]:
    """(distance to path, signed cross product against the nearest segment).

    Among segments tied for the minimum distance (shared-vertex ties), the
    one whose direction is most perpendicular to the point offset decides the
    sign, which keeps the side consistent across corner regions.
    """
    v = boundary.vertices
    a = v[:-1]
    b = v[1:]
    d = b - a
    seg_len2 = np.sum(d * d, axis=1)
    t = np.clip(np.sum((point - a) * d, axis=1) / seg_len2, 0.0, 1.0)
    proj = a + t[:, None] * d
    dists = np.linalg.norm(point - proj, axis=1)
    dmin = dists.min()
    tied = np.flatnonzero(dists <= dmin + 1e-12)
    crosses = np.array([_cross2(d[i], point - a[i]) / np.sqrt(seg_len2[i])
                        for i in tied])
    pick = int(np.argmax(np.abs(crosses)))
    return float(dmin), float(crosses[pick])


def classify(boundary: BoundaryPolyline, point) -> int:
    """0 if the point is left of the path, 1 if right or on the path."""
    point = np.asarray(point, dtype=float).reshape(2)
    dist, cross = _nearest_segment_side(boundary, point)
    if dist <= ON_PATH_TOL:
        warnings.warn("point lies on the boundary; assigned to intervention",
                      stacklevel=2)
        return 1
    # positive cross product = left of the direction of travel
    return 0 if cross > 0 else 1


@dataclass(frozen=True)
class BoundaryLabel(inference.LabelFunction):
    """LabelFunction adapter around a BoundaryPolyline."""

    boundary: BoundaryPolyline

    def labels(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        if X.ndim != 2 or X.shape[1] != 2:
            raise InputError("boundary labels require 2-D points")
        return np.array([classify(self.boundary, x) for x in X], dtype=int)


def boundary_points(boundary: BoundaryPolyline, count: int) -> np.ndarray:
    """`count` points equally spaced by arc length, endpoints included."""
    if count < 2:
        raise InputError("count must be >= 2")
    v = boundary.vertices
    seg_len = boundary.segment_lengths
    cum = np.concatenate([[0.0], np.cumsum(seg_len)])
    targets = np.linspace(0.0, cum[-1], count)
    out = np.empty((count, 2))
    for i, s in enumerate(targets):
        j = min(int(np.searchsorted(cum, s, side="right")) - 1, len(seg_len) - 1)
        frac = (s - cum[j]) / seg_len[j]
        out[i] = v[j] + frac * (v[j + 1] - v[j])
    return out


@dataclass(frozen=True)
class EffectProfile:
    """Gaussian effect posterior evaluated along the boundary."""

    arc_lengths: np.ndarray
    points: np.ndarray
    means: np.ndarray
    variances: np.ndarray


def effect_profile(fit_c: GPFit, fit_i: GPFit, boundary: BoundaryPolyline,
                   count: int = 50) -> EffectProfile:
    """Pointwise effect posterior d(s) = f_I(s) - f_C(s) along the boundary."""
    if fit_c.data.p != 2 or fit_i.data.p != 2:
        raise InputError("effect profiles require 2-D fits")
    pts = boundary_points(boundary, count)
    mc, vc = gp.predict(fit_c, pts)
    mi, vi = gp.predict(fit_i, pts)
    arcs = np.concatenate(
        [[0.0], np.cumsum(np.linalg.norm(np.diff(pts, axis=0), axis=1))])
    return EffectProfile(arc_lengths=arcs, points=pts,
                         means=mi - mc, variances=vi + vc)


def load_boundary(path) -> BoundaryPolyline:
    """Read a polyline from text: one "x y" vertex per line, '#' comments."""
    vertices = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            if len(parts) != 2:
                raise DataError(
                    f"{path}:{lineno}: expected 'x y', got {line!r}")
            try:
                vertices.append((float(parts[0]), float(parts[1])))
            except ValueError as exc:
                raise DataError(f"{path}:{lineno}: non-numeric vertex") from exc
    if len(vertices) < 2:
        raise DataError(f"{path}: a boundary needs at least 2 vertices")
    return BoundaryPolyline(np.array(vertices))
