"""Planar geometric primitives for street-network analysis.

All coordinates are planar meters. Geographic input must be projected
before it reaches this module (see :mod:`axialmap.io`).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, NamedTuple, Optional, Sequence, Tuple

DEFAULT_SNAP_TOLERANCE = 0.01


class GeometryError(ValueError):
    """Degenerate or invalid geometric input."""


class ClosedLoopError(GeometryError):
    """An operation required distinct endpoints but received a closed chain."""


class Point(NamedTuple):
    x: float
    y: float


PointLike = Sequence[float]
Segment = Tuple[PointLike, PointLike]


def dist(a: PointLike, b: PointLike) -> float:
    return math.hypot(b[0] - a[0], b[1] - a[1])


def dist2(a: PointLike, b: PointLike) -> float:
    dx = b[0] - a[0]
    dy = b[1] - a[1]
    return dx * dx + dy * dy


class Polyline:
    """An ordered chain of at least two points.

    Consecutive points must be distinct; use :meth:`cleaned` to build a
    polyline from raw coordinates that may contain sub-tolerance repeats.
    """

    __slots__ = ("points",)

    def __init__(self, points: Iterable[PointLike]):
        pts = tuple(Point(float(p[0]), float(p[1])) for p in points)
        if len(pts) < 2:
            raise GeometryError("polyline needs at least 2 points, got %d" % len(pts))
        for p in pts:
            if not (math.isfinite(p.x) and math.isfinite(p.y)):
                raise GeometryError("polyline has non-finite coordinate %r" % (p,))
        for a, b in zip(pts, pts[1:]):
            if a == b:
                raise GeometryError("polyline repeats consecutive point %r" % (a,))
        self.points = pts

    @classmethod
    def cleaned(cls, points: Iterable[PointLike],
                tol: float = DEFAULT_SNAP_TOLERANCE) -> Optional["Polyline"]:
        """Drop consecutive points closer than ``tol``; None if < 2 remain."""
        tol2 = tol * tol
        out: list = []
        for p in points:
            q = Point(float(p[0]), float(p[1]))
            if not (math.isfinite(q.x) and math.isfinite(q.y)):
                raise GeometryError("non-finite coordinate %r" % (q,))
            if not out or dist2(out[-1], q) > tol2:
                out.append(q)
        if len(out) < 2:
            return None
        return cls(out)

    def __len__(self) -> int:
        return len(self.points)

    def __iter__(self):
        return iter(self.points)

    def __getitem__(self, i):
        return self.points[i]

    def __eq__(self, other) -> bool:
        return isinstance(other, Polyline) and self.points == other.points

    def __hash__(self) -> int:
        return hash(self.points)

    def __repr__(self) -> str:
        return "Polyline(%d points, %.1f m)" % (len(self.points), self.length())

    def length(self) -> float:
        pts = self.points
        return sum(dist(pts[i], pts[i + 1]) for i in range(len(pts) - 1))

    def bounds(self) -> Tuple[float, float, float, float]:
        xs = [p.x for p in self.points]
        ys = [p.y for p in self.points]
        return min(xs), min(ys), max(xs), max(ys)

    def reversed(self) -> "Polyline":
        return Polyline(tuple(reversed(self.points)))


@dataclass(frozen=True)
class BendMeasure:
    """How far a chain departs from its own base line.

    ``d`` is the endpoint-to-endpoint distance, ``x`` the maximum
    perpendicular distance of any interior vertex to the infinite line
    through the endpoints, ``ratio`` is x/d.  ``farthest_index`` is the
    index of the maximizing interior vertex (smallest index on ties),
    or None for two-point chains.
    """

    d: float
    x: float
    ratio: float
    farthest_index: Optional[int]


def deflection_angle(incoming: Segment, outgoing: Segment) -> float:
    """Angle in degrees between the continuation of one directed segment
    and the direction of the next.

    0 means perfectly collinear continuation, 180 a full reversal.
    """
    ux = incoming[1][0] - incoming[0][0]
    uy = incoming[1][1] - incoming[0][1]
    vx = outgoing[1][0] - outgoing[0][0]
    vy = outgoing[1][1] - outgoing[0][1]
    if (ux == 0.0 and uy == 0.0) or (vx == 0.0 and vy == 0.0):
        raise GeometryError("deflection angle of zero-length segment")
    cross = ux * vy - uy * vx
    dot = ux * vx + uy * vy
    return math.degrees(math.atan2(abs(cross), dot))


def direction_angle_between(u: Tuple[float, float], v: Tuple[float, float]) -> float:
    """Angle in degrees between two direction vectors, in [0, 180]."""
    if (u[0] == 0.0 and u[1] == 0.0) or (v[0] == 0.0 and v[1] == 0.0):
        raise GeometryError("zero-length direction vector")
    cross = u[0] * v[1] - u[1] * v[0]
    dot = u[0] * v[0] + u[1] * v[1]
    return math.degrees(math.atan2(abs(cross), dot))


def line_deflection(a: Segment, b: Segment) -> float:
    """Deflection between two undirected segments, in [0, 90].

    Orientation-free variant of :func:`deflection_angle`: 0 means the
    segments are parallel or collinear continuations.
    """
    ang = deflection_angle(a, b)
    return min(ang, 180.0 - ang)


def measure_bend(line, eps: float = DEFAULT_SNAP_TOLERANCE) -> BendMeasure:
    """Base-line length d, farthest-vertex offset x and their ratio.

    Raises ClosedLoopError if the endpoints coincide within ``eps``
    (the caller must pre-split closed chains).
    """
    pts = line.points if isinstance(line, Polyline) else tuple(line)
    return measure_bend_range(pts, 0, len(pts) - 1, eps)


def measure_bend_range(pts: Sequence[PointLike], i: int, j: int,
                       eps: float = DEFAULT_SNAP_TOLERANCE) -> BendMeasure:
    """measure_bend over the vertex slice pts[i..j] without copying."""
    if j - i < 1:
        raise GeometryError("bend measure needs at least 2 points")
    ax, ay = pts[i][0], pts[i][1]
    bx, by = pts[j][0], pts[j][1]
    dxe = bx - ax
    dye = by - ay
    d = math.hypot(dxe, dye)
    if d < eps:
        raise ClosedLoopError("coincident endpoints (d=%.3g < %.3g)" % (d, eps))
    best = 0.0
    best_k = None
    for k in range(i + 1, j):
        p = pts[k]
        off = abs(dxe * (p[1] - ay) - dye * (p[0] - ax)) / d
        if off > best:
            best = off
            best_k = k - i
    if best_k is None and j - i >= 2:
        # all interior vertices exactly on the base line
        best_k = 1
    return BendMeasure(d=d, x=best, ratio=best / d, farthest_index=best_k)


def bend_base_angle(ratio: float) -> float:
    """Base angle in degrees between the base line and the leg reaching a
    mid-chain vertex whose offset ratio is x/d = ``ratio``."""
    if not (ratio > 0.0) or not math.isfinite(ratio):
        raise GeometryError("ratio must be a positive finite number")
    return math.degrees(math.atan(1.0 / (2.0 * ratio)))


def min_deflection_from_ratio(ratio: float) -> float:
    """Minimum deflection angle implied by splitting a chain of bend ratio
    ``ratio`` at a mid-chain vertex, in degrees.

    Strictly increasing in ratio; tends to 0 as the chain straightens.
    """
    return 180.0 - 2.0 * bend_base_angle(ratio)


def point_segment_distance(p: PointLike, a: PointLike, b: PointLike) -> float:
    """Distance from p to the closed segment a-b."""
    vx = b[0] - a[0]
    vy = b[1] - a[1]
    wx = p[0] - a[0]
    wy = p[1] - a[1]
    seg2 = vx * vx + vy * vy
    if seg2 <= 0.0:
        return math.hypot(wx, wy)
    t = (wx * vx + wy * vy) / seg2
    if t < 0.0:
        t = 0.0
    elif t > 1.0:
        t = 1.0
    return math.hypot(wx - t * vx, wy - t * vy)


def _closest_on_segment(p: PointLike, a: PointLike, b: PointLike) -> Point:
    vx = b[0] - a[0]
    vy = b[1] - a[1]
    seg2 = vx * vx + vy * vy
    if seg2 <= 0.0:
        return Point(a[0], a[1])
    t = ((p[0] - a[0]) * vx + (p[1] - a[1]) * vy) / seg2
    t = 0.0 if t < 0.0 else (1.0 if t > 1.0 else t)
    return Point(a[0] + t * vx, a[1] + t * vy)


def segments_intersect(a: Segment, b: Segment,
                       tolerance: float = 1e-9) -> Optional[Point]:
    """Intersection point of two closed segments, or None.

    Returns a point when the segments properly cross, or when they touch
    within ``tolerance`` (endpoint contact, T-contact, collinear overlap).
    """
    p, p2 = a
    q, q2 = b
    rx = p2[0] - p[0]
    ry = p2[1] - p[1]
    sx = q2[0] - q[0]
    sy = q2[1] - q[1]
    denom = rx * sy - ry * sx
    qpx = q[0] - p[0]
    qpy = q[1] - p[1]
    if denom != 0.0:
        t = (qpx * sy - qpy * sx) / denom
        u = (qpx * ry - qpy * rx) / denom
        if 0.0 <= t <= 1.0 and 0.0 <= u <= 1.0:
            return Point(p[0] + t * rx, p[1] + t * ry)
    # Non-crossing segments attain their minimum distance at an endpoint
    # of one of them, so four point-segment checks are complete.
    best_d = math.inf
    best_pt: Optional[Point] = None
    for pt, seg in ((p, b), (p2, b), (q, a), (q2, a)):
        dd = point_segment_distance(pt, seg[0], seg[1])
        if dd < best_d:
            best_d = dd
            best_pt = _closest_on_segment(pt, seg[0], seg[1])
    if best_d <= tolerance:
        return best_pt
    return None


class SegmentGrid:
    """Uniform hash grid over segments for candidate-pair queries.

    Guarantees that any two segments passing within one cell of each other
    appear as a candidate pair; exact intersection tests are the caller's
    job.
    """

    def __init__(self, cell_size: float):
        if not (cell_size > 0.0):
            raise GeometryError("cell size must be positive")
        self.cell = float(cell_size)
        self._cells: dict = {}

    def _walk_cells(self, a: PointLike, b: PointLike):
        c = self.cell
        x0, y0 = a[0] / c, a[1] / c
        x1, y1 = b[0] / c, b[1] / c
        ix, iy = math.floor(x0), math.floor(y0)
        jx, jy = math.floor(x1), math.floor(y1)
        yield ix, iy
        if (ix, iy) == (jx, jy):
            return
        # conservative DDA: step through cells crossed by the segment
        steps = int(abs(jx - ix) + abs(jy - iy))
        dx = x1 - x0
        dy = y1 - y0
        sx = 1 if dx > 0 else -1
        sy = 1 if dy > 0 else -1
        tx = ((ix + (sx > 0)) - x0) / dx if dx != 0 else math.inf
        ty = ((iy + (sy > 0)) - y0) / dy if dy != 0 else math.inf
        ddx = abs(1.0 / dx) if dx != 0 else math.inf
        ddy = abs(1.0 / dy) if dy != 0 else math.inf
        for _ in range(steps):
            if tx < ty:
                tx += ddx
                ix += sx
            else:
                ty += ddy
                iy += sy
            yield ix, iy

    def insert(self, key, a: PointLike, b: PointLike) -> None:
        for cell in self._walk_cells(a, b):
            self._cells.setdefault(cell, []).append(key)

    def candidate_pairs(self):
        """All unordered key pairs sharing a cell or adjacent cells."""
        seen = set()
        cells = self._cells
        neighbor = ((1, 0), (0, 1), (1, 1), (1, -1))
        for (cx, cy), items in cells.items():
            n = len(items)
            for i in range(n):
                ki = items[i]
                for j in range(i + 1, n):
                    kj = items[j]
                    if ki != kj:
                        pair = (ki, kj) if ki < kj else (kj, ki)
                        if pair not in seen:
                            seen.add(pair)
                            yield pair
            for ox, oy in neighbor:
                other = cells.get((cx + ox, cy + oy))
                if not other:
                    continue
                for ki in items:
                    for kj in other:
                        if ki != kj:
                            pair = (ki, kj) if ki < kj else (kj, ki)
                            if pair not in seen:
                                seen.add(pair)
                                yield pair
