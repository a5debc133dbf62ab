"""Axial line generation: chopping natural streets into the least set of
straight segments and merging near-collinear survivors across streets.

Thresholds are derived once from the full street population by the mean
split of the bend statistics: streets bend more than average relative to
their own base line get chopped recursively at the farthest vertex, the
rest collapse to a single endpoint-to-endpoint line.  Afterwards,
intersecting lines from different streets whose deflection stays below
the minimum angle implied by those thresholds are replaced by one line.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import FrozenSet, List, Optional, Sequence, Set, Tuple

from .geometry import (
    BendMeasure,
    ClosedLoopError,
    GeometryError,
    Point,
    SegmentGrid,
    dist,
    line_deflection,
    measure_bend_range,
    min_deflection_from_ratio,
    segments_intersect,
)
from .streets import JoinPrinciple, NaturalStreet, generate_natural_streets
from .topology import StreetNetwork

logger = logging.getLogger(__name__)

DEFAULT_HEAD_RATIO_FRACTION = 0.10


class ThresholdsUnavailableError(RuntimeError):
    """No street population from which to derive chop thresholds."""


@dataclass(frozen=True)
class ChopThresholds:
    """Population means of the bend statistics, with the derived minimum
    merge angle cached."""

    mean_x: float
    mean_ratio: float
    head_ratio_fraction: float = DEFAULT_HEAD_RATIO_FRACTION
    min_merge_angle: float = field(init=False)

    def __post_init__(self):
        if not (self.mean_x > 0.0 and self.mean_ratio > 0.0):
            raise ValueError("threshold means must be positive")
        if not (0.0 < self.head_ratio_fraction <= 1.0):
            raise ValueError("head ratio fraction must be in (0, 1]")
        object.__setattr__(
            self, "min_merge_angle",
            min_deflection_from_ratio(self.head_ratio_fraction * self.mean_ratio))


@dataclass
class AxialLine:
    id: int
    start: Point
    end: Point
    source_street_ids: FrozenSet[int]
    covered_interval: Tuple[Point, ...]

    @property
    def length(self) -> float:
        return dist(self.start, self.end)

    def segment(self) -> Tuple[Point, Point]:
        return (self.start, self.end)


@dataclass
class AxialMap:
    lines: List[AxialLine]
    thresholds: Optional[ChopThresholds]
    provenance: str = ""

    def __len__(self) -> int:
        return len(self.lines)


def compute_thresholds(streets: Sequence[NaturalStreet],
                       eps: float = 0.01,
                       head_ratio_fraction: float = DEFAULT_HEAD_RATIO_FRACTION) -> ChopThresholds:
    """Arithmetic means of x and x/d over all open streets with at least
    three vertices.  Closed streets carry no base line and are excluded."""
    xs: List[float] = []
    ratios: List[float] = []
    for s in streets:
        if s.closed or len(s.geometry) < 3:
            continue
        try:
            b = s.bend(eps=eps)
        except ClosedLoopError:
            continue
        xs.append(b.x)
        ratios.append(b.ratio)
    if not xs:
        raise ThresholdsUnavailableError("no open street with >= 3 vertices")
    mean_x = sum(xs) / len(xs)
    mean_ratio = sum(ratios) / len(ratios)
    if mean_x <= 0.0 or mean_ratio <= 0.0:
        raise ThresholdsUnavailableError(
            "street population is perfectly straight; no bend statistics")
    return ChopThresholds(mean_x=mean_x, mean_ratio=mean_ratio,
                          head_ratio_fraction=head_ratio_fraction)


def chop_predicate(b: BendMeasure, t: ChopThresholds) -> bool:
    """True when the chain must be split.

    Big offsets need only a fraction of the mean ratio; small offsets must
    exceed the full mean ratio.
    """
    if b.x > t.mean_x:
        return b.ratio >= t.head_ratio_fraction * t.mean_ratio
    return b.ratio >= t.mean_ratio


def _loop_split_index(pts: Sequence[Point], i: int, j: int) -> int:
    """Interior vertex closest to half the arc length from pts[i]."""
    total = 0.0
    cum = [0.0]
    for k in range(i, j):
        total += dist(pts[k], pts[k + 1])
        cum.append(total)
    half = total / 2.0
    best_k = i + 1
    best_err = abs(cum[1] - half)
    for k in range(2, j - i):
        err = abs(cum[k] - half)
        if err < best_err:
            best_err = err
            best_k = i + k
    return best_k


def chop(street: NaturalStreet, thresholds: ChopThresholds,
         eps: float = 0.01) -> List[AxialLine]:
    """Recursively split one street into straight axial lines.

    The thresholds are global constants frozen before any chopping; each
    split happens at the farthest vertex from the current base line.
    Closed streets are first opened at the arc-length midpoint vertex.
    """
    pts = street.geometry.points
    n = len(pts)
    out: List[AxialLine] = []
    stack: List[Tuple[int, int]] = []
    if street.closed and n >= 3:
        m = _loop_split_index(pts, 0, n - 1)
        stack.append((m, n - 1))
        stack.append((0, m))
    else:
        stack.append((0, n - 1))
    while stack:
        i, j = stack.pop()
        if j - i < 1:
            continue
        if j - i == 1:
            if dist(pts[i], pts[j]) < eps:
                continue
            out.append(AxialLine(id=-1, start=pts[i], end=pts[j],
                                 source_street_ids=frozenset((street.id,)),
                                 covered_interval=pts[i:j + 1]))
            continue
        try:
            b = measure_bend_range(pts, i, j, eps=eps)
        except ClosedLoopError:
            # sub-chain loops back onto itself: open it like a ring
            m = _loop_split_index(pts, i, j)
            stack.append((m, j))
            stack.append((i, m))
            continue
        if chop_predicate(b, thresholds):
            k = i + b.farthest_index
            stack.append((k, j))
            stack.append((i, k))
        else:
            out.append(AxialLine(id=-1, start=pts[i], end=pts[j],
                                 source_street_ids=frozenset((street.id,)),
                                 covered_interval=pts[i:j + 1]))
    return out


def _merged_interval(a: AxialLine, b: AxialLine,
                     start: Point, end: Point) -> Tuple[Point, ...]:
    """Concatenate the parents' vertex chains along the merged direction."""
    dx = end.x - start.x
    dy = end.y - start.y

    def oriented(iv: Tuple[Point, ...]) -> Tuple[Point, ...]:
        head = iv[0].x * dx + iv[0].y * dy
        tail = iv[-1].x * dx + iv[-1].y * dy
        return iv if head <= tail else iv[::-1]

    ia = oriented(a.covered_interval)
    ib = oriented(b.covered_interval)
    if ib[0].x * dx + ib[0].y * dy < ia[0].x * dx + ia[0].y * dy:
        ia, ib = ib, ia
    if ia[-1] == ib[0]:
        return ia + ib[1:]
    return ia + ib


def _farthest_endpoints(a: AxialLine, b: AxialLine) -> Tuple[Point, Point]:
    ends = (a.start, a.end, b.start, b.end)
    best = -1.0
    pick = (a.start, a.end)
    for i in range(4):
        for j in range(i + 1, 4):
            dd = dist(ends[i], ends[j])
            if dd > best:
                best = dd
                pick = (ends[i], ends[j])
    return pick


def merge_collinear(lines: Sequence[AxialLine], min_angle: float,
                    tolerance: float = 0.01,
                    across_streets_only: bool = True) -> List[AxialLine]:
    """Replace intersecting near-collinear line pairs with single lines.

    Pairs are processed in ascending angle order and merging repeats until
    no intersecting pair deflects less than ``min_angle``.  By default only
    lines with disjoint source streets are eligible.
    """
    current: List[Optional[AxialLine]] = list(lines)
    changed = True
    while changed:
        changed = False
        live = [(idx, ln) for idx, ln in enumerate(current) if ln is not None]
        if len(live) < 2:
            break
        span = 1.0
        for _, ln in live:
            span = max(span, abs(ln.start.x), abs(ln.start.y),
                       abs(ln.end.x), abs(ln.end.y))
        grid = SegmentGrid(max(span / 64.0, tolerance * 10.0))
        for idx, ln in live:
            grid.insert(idx, ln.start, ln.end)
        candidates = []
        for ia, ib in grid.candidate_pairs():
            la = current[ia]
            lb = current[ib]
            if la is None or lb is None:
                continue
            if across_streets_only and (la.source_street_ids & lb.source_street_ids):
                continue
            try:
                ang = line_deflection(la.segment(), lb.segment())
            except GeometryError:
                continue
            if ang >= min_angle:
                continue
            if segments_intersect(la.segment(), lb.segment(), tolerance) is None:
                continue
            candidates.append((ang, ia, ib))
        candidates.sort()
        consumed: Set[int] = set()
        for ang, ia, ib in candidates:
            if ia in consumed or ib in consumed:
                continue
            la = current[ia]
            lb = current[ib]
            start, end = _farthest_endpoints(la, lb)
            merged = AxialLine(
                id=-1, start=start, end=end,
                source_street_ids=la.source_street_ids | lb.source_street_ids,
                covered_interval=_merged_interval(la, lb, start, end))
            current[min(ia, ib)] = merged
            current[max(ia, ib)] = None
            consumed.add(ia)
            consumed.add(ib)
            changed = True
    out = [ln for ln in current if ln is not None]
    for idx, ln in enumerate(out):
        ln.id = idx
    return out


def generate_axial_map(net: StreetNetwork,
                       principle: JoinPrinciple = JoinPrinciple.EVERY_BEST_FIT,
                       join_threshold: float = 45.0,
                       head_ratio_fraction: float = DEFAULT_HEAD_RATIO_FRACTION,
                       streets: Optional[Sequence[NaturalStreet]] = None) -> AxialMap:
    """Full pipeline from a street network to an axial map.

    When the street population carries no usable bend statistics, every
    street falls back to a single endpoint-to-endpoint line and the merge
    stage is skipped.
    """
    if streets is None:
        streets = generate_natural_streets(net, principle, join_threshold)
    eps = net.snap_tolerance
    provenance = "network(nodes=%d, arcs=%d)" % (len(net.nodes), len(net.arcs))
    try:
        thresholds = compute_thresholds(streets, eps=eps,
                                        head_ratio_fraction=head_ratio_fraction)
    except ThresholdsUnavailableError:
        logger.warning("chop thresholds unavailable; one line per street")
        lines = []
        for s in streets:
            pts = s.geometry.points
            if dist(pts[0], pts[-1]) < eps:
                continue
            lines.append(AxialLine(id=len(lines), start=pts[0], end=pts[-1],
                                   source_street_ids=frozenset((s.id,)),
                                   covered_interval=pts))
        return AxialMap(lines=lines, thresholds=None, provenance=provenance)

    lines: List[AxialLine] = []
    for s in streets:
        lines.extend(chop(s, thresholds, eps=eps))
    merged = merge_collinear(lines, thresholds.min_merge_angle, tolerance=eps)
    return AxialMap(lines=merged, thresholds=thresholds, provenance=provenance)
