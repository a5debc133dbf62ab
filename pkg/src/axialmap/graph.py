"""Connectivity graph over axial lines or natural streets, space-syntax
integration metrics, and natural-breaks classification of metric values.
"""

from __future__ import annotations

import logging
import math
from bisect import bisect_left
from collections import deque
from dataclasses import dataclass
from typing import Dict, Iterable, List, Optional, Sequence, Set, Tuple, Union

from .axial import AxialLine, AxialMap
from .geometry import SegmentGrid, segments_intersect
from .streets import NaturalStreet
from .topology import StreetNetwork

logger = logging.getLogger(__name__)

DEFAULT_LOCAL_RADIUS = 3


class ConnectivityGraph:
    """Simple undirected graph: one node per unit, one edge per
    intersecting unit pair."""

    def __init__(self, node_ids: Iterable[int],
                 edges: Iterable[Tuple[int, int]]):
        self._adj: Dict[int, Set[int]] = {nid: set() for nid in node_ids}
        self._edges: Set[Tuple[int, int]] = set()
        for u, v in edges:
            if u == v:
                continue
            if u not in self._adj or v not in self._adj:
                raise ValueError("edge (%r, %r) references unknown node" % (u, v))
            key = (u, v) if u < v else (v, u)
            if key in self._edges:
                continue
            self._edges.add(key)
            self._adj[u].add(v)
            self._adj[v].add(u)

    @property
    def nodes(self) -> List[int]:
        return sorted(self._adj)

    @property
    def edges(self) -> List[Tuple[int, int]]:
        return sorted(self._edges)

    def neighbors(self, node: int) -> Set[int]:
        return self._adj[node]

    def degree(self, node: int) -> int:
        return len(self._adj[node])

    def __len__(self) -> int:
        return len(self._adj)


@dataclass
class NodeMetrics:
    connectivity: int
    total_depth: Optional[float]
    mean_depth: Optional[float]
    node_count_in_radius: int
    ra: Optional[float]
    rra: Optional[float]
    integration: Optional[float]
    radius: Optional[int]


def build_connectivity_graph(units: Union[AxialMap, Sequence[AxialLine], Sequence[NaturalStreet]],
                             net: Optional[StreetNetwork] = None,
                             tolerance: float = 0.01) -> ConnectivityGraph:
    """Edges join intersecting axial lines, or streets sharing a node."""
    if isinstance(units, AxialMap):
        units = units.lines
    units = list(units)
    if not units:
        return ConnectivityGraph([], [])
    if isinstance(units[0], AxialLine):
        return _axial_graph(units, tolerance)
    if net is None:
        raise ValueError("street connectivity needs the source network")
    return _street_graph(units, net)


def _axial_graph(lines: Sequence[AxialLine], tolerance: float) -> ConnectivityGraph:
    span = 1.0
    for ln in lines:
        span = max(span, abs(ln.start.x), abs(ln.start.y),
                   abs(ln.end.x), abs(ln.end.y))
    grid = SegmentGrid(max(span / 64.0, tolerance * 10.0))
    by_id = {ln.id: ln for ln in lines}
    if len(by_id) != len(lines):
        raise ValueError("axial line ids are not unique")
    for ln in lines:
        grid.insert(ln.id, ln.start, ln.end)
    edges = []
    for ia, ib in grid.candidate_pairs():
        la, lb = by_id[ia], by_id[ib]
        if segments_intersect(la.segment(), lb.segment(), tolerance) is not None:
            edges.append((ia, ib))
    return ConnectivityGraph(by_id.keys(), edges)


def _street_graph(streets: Sequence[NaturalStreet],
                  net: StreetNetwork) -> ConnectivityGraph:
    node_units: Dict[int, List[int]] = {}
    for s in streets:
        touched: Set[int] = set()
        for aid in s.arc_chain:
            arc = net.arcs[aid]
            touched.add(arc.from_node)
            touched.add(arc.to_node)
        for nid in touched:
            node_units.setdefault(nid, []).append(s.id)
    edges = []
    for members in node_units.values():
        for i in range(len(members)):
            for j in range(i + 1, len(members)):
                edges.append((members[i], members[j]))
    return ConnectivityGraph((s.id for s in streets), edges)


def _bfs_depths(graph: ConnectivityGraph, source: int,
                radius: Optional[int]) -> Dict[int, int]:
    depths = {source: 0}
    frontier = deque((source,))
    while frontier:
        nid = frontier.popleft()
        d = depths[nid]
        if radius is not None and d >= radius:
            continue
        for nb in graph.neighbors(nid):
            if nb not in depths:
                depths[nb] = d + 1
                frontier.append(nb)
    return depths


def diamond_value(k: int) -> float:
    """Normalization constant for relative asymmetry at system size k."""
    if k < 3:
        raise ValueError("diamond value needs k >= 3")
    return 2.0 * (k * (math.log2((k + 2) / 3.0) - 1.0) + 1.0) / ((k - 1) * (k - 2))


def integration(graph: ConnectivityGraph, node: int,
                radius: Optional[int] = None) -> NodeMetrics:
    """Depth-based integration of one node within a topological radius.

    ``radius=None`` means unbounded (global integration).  With fewer than
    three reachable nodes the ratio metrics are undefined and reported as
    None; a zero relative asymmetry maps to an infinite integration
    sentinel that ranks above every finite value.
    """
    depths = _bfs_depths(graph, node, radius)
    k = len(depths)
    connectivity = graph.degree(node)
    if k < 2:
        return NodeMetrics(connectivity=connectivity, total_depth=None,
                           mean_depth=None, node_count_in_radius=k,
                           ra=None, rra=None, integration=None, radius=radius)
    td = float(sum(depths.values()))
    md = td / (k - 1)
    if k < 3:
        return NodeMetrics(connectivity=connectivity, total_depth=td,
                           mean_depth=md, node_count_in_radius=k,
                           ra=None, rra=None, integration=None, radius=radius)
    ra = 2.0 * (md - 1.0) / (k - 2.0)
    rra = ra / diamond_value(k)
    integ = math.inf if rra == 0.0 else 1.0 / rra
    return NodeMetrics(connectivity=connectivity, total_depth=td,
                       mean_depth=md, node_count_in_radius=k,
                       ra=ra, rra=rra, integration=integ, radius=radius)


def all_metrics(graph: ConnectivityGraph,
                radius: Optional[int] = None) -> Dict[int, NodeMetrics]:
    return {nid: integration(graph, nid, radius) for nid in graph.nodes}


def _weighted_distinct(values: Sequence[float]) -> Tuple[List[float], List[int]]:
    ordered = sorted(values)
    distinct: List[float] = []
    weights: List[int] = []
    for v in ordered:
        if distinct and v == distinct[-1]:
            weights[-1] += 1
        else:
            distinct.append(v)
            weights.append(1)
    return distinct, weights


def jenks_breaks(values: Sequence[float], class_count: int) -> List[float]:
    """Optimal natural breaks: the contiguous k-classing of the sorted
    values minimizing the within-class sum of squared deviations.

    Exact dynamic program (divide-and-conquer over the monotone optimal
    split positions), not the common heuristic.  Returns the k-1 upper
    bounds of the first k-1 classes.  A class count above the number of
    distinct values is reduced with a warning.
    """
    if not values:
        raise ValueError("jenks breaks need at least one value")
    if class_count < 1:
        raise ValueError("class count must be >= 1")
    distinct, weights = _weighted_distinct([float(v) for v in values])
    n = len(distinct)
    k = class_count
    if k > n:
        logger.warning("class count %d reduced to %d distinct values", k, n)
        k = n
    if k == 1:
        return []

    prefix_w = [0.0] * (n + 1)
    prefix_s = [0.0] * (n + 1)
    prefix_q = [0.0] * (n + 1)
    for i, (v, w) in enumerate(zip(distinct, weights)):
        prefix_w[i + 1] = prefix_w[i] + w
        prefix_s[i + 1] = prefix_s[i] + w * v
        prefix_q[i + 1] = prefix_q[i] + w * v * v

    def sse(j: int, i: int) -> float:
        # weighted sum of squared deviations of distinct[j:i]
        w = prefix_w[i] - prefix_w[j]
        s = prefix_s[i] - prefix_s[j]
        q = prefix_q[i] - prefix_q[j]
        val = q - s * s / w
        return val if val > 0.0 else 0.0

    prev = [math.inf] * (n + 1)
    for i in range(1, n + 1):
        prev[i] = sse(0, i)
    opt: List[List[int]] = [[0] * (n + 1) for _ in range(k + 1)]

    for c in range(2, k + 1):
        cur = [math.inf] * (n + 1)
        opt_c = opt[c]

        def solve(lo: int, hi: int, jlo: int, jhi: int) -> None:
            if lo > hi:
                return
            mid = (lo + hi) // 2
            best = math.inf
            best_j = -1
            j_start = max(jlo, c - 1)
            j_end = min(jhi, mid - 1)
            for j in range(j_start, j_end + 1):
                cost = prev[j] + sse(j, mid)
                if cost < best:
                    best = cost
                    best_j = j
            cur[mid] = best
            opt_c[mid] = best_j
            solve(lo, mid - 1, jlo, best_j)
            solve(mid + 1, hi, best_j, jhi)

        solve(c, n, c - 1, n - 1)
        prev = cur

    splits: List[int] = []
    i = n
    for c in range(k, 1, -1):
        j = opt[c][i]
        splits.append(j)
        i = j
    splits.reverse()
    return [distinct[j - 1] for j in splits]


def class_index(value, breaks: Sequence[float]) -> Optional[int]:
    """Class of a value against upper-bound breaks; None stays None and an
    infinite value ranks in the top class."""
    if value is None:
        return None
    if isinstance(value, float) and math.isinf(value):
        return len(breaks)
    return bisect_left(breaks, value)


def classify(values: Sequence, class_count: int) -> Tuple[List[float], List[Optional[int]]]:
    """Breaks over the finite values plus per-value class indices."""
    finite = [v for v in values
              if v is not None and not (isinstance(v, float) and math.isinf(v))]
    if not finite:
        return [], [None if v is None else 0 for v in values]
    breaks = jenks_breaks(finite, class_count)
    return breaks, [class_index(v, breaks) for v in values]
