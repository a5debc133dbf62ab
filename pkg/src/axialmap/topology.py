"""Arc-node street network construction from raw center-line polylines.

Raw line collections carry no topology: junctions exist only where lines
share coordinates.  ``planarize`` snaps vertices, splits lines at shared
points (optionally at pure geometric crossings) and produces an immutable
arc-node network.  ``detect_and_collapse_roundabouts`` replaces small
rings with single junction nodes, leaving large ring roads untouched.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Sequence, Set, Tuple

from .geometry import (
    DEFAULT_SNAP_TOLERANCE,
    Point,
    Polyline,
    SegmentGrid,
    dist,
    dist2,
    segments_intersect,
)

logger = logging.getLogger(__name__)


@dataclass
class NetworkNode:
    id: int
    location: Point
    incident_arcs: Set[int] = field(default_factory=set)

    @property
    def degree(self) -> int:
        return len(self.incident_arcs)


@dataclass
class Arc:
    id: int
    from_node: int
    to_node: int
    geometry: Polyline
    length: float

    def end_nodes(self) -> Tuple[int, int]:
        return (self.from_node, self.to_node)

    def node_at(self, end: int) -> int:
        return self.from_node if end == 0 else self.to_node

    def direction_leaving(self, end: int) -> Tuple[float, float]:
        """Unit-free direction vector of the geometry leaving the given end."""
        pts = self.geometry.points
        if end == 0:
            a, b = pts[0], pts[1]
        else:
            a, b = pts[-1], pts[-2]
        return (b.x - a.x, b.y - a.y)


class StreetNetwork:
    """Immutable planar arc-node network."""

    def __init__(self, nodes: Dict[int, NetworkNode], arcs: Dict[int, Arc],
                 snap_tolerance: float = DEFAULT_SNAP_TOLERANCE,
                 skipped_degenerate: int = 0):
        self.nodes = nodes
        self.arcs = arcs
        self.snap_tolerance = snap_tolerance
        self.skipped_degenerate = skipped_degenerate

    @property
    def adjacency(self) -> Dict[int, Set[int]]:
        return {nid: node.incident_arcs for nid, node in self.nodes.items()}

    def arcs_at(self, node_id: int) -> Set[int]:
        return self.nodes[node_id].incident_arcs

    def total_length(self) -> float:
        return sum(a.length for a in self.arcs.values())

    def component_count(self) -> int:
        seen: Set[int] = set()
        count = 0
        for start in self.nodes:
            if start in seen:
                continue
            count += 1
            stack = [start]
            seen.add(start)
            while stack:
                nid = stack.pop()
                for aid in self.nodes[nid].incident_arcs:
                    arc = self.arcs[aid]
                    for other in arc.end_nodes():
                        if other not in seen:
                            seen.add(other)
                            stack.append(other)
        return count

    def __repr__(self) -> str:
        return "StreetNetwork(%d nodes, %d arcs)" % (len(self.nodes), len(self.arcs))


class _Snapper:
    """Clusters coordinates within a tolerance onto stable representatives."""

    def __init__(self, tol: float):
        self.tol = tol
        self.tol2 = tol * tol
        self._cells: Dict[Tuple[int, int], List[Point]] = {}

    def snap(self, x: float, y: float) -> Point:
        tol = self.tol
        ix = math.floor(x / tol)
        iy = math.floor(y / tol)
        best = None
        best_d = self.tol2
        for ox in (-1, 0, 1):
            for oy in (-1, 0, 1):
                for rep in self._cells.get((ix + ox, iy + oy), ()):
                    dd = dist2(rep, (x, y))
                    if dd <= best_d:
                        best_d = dd
                        best = rep
        if best is not None:
            return best
        rep = Point(x, y)
        self._cells.setdefault((ix, iy), []).append(rep)
        return rep


def _insert_crossings(chains: List[List[Point]], snapper: _Snapper,
                      tol: float) -> List[List[Point]]:
    """Add a vertex to every pair of chains where they cross without
    sharing one, so shared-coordinate splitting applies afterwards."""
    grid_cell = max(tol * 100.0, 1.0)
    span = 0.0
    for chain in chains:
        for p in chain:
            span = max(span, abs(p.x), abs(p.y))
    grid_cell = max(grid_cell, span / 256.0) if span > 0 else grid_cell
    grid = SegmentGrid(grid_cell)
    segs = []
    for li, chain in enumerate(chains):
        for si in range(len(chain) - 1):
            segs.append((li, si))
            grid.insert(len(segs) - 1, chain[si], chain[si + 1])
    # collected[li][si] -> list of interior points to insert on that segment
    collected: Dict[Tuple[int, int], List[Point]] = {}
    for ia, ib in grid.candidate_pairs():
        la, sa = segs[ia]
        lb, sb = segs[ib]
        if la == lb:
            continue
        a = (chains[la][sa], chains[la][sa + 1])
        b = (chains[lb][sb], chains[lb][sb + 1])
        hit = segments_intersect(a, b, tolerance=tol)
        if hit is None:
            continue
        pt = snapper.snap(hit.x, hit.y)
        for (li, si), seg in (((la, sa), a), ((lb, sb), b)):
            if dist2(pt, seg[0]) > tol * tol and dist2(pt, seg[1]) > tol * tol:
                collected.setdefault((li, si), []).append(pt)
    if not collected:
        return chains
    out: List[List[Point]] = []
    for li, chain in enumerate(chains):
        new_chain: List[Point] = [chain[0]]
        for si in range(len(chain) - 1):
            a, b = chain[si], chain[si + 1]
            extra = collected.get((li, si))
            if extra:
                extra = sorted(set(extra), key=lambda p: dist2(a, p))
                new_chain.extend(extra)
            new_chain.append(b)
        out.append(new_chain)
    return out


def planarize(raw: Iterable[Polyline],
              snap_tolerance: float = DEFAULT_SNAP_TOLERANCE,
              split_at_crossings: bool = False) -> StreetNetwork:
    """Build an arc-node network from raw polylines.

    Junction nodes appear wherever two lines share a coordinate within the
    snap tolerance (and, with ``split_at_crossings``, wherever they cross
    geometrically).  Lines are split at junctions, duplicate arcs removed.
    Degenerate (sub-tolerance) polylines are skipped and counted.
    """
    tol = snap_tolerance
    snapper = _Snapper(tol)
    chains: List[List[Point]] = []
    skipped = 0
    for line in raw:
        pts = [snapper.snap(p[0], p[1]) for p in line]
        cleaned: List[Point] = []
        for p in pts:
            if not cleaned or cleaned[-1] != p:
                cleaned.append(p)
        if len(cleaned) < 2:
            skipped += 1
            continue
        chains.append(cleaned)
    if skipped:
        logger.warning("planarize skipped %d degenerate polyline(s)", skipped)

    if split_at_crossings and chains:
        chains = _insert_crossings(chains, snapper, tol)

    # A coordinate becomes a node if it is any chain endpoint or is used
    # more than once over all chains (shared junction or self-revisit).
    use_count: Dict[Point, int] = {}
    node_keys: Set[Point] = set()
    for chain in chains:
        node_keys.add(chain[0])
        node_keys.add(chain[-1])
        for p in chain:
            use_count[p] = use_count.get(p, 0) + 1
    for p, c in use_count.items():
        if c >= 2:
            node_keys.add(p)

    nodes: Dict[int, NetworkNode] = {}
    node_id_of: Dict[Point, int] = {}

    def node_for(p: Point) -> int:
        nid = node_id_of.get(p)
        if nid is None:
            nid = len(nodes)
            node_id_of[p] = nid
            nodes[nid] = NetworkNode(id=nid, location=p)
        return nid

    arcs: Dict[int, Arc] = {}
    seen_geoms: Set[Tuple[Point, ...]] = set()
    for chain in chains:
        start = 0
        for i in range(1, len(chain)):
            if chain[i] in node_keys or i == len(chain) - 1:
                piece = tuple(chain[start:i + 1])
                start = i
                canon = piece if piece <= piece[::-1] else piece[::-1]
                if canon in seen_geoms:
                    continue
                seen_geoms.add(canon)
                geom = Polyline(piece)
                aid = len(arcs)
                u = node_for(piece[0])
                v = node_for(piece[-1])
                arcs[aid] = Arc(id=aid, from_node=u, to_node=v,
                                geometry=geom, length=geom.length())
                nodes[u].incident_arcs.add(aid)
                nodes[v].incident_arcs.add(aid)

    return StreetNetwork(nodes, arcs, snap_tolerance=tol,
                         skipped_degenerate=skipped)


def _face_walk(net: StreetNetwork):
    """Trace the faces of the planar subdivision.

    Yields each face as a list of half-edges (arc_id, departing_end).
    """
    # ports[node] = [(angle, arc_id, end)], sorted by departure angle
    ports: Dict[int, List[Tuple[float, int, int]]] = {nid: [] for nid in net.nodes}
    for arc in net.arcs.values():
        for end in (0, 1):
            nid = arc.node_at(end)
            vx, vy = arc.direction_leaving(end)
            ports[nid].append((math.atan2(vy, vx), arc.id, end))
    pos: Dict[Tuple[int, int], Tuple[int, int]] = {}
    for nid, plist in ports.items():
        plist.sort()
        for i, (_, aid, end) in enumerate(plist):
            pos[(aid, end)] = (nid, i)

    visited: Set[Tuple[int, int]] = set()
    for arc in net.arcs.values():
        for start_end in (0, 1):
            he = (arc.id, start_end)
            if he in visited:
                continue
            face: List[Tuple[int, int]] = []
            cur = he
            while cur not in visited:
                visited.add(cur)
                face.append(cur)
                aid, end = cur
                arrive_end = 1 - end
                nid, i = pos[(aid, arrive_end)]
                plist = ports[nid]
                _, naid, nend = plist[(i - 1) % len(plist)]
                cur = (naid, nend)
            yield face


def detect_and_collapse_roundabouts(net: StreetNetwork,
                                    max_perimeter: float = 120.0,
                                    max_cycle_arcs: int = 16) -> StreetNetwork:
    """Replace every small simple ring with a single junction node.

    Rings are faces of the planar subdivision with at most
    ``max_cycle_arcs`` arcs, no repeated node and total length at most
    ``max_perimeter``.  Arcs that approached a collapsed ring are
    re-terminated at the ring's vertex centroid.  Rings that touch each
    other stay connected through a short connector arc, merged into one
    node when their centroids fall within the snap tolerance.
    """
    if max_perimeter <= 0 or not net.arcs:
        return net
    tol = net.snap_tolerance

    rings: List[List[Tuple[int, int]]] = []
    seen_arc_sets: Set[frozenset] = set()
    for face in _face_walk(net):
        if len(face) > max_cycle_arcs:
            continue
        arc_ids = [aid for aid, _ in face]
        arc_set = frozenset(arc_ids)
        if len(arc_set) != len(arc_ids) or arc_set in seen_arc_sets:
            continue
        nodes_seq = [net.arcs[aid].node_at(end) for aid, end in face]
        if len(set(nodes_seq)) != len(nodes_seq):
            continue
        perimeter = sum(net.arcs[aid].length for aid in arc_ids)
        if perimeter > max_perimeter:
            continue
        seen_arc_sets.add(arc_set)
        rings.append(face)
    if not rings:
        return net

    ring_arc_ids: Set[int] = set()
    ring_nodes: List[Set[int]] = []
    ring_centroids: List[Point] = []
    node_rings: Dict[int, List[int]] = {}
    for ri, face in enumerate(rings):
        members: Set[int] = set()
        sx = sy = 0.0
        count = 0
        for aid, end in face:
            ring_arc_ids.add(aid)
            arc = net.arcs[aid]
            members.add(arc.from_node)
            members.add(arc.to_node)
            pts = arc.geometry.points
            # skip the final vertex of each arc so ring joints count once
            for p in (pts[:-1] if end == 0 else pts[:0:-1]):
                sx += p.x
                sy += p.y
                count += 1
        ring_nodes.append(members)
        ring_centroids.append(Point(sx / count, sy / count))
        for nid in members:
            node_rings.setdefault(nid, []).append(ri)

    # rings sharing a node merge if their centroids nearly coincide
    parent = list(range(len(rings)))

    def find(i: int) -> int:
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    touching: Set[Tuple[int, int]] = set()
    for rlist in node_rings.values():
        for i in range(len(rlist)):
            for j in range(i + 1, len(rlist)):
                a, b = sorted((rlist[i], rlist[j]))
                touching.add((a, b))
    for a, b in sorted(touching):
        if dist(ring_centroids[a], ring_centroids[b]) <= tol:
            ra, rb = find(a), find(b)
            if ra != rb:
                parent[max(ra, rb)] = min(ra, rb)

    new_nodes: Dict[int, NetworkNode] = {}
    new_arcs: Dict[int, Arc] = {}
    node_map: Dict[int, int] = {}
    group_node: Dict[int, int] = {}

    def group_node_id(ri: int) -> int:
        g = find(ri)
        nid = group_node.get(g)
        if nid is None:
            nid = len(new_nodes)
            group_node[g] = nid
            new_nodes[nid] = NetworkNode(id=nid, location=ring_centroids[g])
        return nid

    for nid, node in net.nodes.items():
        rlist = node_rings.get(nid)
        if rlist is None:
            new_id = len(new_nodes)
            node_map[nid] = new_id
            new_nodes[new_id] = NetworkNode(id=new_id, location=node.location)
        else:
            # tangent point of several rings: attach to the smallest ring id
            node_map[nid] = group_node_id(min(rlist))

    def add_arc(u: int, v: int, pts: Sequence[Point]) -> None:
        line = Polyline.cleaned(pts, tol)
        if line is None:
            return
        aid = len(new_arcs)
        new_arcs[aid] = Arc(id=aid, from_node=u, to_node=v,
                            geometry=line, length=line.length())
        new_nodes[u].incident_arcs.add(aid)
        new_nodes[v].incident_arcs.add(aid)

    for arc in net.arcs.values():
        if arc.id in ring_arc_ids:
            continue
        u = node_map[arc.from_node]
        v = node_map[arc.to_node]
        pts = list(arc.geometry.points)
        pts[0] = new_nodes[u].location
        pts[-1] = new_nodes[v].location
        add_arc(u, v, pts)

    # connector between touching ring groups that stayed apart
    connected: Set[Tuple[int, int]] = set()
    for a, b in sorted(touching):
        ga, gb = find(a), find(b)
        if ga == gb:
            continue
        key = (min(ga, gb), max(ga, gb))
        if key in connected:
            continue
        connected.add(key)
        u = group_node_id(ga)
        v = group_node_id(gb)
        add_arc(u, v, [new_nodes[u].location, new_nodes[v].location])

    return StreetNetwork(new_nodes, new_arcs, snap_tolerance=tol,
                         skipped_degenerate=net.skipped_degenerate)
