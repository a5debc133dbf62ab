"""Joining network arcs into natural streets by good continuity.

At every junction, arc ends are paired when they continue each other
smoothly enough (deflection below a threshold angle, 45 degrees by
default).  Maximal chains of paired arcs form the streets; every arc
belongs to exactly one street.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Set, Tuple

from .geometry import (
    BendMeasure,
    Point,
    Polyline,
    direction_angle_between,
    dist,
    measure_bend,
)
from .topology import StreetNetwork

DEFAULT_JOIN_THRESHOLD = 45.0


class StreetChainError(RuntimeError):
    """A street's arc chain lost continuity (internal invariant breach)."""


class JoinPrinciple(enum.Enum):
    EVERY_BEST_FIT = "every-best-fit"
    SELF_BEST_FIT = "self-best-fit"
    SELF_FIT = "self-fit"

    @classmethod
    def parse(cls, label: str) -> "JoinPrinciple":
        for member in cls:
            if member.value == label:
                return member
        raise ValueError("unknown join principle %r (expected one of %s)"
                         % (label, ", ".join(m.value for m in cls)))


@dataclass
class NaturalStreet:
    id: int
    arc_chain: Tuple[int, ...]
    geometry: Polyline
    closed: bool = False
    _bend: Optional[BendMeasure] = field(default=None, repr=False)

    def bend(self, eps: float = 0.01) -> BendMeasure:
        if self._bend is None:
            object.__setattr__(self, "_bend", measure_bend(self.geometry, eps=eps))
        return self._bend

    @property
    def length(self) -> float:
        return self.geometry.length()


def _port_deflection(net: StreetNetwork, a: Tuple[int, int], b: Tuple[int, int]) -> float:
    """Deflection when continuing through a node from arc-end a to arc-end b.

    Both ports leave the same node; continuation means the leave
    directions oppose, so the deflection is 180 minus the angle between
    them.
    """
    va = net.arcs[a[0]].direction_leaving(a[1])
    vb = net.arcs[b[0]].direction_leaving(b[1])
    return 180.0 - direction_angle_between(va, vb)


def _pair_every_best_fit(net: StreetNetwork, threshold: float) -> Dict[Tuple[int, int], Tuple[int, int]]:
    """Greedy global pairing of arc ends at every node, best angles first."""
    matches: Dict[Tuple[int, int], Tuple[int, int]] = {}
    for nid in sorted(net.nodes):
        ports: List[Tuple[int, int]] = []
        for aid in sorted(net.nodes[nid].incident_arcs):
            arc = net.arcs[aid]
            if arc.from_node == nid:
                ports.append((aid, 0))
            if arc.to_node == nid:
                ports.append((aid, 1))
        if len(ports) < 2:
            continue
        candidates = []
        for i in range(len(ports)):
            for j in range(i + 1, len(ports)):
                ang = _port_deflection(net, ports[i], ports[j])
                if ang < threshold:
                    a, b = ports[i], ports[j]
                    candidates.append((ang, min(a[0], b[0]), max(a[0], b[0]), a, b))
        candidates.sort(key=lambda c: c[:3] + (c[3][1], c[4][1]))
        used: Set[Tuple[int, int]] = set()
        for _, _, _, a, b in candidates:
            if a in used or b in used:
                continue
            used.add(a)
            used.add(b)
            matches[a] = b
            matches[b] = a
    return matches


def _trace_chains(net: StreetNetwork,
                  matches: Dict[Tuple[int, int], Tuple[int, int]]) -> List[List[Tuple[int, bool]]]:
    """Walk continuation matches into maximal chains of (arc_id, reversed)."""
    chains: List[List[Tuple[int, bool]]] = []
    assigned: Set[int] = set()
    for start in sorted(net.arcs):
        if start in assigned:
            continue
        chain: List[Tuple[int, bool]] = [(start, False)]
        assigned.add(start)
        closed = False
        # extend forward from the to-side
        port = (start, 1)
        while True:
            nxt = matches.get(port)
            if nxt is None:
                break
            aid, end = nxt
            if aid in assigned:
                closed = aid == start
                break
            assigned.add(aid)
            chain.append((aid, end == 1))
            port = (aid, 1 - end)
        if not closed:
            # extend backward from the from-side
            port = (start, 0)
            while True:
                nxt = matches.get(port)
                if nxt is None:
                    break
                aid, end = nxt
                if aid in assigned:
                    break
                assigned.add(aid)
                chain.insert(0, (aid, end == 0))
                port = (aid, 1 - end)
        chains.append(chain)
    return chains


def _grow_seeded(net: StreetNetwork, threshold: float,
                 best: bool) -> List[List[Tuple[int, bool]]]:
    """Sequential street growth from seeds in descending length order.

    ``best`` picks the smallest-angle continuation at each step; otherwise
    the first acceptable candidate in arc-id order wins.
    """
    order = sorted(net.arcs, key=lambda aid: (-net.arcs[aid].length, aid))
    assigned: Set[int] = set()
    chains: List[List[Tuple[int, bool]]] = []
    for seed in order:
        if seed in assigned:
            continue
        assigned.add(seed)
        chain: List[Tuple[int, bool]] = [(seed, False)]
        for forward in (True, False):
            while True:
                aid, rev = chain[-1] if forward else chain[0]
                arc = net.arcs[aid]
                if forward:
                    end = 0 if rev else 1
                else:
                    end = 1 if rev else 0
                nid = arc.node_at(end)
                incoming = (aid, end)
                cands = []
                for cid in sorted(net.nodes[nid].incident_arcs):
                    if cid in assigned:
                        continue
                    carc = net.arcs[cid]
                    for cend in (0, 1):
                        if carc.node_at(cend) != nid:
                            continue
                        ang = _port_deflection(net, incoming, (cid, cend))
                        if ang < threshold:
                            cands.append((ang, cid, cend))
                if not cands:
                    break
                if best:
                    ang, cid, cend = min(cands)
                else:
                    ang, cid, cend = min(cands, key=lambda c: (c[1], c[2]))
                assigned.add(cid)
                if forward:
                    chain.append((cid, cend == 1))
                else:
                    chain.insert(0, (cid, cend == 0))
        chains.append(chain)
    return chains


def _chain_geometry(net: StreetNetwork, chain: Sequence[Tuple[int, bool]],
                    tol: float) -> Polyline:
    pts: List[Point] = []
    for aid, rev in chain:
        geom = net.arcs[aid].geometry.points
        if rev:
            geom = geom[::-1]
        if pts:
            if dist(pts[-1], geom[0]) > tol:
                raise StreetChainError(
                    "chain discontinuity at arc %d: %r vs %r" % (aid, pts[-1], geom[0]))
            pts.extend(geom[1:])
        else:
            pts.extend(geom)
    return Polyline(pts)


def street_geometry(net: StreetNetwork, chain: Sequence[Tuple[int, bool]]) -> Polyline:
    """Concatenated geometry of an oriented arc chain."""
    return _chain_geometry(net, chain, net.snap_tolerance)


def generate_natural_streets(net: StreetNetwork,
                             principle: JoinPrinciple = JoinPrinciple.EVERY_BEST_FIT,
                             threshold: float = DEFAULT_JOIN_THRESHOLD) -> List[NaturalStreet]:
    """Partition the network's arcs into natural streets.

    Under every-best-fit, arc-end pairs at each node are accepted globally
    in ascending angle order (ties by arc-id pair); the seeded principles
    grow one street at a time from the longest unassigned arc.
    """
    if not (0.0 < threshold < 180.0):
        raise ValueError("join threshold must be in (0, 180), got %r" % threshold)
    if principle is JoinPrinciple.EVERY_BEST_FIT:
        matches = _pair_every_best_fit(net, threshold)
        chains = _trace_chains(net, matches)
    elif principle is JoinPrinciple.SELF_BEST_FIT:
        chains = _grow_seeded(net, threshold, best=True)
    else:
        chains = _grow_seeded(net, threshold, best=False)

    tol = net.snap_tolerance
    streets: List[NaturalStreet] = []
    for chain in chains:
        geom = _chain_geometry(net, chain, tol)
        closed = dist(geom.points[0], geom.points[-1]) <= tol and len(geom) > 2
        streets.append(NaturalStreet(
            id=len(streets),
            arc_chain=tuple(aid for aid, _ in chain),
            geometry=geom,
            closed=closed,
        ))
    return streets
