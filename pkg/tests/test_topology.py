import math

import numpy as np
import pytest

from axialmap import (
    Point,
    Polyline,
    detect_and_collapse_roundabouts,
    planarize,
    segments_intersect,
)
from conftest import regular_ring


def degree_multiset(net):
    return sorted(node.degree for node in net.nodes.values())


class TestPlanarize:
    def test_plus_sign_shared_vertex(self):
        lines = [Polyline([(-1, 0), (0, 0), (1, 0)]),
                 Polyline([(0, -1), (0, 0), (0, 1)])]
        net = planarize(lines)
        assert len(net.nodes) == 5
        assert len(net.arcs) == 4
        assert degree_multiset(net) == [1, 1, 1, 1, 4]

    def test_crossing_without_shared_vertex_keeps_lines_apart(self):
        lines = [Polyline([(-1, 0), (1, 0)]), Polyline([(0, -1), (0, 1)])]
        net = planarize(lines, split_at_crossings=False)
        assert len(net.nodes) == 4
        assert len(net.arcs) == 2

    def test_crossing_split_when_enabled(self):
        lines = [Polyline([(-1, 0), (1, 0)]), Polyline([(0, -1), (0, 1)])]
        net = planarize(lines, split_at_crossings=True)
        assert len(net.nodes) == 5
        assert len(net.arcs) == 4
        assert degree_multiset(net) == [1, 1, 1, 1, 4]

    def test_empty_input(self):
        net = planarize([])
        assert len(net.nodes) == 0
        assert len(net.arcs) == 0

    def test_degenerate_polyline_skipped(self):
        lines = [Polyline([(0, 0), (0.001, 0.0)]), Polyline([(0, 0), (5, 0)])]
        net = planarize(lines, snap_tolerance=0.01)
        assert net.skipped_degenerate == 1
        assert len(net.arcs) == 1

    def test_duplicate_lines_deduplicated(self):
        lines = [Polyline([(0, 0), (5, 0)]), Polyline([(5, 0), (0, 0)]),
                 Polyline([(0, 0), (5, 0)])]
        net = planarize(lines)
        assert len(net.arcs) == 1

    def test_self_revisit_becomes_junction(self):
        # figure-eight: the middle point is visited twice by one line
        lines = [Polyline([(0, 0), (1, 1), (2, 0), (1, -1), (0, 0),
                           (-1, 1), (-2, 0), (-1, -1), (0, 0)])]
        net = planarize(lines)
        assert len(net.nodes) == 1
        assert len(net.arcs) == 2
        center = net.nodes[0]
        assert center.location == Point(0.0, 0.0)

    def test_random_soup_against_pairwise_oracle(self):
        # short random segments so crossings stay isolated relative to the
        # snap tolerance (the guard below documents that regime)
        rng = np.random.default_rng(123)
        segs = []
        for _ in range(200):
            cx, cy = rng.uniform(0, 1000, size=2)
            ang = rng.uniform(0, math.pi)
            half = rng.uniform(15, 60)
            dx, dy = half * math.cos(ang), half * math.sin(ang)
            segs.append(((cx - dx, cy - dy), (cx + dx, cy + dy)))
        net = planarize([Polyline([a, b]) for a, b in segs],
                        split_at_crossings=True)

        # oracle: exhaustive O(n^2) pairwise splitter
        cut_points = [[] for _ in segs]
        all_cuts = []
        for i in range(len(segs)):
            for j in range(i + 1, len(segs)):
                p = segments_intersect(segs[i], segs[j], tolerance=0.01)
                if p is None:
                    continue
                cut_points[i].append(p)
                cut_points[j].append(p)
                all_cuts.append(p)
        assert all_cuts, "fixture produced no crossings"

        def key(p):
            return (round(p[0], 6), round(p[1], 6))

        # regime guard: no two junctions within 10x the snap tolerance
        endpoints = [p for seg in segs for p in seg]
        nodes_oracle = sorted(set(key(p) for p in all_cuts + endpoints))
        min_sep = min(math.dist(a, b)
                      for i, a in enumerate(nodes_oracle)
                      for b in nodes_oracle[i + 1:])
        assert min_sep > 0.1

        oracle_arcs = 0
        degree = {}
        for (a, b), cuts in zip(segs, cut_points):
            along = sorted(set(key(p) for p in cuts),
                           key=lambda q: (q[0] - a[0]) ** 2 + (q[1] - a[1]) ** 2)
            chain = [key(a)] + [q for q in along if q != key(a) and q != key(b)] + [key(b)]
            for u, v in zip(chain, chain[1:]):
                oracle_arcs += 1
                degree[u] = degree.get(u, 0) + 1
                degree[v] = degree.get(v, 0) + 1
        assert len(net.arcs) == oracle_arcs
        assert degree_multiset(net) == sorted(degree.values())

    def test_idempotent(self):
        rng = np.random.default_rng(9)
        lines = []
        for _ in range(30):
            x0, y0 = rng.uniform(0, 500, size=2)
            x1, y1 = rng.uniform(0, 500, size=2)
            lines.append(Polyline([(x0, y0), ((x0 + x1) / 2, y0 + 10), (x1, y1)]))
        net1 = planarize(lines, split_at_crossings=True)
        net2 = planarize([a.geometry for a in net1.arcs.values()],
                         split_at_crossings=True)
        assert len(net2.nodes) == len(net1.nodes)
        assert len(net2.arcs) == len(net1.arcs)
        assert degree_multiset(net2) == degree_multiset(net1)

    def test_total_length_conserved(self):
        rng = np.random.default_rng(17)
        lines = []
        for _ in range(40):
            x0, y0, x1, y1 = rng.uniform(0, 800, size=4)
            lines.append(Polyline([(x0, y0), (x1, y1)]))
        total_in = sum(l.length() for l in lines)
        net = planarize(lines, split_at_crossings=True)
        assert net.total_length() == pytest.approx(total_in, abs=0.01 * len(net.arcs))


def octagon_with_approaches():
    ring = regular_ring(0.0, 0.0, perimeter=60.0, n_vertices=8)
    lines = [Polyline(ring)]
    for k in (0, 2, 4, 6):
        v = ring[k]
        scale = 50.0 / math.hypot(v.x, v.y)
        lines.append(Polyline([v, (v.x * (1 + scale), v.y * (1 + scale))]))
    return lines


class TestRoundaboutCollapse:
    def test_octagon_collapses_to_degree_4_node(self):
        net = planarize(octagon_with_approaches())
        collapsed = detect_and_collapse_roundabouts(net, max_perimeter=120.0)
        assert len(collapsed.arcs) == 4
        degrees = degree_multiset(collapsed)
        assert degrees == [1, 1, 1, 1, 4]
        center = [n for n in collapsed.nodes.values() if n.degree == 4][0]
        assert math.hypot(center.location.x, center.location.y) < 1e-6

    def test_large_ring_untouched(self):
        ring = regular_ring(0.0, 0.0, perimeter=5000.0, n_vertices=64)
        net = planarize([Polyline(ring)])
        collapsed = detect_and_collapse_roundabouts(net, max_perimeter=120.0)
        assert len(collapsed.arcs) == len(net.arcs)
        assert len(collapsed.nodes) == len(net.nodes)
        assert collapsed.total_length() == pytest.approx(net.total_length())

    def test_tangent_rings_collapse_to_two_connected_nodes(self):
        # 16-arc fixture: two octagons sharing exactly one vertex
        side_radius = (60.0 / 8) / (2 * math.sin(math.pi / 8))
        ring_a = regular_ring(0.0, 0.0, perimeter=60.0, n_vertices=8)
        ring_b = regular_ring(2 * side_radius, 0.0, perimeter=60.0, n_vertices=8)
        lines = []
        for ring in (ring_a, ring_b):
            for u, v in zip(ring, ring[1:]):
                lines.append(Polyline([u, v]))
        net = planarize(lines)
        assert len(net.arcs) == 16
        assert len(net.nodes) == 15
        assert net.component_count() == 1
        collapsed = detect_and_collapse_roundabouts(net, max_perimeter=120.0)
        assert len(collapsed.nodes) == 2
        assert len(collapsed.arcs) == 1
        assert collapsed.component_count() == 1
        locs = sorted((n.location.x, n.location.y) for n in collapsed.nodes.values())
        assert locs[0] == pytest.approx((0.0, 0.0), abs=1e-6)
        assert locs[1] == pytest.approx((2 * side_radius, 0.0), abs=1e-6)

    def test_node_count_grows_at_most_by_rings_found(self):
        net = planarize(octagon_with_approaches())
        collapsed = detect_and_collapse_roundabouts(net, max_perimeter=120.0)
        assert len(collapsed.nodes) <= len(net.nodes) + 1

    def test_collapse_preserves_connectivity(self):
        net = planarize(octagon_with_approaches())
        before = net.component_count()
        collapsed = detect_and_collapse_roundabouts(net, max_perimeter=120.0)
        assert collapsed.component_count() == before

    def test_two_arc_lens_collapses(self):
        # parallel arcs between the same node pair form a 2-arc ring
        lines = [Polyline([(0, 0), (15, 8), (30, 0)]),
                 Polyline([(0, 0), (15, -8), (30, 0)]),
                 Polyline([(-40, 0), (0, 0)]),
                 Polyline([(30, 0), (70, 0)])]
        net = planarize(lines)
        collapsed = detect_and_collapse_roundabouts(net, max_perimeter=120.0)
        assert degree_multiset(collapsed) == [1, 1, 2]
        assert collapsed.component_count() == 1

    def test_disabled_when_nonpositive_perimeter(self):
        net = planarize(octagon_with_approaches())
        assert detect_and_collapse_roundabouts(net, max_perimeter=0.0) is net
