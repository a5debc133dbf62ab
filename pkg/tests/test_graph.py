import itertools
import math

import numpy as np
import pytest

from axialmap import (
    AxialLine,
    ConnectivityGraph,
    Polyline,
    build_connectivity_graph,
    class_index,
    classify,
    generate_axial_map,
    generate_natural_streets,
    integration,
    jenks_breaks,
    planarize,
    segments_intersect,
)
from axialmap.graph import all_metrics, diamond_value
from conftest import grid_polylines, random_connected_graph


def floyd_warshall(n, edges):
    """independent all-pairs shortest paths oracle (min-plus, numpy)"""
    dm = np.full((n, n), np.inf)
    np.fill_diagonal(dm, 0.0)
    for u, v in edges:
        dm[u, v] = dm[v, u] = 1.0
    for k in range(n):
        dm = np.minimum(dm, dm[:, k, None] + dm[None, k, :])
    return dm


def oracle_metrics(dm, node, radius):
    row = dm[node]
    if radius is None:
        mask = np.isfinite(row)
    else:
        mask = np.isfinite(row) & (row <= radius)
    k = int(mask.sum())
    td = float(row[mask].sum())
    if k < 2:
        return k, None, None, None, None
    md = td / (k - 1)
    if k < 3:
        return k, td, md, None, None
    ra = 2.0 * (md - 1.0) / (k - 2.0)
    dk = 2.0 * (k * (math.log2((k + 2) / 3.0) - 1.0) + 1.0) / ((k - 1) * (k - 2))
    return k, td, md, ra, ra / dk


class TestConnectivityGraph:
    def test_grid_degrees(self):
        net = planarize(grid_polylines(5, 5))
        amap = generate_axial_map(net)
        g = build_connectivity_graph(amap)
        assert sorted(g.degree(n) for n in g.nodes) == [5] * 10

    def test_rectangular_grid_degrees(self):
        net = planarize(grid_polylines(8, 4))
        amap = generate_axial_map(net)
        g = build_connectivity_graph(amap)
        assert sorted(g.degree(n) for n in g.nodes) == sorted([4] * 8 + [8] * 4)

    def test_disjoint_parallel_lines(self):
        lines = [AxialLine(0, Polyline([(0, 0), (10, 0)]).points[0],
                           Polyline([(0, 0), (10, 0)]).points[1],
                           frozenset((0,)), Polyline([(0, 0), (10, 0)]).points),
                 AxialLine(1, Polyline([(0, 5), (10, 5)]).points[0],
                           Polyline([(0, 5), (10, 5)]).points[1],
                           frozenset((1,)), Polyline([(0, 5), (10, 5)]).points)]
        g = build_connectivity_graph(lines)
        assert len(g.edges) == 0
        assert g.degree(0) == 0

    def test_random_lines_against_pairwise_oracle(self):
        rng = np.random.default_rng(12)
        lines = []
        for k in range(30):
            x, y = rng.uniform(0, 500, size=2)
            ang = rng.uniform(0, math.pi)
            ln = rng.uniform(30, 400)
            pts = Polyline([(x, y), (x + ln * math.cos(ang), y + ln * math.sin(ang))]).points
            lines.append(AxialLine(k, pts[0], pts[1], frozenset((k,)), pts))
        g = build_connectivity_graph(lines, tolerance=0.01)
        expected = set()
        for i in range(len(lines)):
            for j in range(i + 1, len(lines)):
                if segments_intersect(lines[i].segment(), lines[j].segment(),
                                      0.01) is not None:
                    expected.add((i, j))
        assert set(g.edges) == expected

    def test_street_graph_shares_nodes(self):
        net = planarize(grid_polylines(3, 3))
        streets = generate_natural_streets(net)
        g = build_connectivity_graph(streets, net)
        assert len(g) == 6
        assert sorted(g.degree(n) for n in g.nodes) == [3] * 6

    def test_rejects_self_loops_and_duplicates(self):
        g = ConnectivityGraph([0, 1], [(0, 1), (1, 0), (0, 0)])
        assert g.edges == [(0, 1)]


class TestIntegration:
    def test_star_center_infinite_sentinel(self):
        edges = [(0, k) for k in range(1, 6)]
        g = ConnectivityGraph(range(6), edges)
        m = integration(g, 0, radius=None)
        assert m.total_depth == 5
        assert m.node_count_in_radius == 6
        assert m.mean_depth == 1.0
        assert m.ra == 0.0
        assert m.integration == math.inf
        assert m.connectivity == 5

    def test_path_graph_endpoint(self):
        g = ConnectivityGraph([0, 1, 2], [(0, 1), (1, 2)])
        m = integration(g, 0, radius=None)
        assert m.total_depth == 3
        assert m.node_count_in_radius == 3
        assert m.mean_depth == pytest.approx(1.5)
        assert m.ra == pytest.approx(1.0)
        assert m.integration == pytest.approx(1.0 / (1.0 / diamond_value(3)))

    def test_isolated_node(self):
        g = ConnectivityGraph([0, 1], [])
        m = integration(g, 0)
        assert m.connectivity == 0
        assert m.total_depth is None
        assert m.integration is None

    def test_two_node_component_undefined(self):
        g = ConnectivityGraph([0, 1], [(0, 1)])
        m = integration(g, 0)
        assert m.node_count_in_radius == 2
        assert m.integration is None

    def test_radius_restricts_reach(self):
        # path of 6: radius 3 sees 4 nodes from an endpoint
        g = ConnectivityGraph(range(6), [(i, i + 1) for i in range(5)])
        m = integration(g, 0, radius=3)
        assert m.node_count_in_radius == 4
        assert m.total_depth == 1 + 2 + 3

    def test_random_graphs_against_floyd_warshall(self):
        rng = np.random.default_rng(8)
        for _ in range(100):
            n = int(rng.integers(4, 51))
            edges = random_connected_graph(rng, n, extra_edges=int(rng.integers(0, n)))
            g = ConnectivityGraph(range(n), edges)
            dm = floyd_warshall(n, edges)
            for radius in (3, None):
                metrics = all_metrics(g, radius=radius)
                for node in range(n):
                    k, td, md, ra, rra = oracle_metrics(dm, node, radius)
                    m = metrics[node]
                    assert m.node_count_in_radius == k
                    if td is None:
                        assert m.total_depth is None
                        continue
                    assert m.total_depth == pytest.approx(td, abs=1e-9)
                    assert m.mean_depth == pytest.approx(md, abs=1e-9)
                    if ra is None:
                        assert m.ra is None
                    else:
                        assert m.ra == pytest.approx(ra, abs=1e-9)
                        assert m.rra == pytest.approx(rra, abs=1e-9)

    def test_isomorphism_invariance(self):
        rng = np.random.default_rng(21)
        n = 20
        edges = random_connected_graph(rng, n, extra_edges=12)
        g1 = ConnectivityGraph(range(n), edges)
        perm = list(rng.permutation(n))
        g2 = ConnectivityGraph(range(n), [(perm[u], perm[v]) for u, v in edges])
        for node in range(n):
            m1 = integration(g1, node, radius=3)
            m2 = integration(g2, perm[node], radius=3)
            assert m1.integration == pytest.approx(m2.integration, rel=1e-12)

    def test_cycle_symmetry(self):
        for n in (5, 8, 13):
            g = ConnectivityGraph(range(n), [(i, (i + 1) % n) for i in range(n)])
            vals = [integration(g, i, radius=None).integration for i in range(n)]
            assert max(vals) - min(vals) < 1e-12


def sse_of(values):
    m = sum(values) / len(values)
    return sum((v - m) ** 2 for v in values)


def exhaustive_best_sse(values, k):
    """try every split of the sorted multiset into k contiguous classes"""
    vals = sorted(values)
    n = len(vals)
    best = math.inf
    for cuts in itertools.combinations(range(1, n), k - 1):
        idx = [0] + list(cuts) + [n]
        total = sum(sse_of(vals[a:b]) for a, b in zip(idx, idx[1:]))
        best = min(best, total)
    return best


def breaks_sse(values, breaks):
    vals = sorted(values)
    classes = {}
    for v in vals:
        classes.setdefault(class_index(v, breaks), []).append(v)
    return sum(sse_of(group) for group in classes.values())


class TestJenksBreaks:
    def test_two_clusters(self):
        assert jenks_breaks([1, 2, 3, 10, 11, 12], 2) == [3]

    def test_constant_list_single_class(self):
        assert jenks_breaks([4.0] * 9, 3) == []

    def test_k_equals_n_zero_variance(self):
        values = [1.0, 2.0, 5.0, 9.0]
        breaks = jenks_breaks(values, 4)
        assert breaks == [1.0, 2.0, 5.0]
        assert breaks_sse(values, breaks) == 0.0

    def test_matches_exhaustive_enumeration(self):
        rng = np.random.default_rng(64)
        for _ in range(200):
            n = int(rng.integers(2, 13))
            k = int(rng.integers(1, 5))
            values = [round(float(v), 3) for v in rng.uniform(0, 100, size=n)]
            k_eff = min(k, len(set(values)))
            breaks = jenks_breaks(values, k)
            assert len(breaks) == k_eff - 1
            got = breaks_sse(values, breaks)
            best = exhaustive_best_sse(values, k_eff)
            assert got == pytest.approx(best, abs=1e-9)

    def test_matches_quadratic_dp_on_larger_inputs(self):
        # second oracle: plain O(k n^2) dynamic program
        def quadratic_dp(vals, k):
            vals = sorted(vals)
            n = len(vals)
            pre = [0.0]
            pre2 = [0.0]
            for v in vals:
                pre.append(pre[-1] + v)
                pre2.append(pre2[-1] + v * v)

            def cost(a, b):
                w = b - a
                s = pre[b] - pre[a]
                return (pre2[b] - pre2[a]) - s * s / w

            dp = [[math.inf] * (n + 1) for _ in range(k + 1)]
            dp[0][0] = 0.0
            for c in range(1, k + 1):
                for i in range(c, n + 1):
                    dp[c][i] = min(dp[c - 1][j] + cost(j, i)
                                   for j in range(c - 1, i))
            return dp[k][n]

        rng = np.random.default_rng(65)
        for _ in range(20):
            n = int(rng.integers(20, 60))
            k = int(rng.integers(2, 7))
            values = [float(v) for v in rng.normal(50, 20, size=n)]
            breaks = jenks_breaks(values, k)
            assert breaks_sse(values, breaks) == pytest.approx(
                quadratic_dp(values, k), abs=1e-6)

    def test_reduced_class_count_warning(self, caplog):
        with caplog.at_level("WARNING"):
            breaks = jenks_breaks([1.0, 1.0, 2.0], 5)
        assert len(breaks) == 1
        assert any("reduced" in r.message for r in caplog.records)


class TestClassify:
    def test_indices_within_range(self):
        values = list(np.random.default_rng(3).uniform(0, 10, size=40))
        breaks, indices = classify(values, 7)
        assert len(breaks) == 6
        assert all(0 <= i <= 6 for i in indices)

    def test_none_stays_none_and_inf_tops(self):
        values = [1.0, 2.0, None, math.inf, 3.0]
        breaks, indices = classify(values, 2)
        assert indices[2] is None
        assert indices[3] == len(breaks)

    def test_class_index_upper_bound_inclusive(self):
        assert class_index(3.0, [3.0]) == 0
        assert class_index(3.0001, [3.0]) == 1
