"""Shared fixtures: deterministic street-network generators and the
acceptance-criteria summary printed after the run."""

from __future__ import annotations

import math
from typing import List, Tuple

import numpy as np

from axialmap import Point, Polyline

_ACCEPTANCE: List[Tuple[int, str, bool, str]] = []


def record_criterion(number: int, name: str, passed: bool, detail: str = "") -> None:
    _ACCEPTANCE.append((number, name, passed, detail))


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _ACCEPTANCE:
        return
    terminalreporter.write_sep("=", "acceptance criteria")
    for number, name, passed, detail in sorted(_ACCEPTANCE):
        status = "PASS" if passed else "FAIL"
        line = "criterion %02d %-28s %s" % (number, name + ":", status)
        if detail:
            line += "  (%s)" % detail
        terminalreporter.write_line(line)


# ---------------------------------------------------------------------------
# network generators


def grid_polylines(n_horizontal: int, n_vertical: int,
                   spacing: float = 100.0) -> List[Polyline]:
    """Perfectly straight crossing streets sharing junction vertices."""
    lines = []
    for i in range(n_horizontal):
        lines.append(Polyline([(j * spacing, i * spacing)
                               for j in range(n_vertical)]))
    for j in range(n_vertical):
        lines.append(Polyline([(j * spacing, i * spacing)
                               for i in range(n_horizontal)]))
    return lines


def wiggly_polyline(rng: np.random.Generator, n_points: int,
                    origin: Tuple[float, float] = (0.0, 0.0),
                    step: float = 25.0, max_turn_deg: float = 20.0,
                    heading_deg: float = None) -> Polyline:
    """Random-walk street: fixed step, bounded random heading change."""
    heading = math.radians(rng.uniform(0, 360) if heading_deg is None
                           else heading_deg)
    x, y = origin
    pts = [(x, y)]
    for _ in range(n_points - 1):
        heading += math.radians(rng.uniform(-max_turn_deg, max_turn_deg))
        x += step * math.cos(heading)
        y += step * math.sin(heading)
        pts.append((x, y))
    return Polyline(pts)


def regular_ring(cx: float, cy: float, perimeter: float,
                 n_vertices: int) -> List[Point]:
    """Closed regular polygon (first point repeated at the end)."""
    # circumradius of a regular n-gon with the given perimeter
    side = perimeter / n_vertices
    radius = side / (2.0 * math.sin(math.pi / n_vertices))
    pts = [Point(cx + radius * math.cos(2 * math.pi * k / n_vertices),
                 cy + radius * math.sin(2 * math.pi * k / n_vertices))
           for k in range(n_vertices)]
    pts.append(pts[0])
    return pts


def jittered_city(rng: np.random.Generator, rows: int, cols: int,
                  spacing: float = 100.0, jitter: float = 8.0,
                  diagonals: bool = True) -> List[Polyline]:
    """Perturbed grid plus diagonals; junction coordinates are shared so
    planarization recovers the full topology."""
    jx = rng.uniform(-jitter, jitter, size=(rows, cols))
    jy = rng.uniform(-jitter, jitter, size=(rows, cols))
    nodes = [[(c * spacing + jx[r, c], r * spacing + jy[r, c])
              for c in range(cols)] for r in range(rows)]
    lines = []
    for r in range(rows):
        lines.append(Polyline([nodes[r][c] for c in range(cols)]))
    for c in range(cols):
        lines.append(Polyline([nodes[r][c] for r in range(rows)]))
    if diagonals:
        k = min(rows, cols)
        lines.append(Polyline([nodes[i][i] for i in range(k)]))
        lines.append(Polyline([nodes[i][cols - 1 - i] for i in range(k)]))
    return lines


def random_connected_graph(rng: np.random.Generator, n_nodes: int,
                           extra_edges: int) -> List[Tuple[int, int]]:
    """Random spanning tree plus extra random edges (guaranteed connected)."""
    edges = set()
    order = list(rng.permutation(n_nodes))
    for i in range(1, n_nodes):
        a = order[i]
        b = order[int(rng.integers(0, i))]
        edges.add((min(a, b), max(a, b)))
    attempts = 0
    while len(edges) < n_nodes - 1 + extra_edges and attempts < 50 * extra_edges:
        a, b = int(rng.integers(0, n_nodes)), int(rng.integers(0, n_nodes))
        attempts += 1
        if a != b:
            edges.add((min(a, b), max(a, b)))
    return sorted(edges)
