"""Staged pipeline from raw polylines to an attributed axial map, with
per-stage wall-clock timing for the run report."""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import List, Optional, Sequence

from .axial import (
    AxialLine,
    AxialMap,
    ChopThresholds,
    ThresholdsUnavailableError,
    chop,
    compute_thresholds,
    generate_axial_map,
    merge_collinear,
)
from .geometry import Polyline
from .io import PipelineConfig
from .streets import JoinPrinciple, NaturalStreet, generate_natural_streets
from .topology import StreetNetwork, detect_and_collapse_roundabouts, planarize


@dataclass
class StageTiming:
    name: str
    seconds: float
    detail: str = ""


@dataclass
class PipelineResult:
    network: Optional[StreetNetwork] = None
    streets: Optional[List[NaturalStreet]] = None
    thresholds: Optional[ChopThresholds] = None
    axial_map: Optional[AxialMap] = None
    timings: List[StageTiming] = field(default_factory=list)

    def report_lines(self) -> List[str]:
        out = []
        for t in self.timings:
            detail = " %s" % t.detail if t.detail else ""
            out.append("stage %-16s%s (%.3f s)" % (t.name + ":", detail, t.seconds))
        return out


class _Clock:
    def __init__(self, result: PipelineResult):
        self.result = result
        self._t0 = time.perf_counter()

    def stage(self, name: str, detail: str = "") -> None:
        t1 = time.perf_counter()
        self.result.timings.append(StageTiming(name, t1 - self._t0, detail))
        self._t0 = t1


def build_network(lines: Sequence[Polyline], config: PipelineConfig,
                  result: Optional[PipelineResult] = None) -> PipelineResult:
    result = result or PipelineResult()
    clock = _Clock(result)
    net = planarize(lines, snap_tolerance=config.snap_tolerance_m,
                    split_at_crossings=config.split_at_crossings)
    clock.stage("planarize", "%d arcs, %d nodes" % (len(net.arcs), len(net.nodes)))
    if config.roundabout_max_perimeter_m > 0:
        before = len(net.nodes)
        net = detect_and_collapse_roundabouts(
            net, max_perimeter=config.roundabout_max_perimeter_m)
        clock.stage("roundabouts", "%d arcs, %d nodes" % (len(net.arcs), len(net.nodes)))
    result.network = net
    return result


def build_streets(lines: Sequence[Polyline], config: PipelineConfig,
                  result: Optional[PipelineResult] = None) -> PipelineResult:
    result = build_network(lines, config, result)
    clock = _Clock(result)
    principle = JoinPrinciple.parse(config.join_principle)
    streets = generate_natural_streets(result.network, principle,
                                       config.join_threshold_degrees)
    clock.stage("natural-streets", "%d streets" % len(streets))
    result.streets = streets
    return result


def build_axial_map(lines: Sequence[Polyline], config: PipelineConfig,
                    result: Optional[PipelineResult] = None) -> PipelineResult:
    result = build_streets(lines, config, result)
    clock = _Clock(result)
    eps = config.snap_tolerance_m
    try:
        thresholds = compute_thresholds(result.streets, eps=eps,
                                        head_ratio_fraction=config.head_ratio_fraction)
    except ThresholdsUnavailableError:
        thresholds = None
    if thresholds is None:
        clock.stage("thresholds", "unavailable (straight population)")
        result.axial_map = generate_axial_map(
            result.network, streets=result.streets,
            head_ratio_fraction=config.head_ratio_fraction)
        clock.stage("chop", "%d axial lines (one per street)" % len(result.axial_map))
        return result
    result.thresholds = thresholds
    clock.stage("thresholds",
                "mean(x)=%.3f m, mean(x/d)=%.4f, min merge angle=%.3f deg"
                % (thresholds.mean_x, thresholds.mean_ratio,
                   thresholds.min_merge_angle))
    chopped: List[AxialLine] = []
    for s in result.streets:
        chopped.extend(chop(s, thresholds, eps=eps))
    clock.stage("chop", "%d axial lines" % len(chopped))
    merged = merge_collinear(chopped, thresholds.min_merge_angle, tolerance=eps)
    clock.stage("merge", "%d axial lines" % len(merged))
    result.axial_map = AxialMap(
        lines=merged, thresholds=thresholds,
        provenance="network(nodes=%d, arcs=%d)"
                   % (len(result.network.nodes), len(result.network.arcs)))
    return result
