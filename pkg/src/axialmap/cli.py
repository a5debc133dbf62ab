"""Command-line interface.

Subcommands cover each pipeline stage: ``topology`` (network summary),
``streets`` (natural streets with bend report), ``axial`` (full axial-map
export), ``metrics`` (connectivity graph, integration and class breaks),
``correlate`` (gate flows against integration) and ``distfit`` (lognormal
report of the bend statistics).  Every run prints a stage report to
standard error.  Exit codes: 0 success, 1 usage, 2 input error,
3 internal invariant breach.
"""

from __future__ import annotations

import argparse
import math
import sys
from dataclasses import replace
from typing import Dict, List, Optional

from . import __version__
from .graph import all_metrics, build_connectivity_graph, classify
from .io import (
    InputDataError,
    PipelineConfig,
    export_map,
    load_config,
    load_gates,
    read_lines,
    write_feature_collection,
    write_table,
)
from .pipeline import PipelineResult, build_axial_map, build_network, build_streets
from .stats import (
    StatsError,
    assign_gates,
    correlation_t_test,
    fit_lognormal,
    head_tail_split,
    r_squared,
)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_INPUT = 2
EXIT_INTERNAL = 3


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(message)


def _add_config_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", metavar="FILE",
                   help="plain key=value file with pipeline settings")
    p.add_argument("--join-principle",
                   choices=["every-best-fit", "self-best-fit", "self-fit"])
    p.add_argument("--join-threshold", type=float, metavar="DEG",
                   help="terminate joining at this deflection angle (default 45)")
    p.add_argument("--head-ratio-fraction", type=float, metavar="F",
                   help="fraction of mean(x/d) used by the big-offset chop rule "
                        "(default 0.10)")
    p.add_argument("--roundabout-max-perimeter", type=float, metavar="M",
                   help="collapse rings up to this perimeter; 0 disables "
                        "(default 120)")
    p.add_argument("--snap-tolerance", type=float, metavar="M",
                   help="coordinate snap tolerance in meters (default 0.01)")
    p.add_argument("--split-at-crossings", action="store_true", default=None,
                   help="also split lines at pure geometric crossings")
    p.add_argument("--integration-radius", type=int, metavar="STEPS",
                   help="topological radius for local integration (default 3)")
    p.add_argument("--class-count", type=int, metavar="K",
                   help="number of natural-breaks classes (default 7)")
    p.add_argument("--projection", choices=["auto", "geographic", "meters"],
                   help="coordinate interpretation of the input (default auto)")


_FLAG_TO_FIELD = {
    "join_principle": "join_principle",
    "join_threshold": "join_threshold_degrees",
    "head_ratio_fraction": "head_ratio_fraction",
    "roundabout_max_perimeter": "roundabout_max_perimeter_m",
    "snap_tolerance": "snap_tolerance_m",
    "split_at_crossings": "split_at_crossings",
    "integration_radius": "integration_radius",
    "class_count": "class_count",
    "projection": "projection",
}


def _resolve_config(args: argparse.Namespace) -> PipelineConfig:
    mapping: Dict[str, str] = {}
    if getattr(args, "config", None):
        mapping = load_config(args.config)
    try:
        config = PipelineConfig.from_mapping(mapping)
        overrides = {}
        for flag, field_name in _FLAG_TO_FIELD.items():
            value = getattr(args, flag, None)
            if value is not None:
                overrides[field_name] = value
        if overrides:
            config = replace(config, **overrides)
    except ValueError as exc:
        raise _UsageError(str(exc)) from exc
    return config


def _print_report(result: PipelineResult, ingest=None) -> None:
    if ingest is not None:
        detail = "%d polylines" % len(ingest.lines)
        if ingest.projected:
            detail += ", projected about (%.5f, %.5f)" % ingest.origin
        if ingest.skipped_features:
            detail += ", %d feature(s) skipped" % ingest.skipped_features
        print("[axialmap] ingest: %s" % detail, file=sys.stderr)
    for line in result.report_lines():
        print("[axialmap] %s" % line, file=sys.stderr)


def _figure_path(args: argparse.Namespace) -> Optional[str]:
    if getattr(args, "no_figure", False):
        return None
    if getattr(args, "figure", None):
        return args.figure
    output = getattr(args, "output", None)
    if output:
        stem = output.rsplit(".", 1)[0] if "." in output else output
        return stem + ".png"
    return None


def _metrics_for(units, net, config: PipelineConfig):
    graph = build_connectivity_graph(units, net, tolerance=config.snap_tolerance_m)
    local = all_metrics(graph, radius=config.integration_radius)
    global_ = all_metrics(graph, radius=None)
    ordered = sorted(local)
    breaks, indices = classify([local[i].integration for i in ordered],
                               config.class_count)
    class_indices = dict(zip(ordered, indices))
    return graph, local, global_, breaks, class_indices


def cmd_topology(args: argparse.Namespace) -> int:
    config = _resolve_config(args)
    ingest = read_lines(args.input, config)
    result = build_network(ingest.lines, config)
    _print_report(result, ingest)
    net = result.network
    print("nodes: %d" % len(net.nodes))
    print("arcs: %d" % len(net.arcs))
    print("total length (m): %.9g" % net.total_length())
    print("components: %d" % net.component_count())
    if net.skipped_degenerate:
        print("degenerate polylines skipped: %d" % net.skipped_degenerate)
    if args.output:
        features = []
        for arc in net.arcs.values():
            features.append({
                "type": "Feature",
                "id": arc.id,
                "properties": {"id": arc.id, "length": arc.length,
                               "from_node": arc.from_node, "to_node": arc.to_node},
                "geometry": {"type": "LineString",
                             "coordinates": [[p.x, p.y] for p in arc.geometry.points]},
            })
        write_feature_collection({"type": "FeatureCollection",
                                  "features": features}, args.output)
    return EXIT_OK


def _street_bends(streets, eps: float):
    rows = []
    for s in streets:
        if s.closed or len(s.geometry) < 3:
            rows.append((s.id, len(s.arc_chain), s.length, s.closed, None, None, None))
            continue
        b = s.bend(eps=eps)
        rows.append((s.id, len(s.arc_chain), s.length, s.closed, b.d, b.x, b.ratio))
    return rows


def cmd_streets(args: argparse.Namespace) -> int:
    config = _resolve_config(args)
    ingest = read_lines(args.input, config)
    result = build_streets(ingest.lines, config)
    _print_report(result, ingest)
    streets = result.streets
    print("natural streets: %d" % len(streets))
    rows = _street_bends(streets, config.snap_tolerance_m)
    open_rows = [r for r in rows if r[5] is not None]
    if open_rows:
        mean_x = sum(r[5] for r in open_rows) / len(open_rows)
        mean_ratio = sum(r[6] for r in open_rows) / len(open_rows)
        print("mean(x) (m): %.9g" % mean_x)
        print("mean(x/d): %.9g" % mean_ratio)
    if args.report:
        write_table(args.report,
                    ["street_id", "arc_count", "length_m", "closed",
                     "baseline_d_m", "offset_x_m", "ratio"],
                    rows)
    if args.output:
        features = []
        for s, row in zip(sorted(streets, key=lambda s: s.id), rows):
            features.append({
                "type": "Feature",
                "id": s.id,
                "properties": {"id": s.id, "arc_count": len(s.arc_chain),
                               "length": s.length, "closed": s.closed,
                               "baseline_d": row[4], "offset_x": row[5],
                               "ratio": row[6]},
                "geometry": {"type": "LineString",
                             "coordinates": [[p.x, p.y] for p in s.geometry.points]},
            })
        write_feature_collection({"type": "FeatureCollection",
                                  "features": features}, args.output)
    return EXIT_OK


def _run_axial(args: argparse.Namespace, config: PipelineConfig):
    ingest = read_lines(args.input, config)
    result = build_axial_map(ingest.lines, config)
    _print_report(result, ingest)
    return result


def cmd_axial(args: argparse.Namespace) -> int:
    config = _resolve_config(args)
    result = _run_axial(args, config)
    amap = result.axial_map
    print("axial lines: %d" % len(amap))
    if amap.thresholds is not None:
        print("mean(x) (m): %.9g" % amap.thresholds.mean_x)
        print("mean(x/d): %.9g" % amap.thresholds.mean_ratio)
        print("min merge angle (deg): %.9g" % amap.thresholds.min_merge_angle)
    if args.output:
        _, local, global_, breaks, class_indices = _metrics_for(
            amap, result.network, config)
        export_map(amap.lines, local, global_, class_indices, args.output)
        print("breaks: %s" % " ".join("%.9g" % b for b in breaks))
    return EXIT_OK


def cmd_metrics(args: argparse.Namespace) -> int:
    config = _resolve_config(args)
    ingest = read_lines(args.input, config)
    if args.units == "streets":
        result = build_streets(ingest.lines, config)
        units = result.streets
    else:
        result = build_axial_map(ingest.lines, config)
        units = result.axial_map.lines
    _print_report(result, ingest)
    graph, local, global_, breaks, class_indices = _metrics_for(
        units, result.network, config)
    print("units: %d" % len(units))
    print("edges: %d" % len(graph.edges))
    print("breaks: %s" % " ".join("%.9g" % b for b in breaks))
    if args.output:
        export_map(units, local, global_, class_indices, args.output)
    if args.table:
        rows = []
        for uid in sorted(local):
            lm, gm = local[uid], global_[uid]
            rows.append((uid, lm.connectivity,
                         None if lm.integration is None else lm.integration,
                         None if gm.integration is None else gm.integration,
                         class_indices[uid]))
        write_table(args.table,
                    ["unit_id", "connectivity", "local_integration",
                     "global_integration", "class_index"], rows)
    return EXIT_OK


def cmd_correlate(args: argparse.Namespace) -> int:
    config = _resolve_config(args)
    ingest = read_lines(args.input, config)
    if args.units == "streets":
        result = build_streets(ingest.lines, config)
        units = result.streets
    else:
        result = build_axial_map(ingest.lines, config)
        units = result.axial_map.lines
    _print_report(result, ingest)
    gates = load_gates(args.gates)
    assigned = assign_gates(gates, units, max_distance=args.max_gate_distance)
    _, local, _, _, _ = _metrics_for(units, result.network, config)

    pairs = []
    dropped_unassigned = 0
    dropped_metric = 0
    rows = []
    for gate in assigned:
        metric = None
        if gate.assigned_unit is None:
            dropped_unassigned += 1
        else:
            m = local[gate.assigned_unit].integration
            if m is None or (isinstance(m, float) and math.isinf(m)):
                dropped_metric += 1
            else:
                metric = m
                pairs.append((m, gate.flow))
        rows.append((gate.location.x, gate.location.y, gate.flow,
                     gate.assigned_unit, gate.distance, metric))
    if dropped_unassigned:
        print("[axialmap] %d gate(s) beyond assignment distance"
              % dropped_unassigned, file=sys.stderr)
    if dropped_metric:
        print("[axialmap] %d gate(s) on units without a defined metric"
              % dropped_metric, file=sys.stderr)
    if len(pairs) < 3:
        raise InputDataError("need at least 3 assigned gates, got %d" % len(pairs))
    metrics_v = [p[0] for p in pairs]
    flows_v = [p[1] for p in pairs]
    try:
        r2 = r_squared(flows_v, metrics_v)
    except StatsError as exc:
        raise InputDataError(str(exc)) from exc
    mean_m = sum(metrics_v) / len(metrics_v)
    mean_f = sum(flows_v) / len(flows_v)
    cov = sum((m - mean_m) * (f - mean_f) for m, f in zip(metrics_v, flows_v))
    r = math.copysign(math.sqrt(r2), cov)
    t_stat, significant = correlation_t_test(r, len(pairs))
    print("gates assigned: %d" % len(pairs))
    print("r_squared: %.9g" % r2)
    print("t_statistic: %.9g" % t_stat)
    print("significant_at_5pct: %s" % ("yes" if significant else "no"))
    if args.output:
        write_table(args.output,
                    ["gate_x", "gate_y", "flow", "assigned_unit",
                     "distance_m", "local_integration"], rows)
    fig_path = _figure_path(args)
    if fig_path:
        from .figures import save_correlation_figure
        save_correlation_figure(metrics_v, flows_v, r2, t_stat, significant,
                                fig_path)
        print("[axialmap] figure written to %s" % fig_path, file=sys.stderr)
    return EXIT_OK


def cmd_distfit(args: argparse.Namespace) -> int:
    config = _resolve_config(args)
    ingest = read_lines(args.input, config)
    result = build_streets(ingest.lines, config)
    _print_report(result, ingest)
    rows = _street_bends(result.streets, config.snap_tolerance_m)
    xs = [r[5] for r in rows if r[5] is not None and r[5] > 0]
    ratios = [r[6] for r in rows if r[6] is not None and r[6] > 0]
    if len(xs) < 2 or len(ratios) < 2:
        raise InputDataError(
            "need at least 2 bent open streets for a distribution fit")
    fit_x = fit_lognormal(xs)
    fit_ratio = fit_lognormal(ratios)
    split_x = head_tail_split(xs)
    split_ratio = head_tail_split(ratios)
    print("streets with positive bend: %d" % len(xs))
    print("x: mu=%.9g sigma=%.9g ks=%.9g head_fraction=%.9g"
          % (fit_x.mu, fit_x.sigma, fit_x.gof_statistic, split_x.head_fraction))
    print("x/d: mu=%.9g sigma=%.9g ks=%.9g head_fraction=%.9g"
          % (fit_ratio.mu, fit_ratio.sigma, fit_ratio.gof_statistic,
             split_ratio.head_fraction))
    if args.output:
        write_table(args.output,
                    ["street_id", "arc_count", "length_m", "closed",
                     "baseline_d_m", "offset_x_m", "ratio"],
                    rows)
    fig_path = _figure_path(args)
    if fig_path:
        from .figures import save_distribution_figure
        save_distribution_figure(xs, fit_x, ratios, fit_ratio, fig_path)
        print("[axialmap] figure written to %s" % fig_path, file=sys.stderr)
    return EXIT_OK


def make_parser() -> _Parser:
    parser = _Parser(prog="axialmap",
                     description="Generate axial maps from street center lines "
                                 "and analyze their connectivity structure.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("topology", help="build the arc-node network and summarize it")
    p.add_argument("input")
    p.add_argument("--output", metavar="FILE", help="write planarized arcs")
    _add_config_flags(p)
    p.set_defaults(func=cmd_topology)

    p = sub.add_parser("streets", help="join arcs into natural streets")
    p.add_argument("input")
    p.add_argument("--output", metavar="FILE", help="write streets with bend attributes")
    p.add_argument("--report", metavar="FILE", help="write the per-street bend table")
    _add_config_flags(p)
    p.set_defaults(func=cmd_streets)

    p = sub.add_parser("axial", help="run the full pipeline and export the axial map")
    p.add_argument("input")
    p.add_argument("--output", metavar="FILE", help="write the attributed axial map")
    _add_config_flags(p)
    p.set_defaults(func=cmd_axial)

    p = sub.add_parser("metrics", help="connectivity graph, integration and breaks")
    p.add_argument("input")
    p.add_argument("--units", choices=["axial", "streets"], default="axial")
    p.add_argument("--output", metavar="FILE", help="write the attributed collection")
    p.add_argument("--table", metavar="FILE", help="write the metrics table")
    _add_config_flags(p)
    p.set_defaults(func=cmd_metrics)

    p = sub.add_parser("correlate", help="correlate gate flows with integration")
    p.add_argument("input")
    p.add_argument("--gates", required=True, metavar="FILE",
                   help="delimited gate table with columns x, y, flow")
    p.add_argument("--units", choices=["axial", "streets"], default="axial")
    p.add_argument("--max-gate-distance", type=float, default=50.0, metavar="M")
    p.add_argument("--output", metavar="FILE", help="write the per-gate report")
    p.add_argument("--figure", metavar="FILE", help="scatter figure path")
    p.add_argument("--no-figure", action="store_true")
    _add_config_flags(p)
    p.set_defaults(func=cmd_correlate)

    p = sub.add_parser("distfit", help="lognormal report of the bend statistics")
    p.add_argument("input")
    p.add_argument("--output", metavar="FILE", help="write the per-street bend table")
    p.add_argument("--figure", metavar="FILE", help="histogram figure path")
    p.add_argument("--no-figure", action="store_true")
    _add_config_flags(p)
    p.set_defaults(func=cmd_distfit)

    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = make_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        print("usage error: %s" % exc, file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:
        # --version and --help exit cleanly through argparse
        return int(exc.code or 0)
    try:
        return args.func(args)
    except _UsageError as exc:
        print("usage error: %s" % exc, file=sys.stderr)
        return EXIT_USAGE
    except InputDataError as exc:
        print("input error: %s" % exc, file=sys.stderr)
        return EXIT_INPUT
    except Exception as exc:  # pragma: no cover - defensive
        print("internal error: %s" % exc, file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
