"""Automatic axial-map generation from street center lines.

Street segments are joined into natural streets by the good-continuity
principle, chopped into the least set of straight axial lines using
statistically derived bend thresholds, and analyzed through a
connectivity graph with space-syntax integration metrics.
"""

__version__ = "0.1.0"

from .axial import (
    AxialLine,
    AxialMap,
    ChopThresholds,
    ThresholdsUnavailableError,
    chop,
    chop_predicate,
    compute_thresholds,
    generate_axial_map,
    merge_collinear,
)
from .geometry import (
    BendMeasure,
    ClosedLoopError,
    GeometryError,
    Point,
    Polyline,
    bend_base_angle,
    deflection_angle,
    measure_bend,
    min_deflection_from_ratio,
    segments_intersect,
)
from .graph import (
    ConnectivityGraph,
    NodeMetrics,
    all_metrics,
    build_connectivity_graph,
    class_index,
    classify,
    integration,
    jenks_breaks,
)
from .io import (
    InputDataError,
    PipelineConfig,
    export_map,
    ingest_lines,
    load_gates,
    read_lines,
)
from .pipeline import PipelineResult, build_axial_map, build_network, build_streets
from .stats import (
    GateObservation,
    HeadTailSplit,
    LognormalFit,
    StatsError,
    assign_gates,
    correlation_t_test,
    fit_lognormal,
    head_tail_split,
    r_squared,
)
from .streets import (
    JoinPrinciple,
    NaturalStreet,
    StreetChainError,
    generate_natural_streets,
    street_geometry,
)
from .topology import (
    Arc,
    NetworkNode,
    StreetNetwork,
    detect_and_collapse_roundabouts,
    planarize,
)

__all__ = [
    "AxialLine", "AxialMap", "ChopThresholds", "ThresholdsUnavailableError",
    "chop", "chop_predicate", "compute_thresholds", "generate_axial_map",
    "merge_collinear",
    "BendMeasure", "ClosedLoopError", "GeometryError", "Point", "Polyline",
    "bend_base_angle", "deflection_angle", "measure_bend",
    "min_deflection_from_ratio", "segments_intersect",
    "ConnectivityGraph", "NodeMetrics", "all_metrics",
    "build_connectivity_graph", "class_index", "classify", "integration",
    "jenks_breaks",
    "InputDataError", "PipelineConfig", "export_map", "ingest_lines",
    "load_gates", "read_lines",
    "PipelineResult", "build_axial_map", "build_network", "build_streets",
    "GateObservation", "HeadTailSplit", "LognormalFit", "StatsError",
    "assign_gates", "correlation_t_test", "fit_lognormal", "head_tail_split",
    "r_squared",
    "JoinPrinciple", "NaturalStreet", "StreetChainError",
    "generate_natural_streets", "street_geometry",
    "Arc", "NetworkNode", "StreetNetwork", "detect_and_collapse_roundabouts",
    "planarize",
]
