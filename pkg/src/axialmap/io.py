"""Data ingestion, attributed export and pipeline configuration.

Input is a GeoJSON-style line-feature collection.  Geographic coordinates
(lon/lat) are detected by bounds and projected onto a local equirectangular
plane about the dataset centroid so that all downstream units are meters;
the approximation stays well under 0.1% distortion at city scale.  Exports
are byte-deterministic: fixed feature order, fixed key order and numbers
serialized with 9 significant digits.
"""

from __future__ import annotations

import csv
import json
import logging
import math
from dataclasses import dataclass, fields
from typing import Dict, List, Optional, Sequence, Tuple

from .geometry import Point, Polyline
from .stats import GateObservation

logger = logging.getLogger(__name__)

METERS_PER_DEGREE = 111320.0


class InputDataError(Exception):
    """Unreadable or malformed input data."""


@dataclass(frozen=True)
class PipelineConfig:
    join_principle: str = "every-best-fit"
    join_threshold_degrees: float = 45.0
    head_ratio_fraction: float = 0.10
    roundabout_max_perimeter_m: float = 120.0
    snap_tolerance_m: float = 0.01
    split_at_crossings: bool = False
    integration_radius: int = 3
    class_count: int = 7
    projection: str = "auto"

    def __post_init__(self):
        if not (0.0 < self.join_threshold_degrees < 180.0):
            raise ValueError("join threshold must be in (0, 180)")
        if not (0.0 < self.head_ratio_fraction <= 1.0):
            raise ValueError("head ratio fraction must be in (0, 1]")
        if not (self.snap_tolerance_m > 0.0):
            raise ValueError("snap tolerance must be positive")
        if self.integration_radius < 1:
            raise ValueError("integration radius must be >= 1")
        if self.class_count < 1:
            raise ValueError("class count must be >= 1")
        if self.projection not in ("auto", "geographic", "meters"):
            raise ValueError("projection must be auto, geographic or meters")

    @classmethod
    def from_mapping(cls, mapping: Dict[str, str]) -> "PipelineConfig":
        kwargs = {}
        known = {f.name: f.type for f in fields(cls)}
        defaults = cls()
        for key, raw in mapping.items():
            name = key.strip().replace("-", "_")
            if name not in known:
                raise ValueError("unknown config key %r" % key)
            current = getattr(defaults, name)
            if isinstance(current, bool):
                kwargs[name] = str(raw).strip().lower() in ("1", "true", "yes", "on")
            elif isinstance(current, int):
                kwargs[name] = int(raw)
            elif isinstance(current, float):
                kwargs[name] = float(raw)
            else:
                kwargs[name] = str(raw).strip()
        return cls(**kwargs)


def load_config(path: str) -> Dict[str, str]:
    """Read a plain key=value config file; '#' starts a comment."""
    out: Dict[str, str] = {}
    try:
        with open(path, "r", encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, 1):
                line = line.split("#", 1)[0].strip()
                if not line:
                    continue
                if "=" not in line:
                    raise InputDataError(
                        "%s:%d: expected key=value, got %r" % (path, lineno, line))
                key, value = line.split("=", 1)
                out[key.strip()] = value.strip()
    except OSError as exc:
        raise InputDataError("cannot read config %s: %s" % (path, exc)) from exc
    return out


@dataclass
class IngestResult:
    lines: List[Polyline]
    skipped_features: int
    projected: bool
    origin: Optional[Point]


def _looks_geographic(coords: List[Tuple[float, float]]) -> bool:
    return all(-180.0 <= x <= 180.0 and -90.0 <= y <= 90.0 for x, y in coords)


def equirectangular(lon: float, lat: float, lon0: float, lat0: float) -> Point:
    x = (lon - lon0) * METERS_PER_DEGREE * math.cos(math.radians(lat0))
    y = (lat - lat0) * METERS_PER_DEGREE
    return Point(x, y)


def read_lines(path: str, config: PipelineConfig = PipelineConfig()) -> IngestResult:
    """Read a line-feature collection into polylines in meters."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            data = json.load(fh)
    except OSError as exc:
        raise InputDataError("cannot read %s: %s" % (path, exc)) from exc
    except json.JSONDecodeError as exc:
        raise InputDataError("%s is not valid JSON: %s" % (path, exc)) from exc

    if not isinstance(data, dict) or data.get("type") != "FeatureCollection":
        raise InputDataError("%s: expected a FeatureCollection" % path)
    features = data.get("features")
    if not isinstance(features, list):
        raise InputDataError("%s: missing feature list" % path)

    raw_parts: List[List[Tuple[float, float]]] = []
    skipped = 0
    for idx, feature in enumerate(features):
        geom = (feature or {}).get("geometry") or {}
        gtype = geom.get("type")
        if gtype == "LineString":
            parts = [geom.get("coordinates")]
        elif gtype == "MultiLineString":
            parts = geom.get("coordinates") or []
        else:
            skipped += 1
            continue
        for part in parts:
            coords: List[Tuple[float, float]] = []
            try:
                for pt in part:
                    coords.append((float(pt[0]), float(pt[1])))
            except (TypeError, ValueError, IndexError) as exc:
                raise InputDataError(
                    "%s: malformed geometry in feature %d" % (path, idx)) from exc
            if len(coords) < 2:
                raise InputDataError(
                    "%s: feature %d has a line with < 2 points" % (path, idx))
            raw_parts.append(coords)
    if skipped:
        logger.warning("skipped %d non-line feature(s)", skipped)

    all_coords = [pt for part in raw_parts for pt in part]
    project = False
    origin: Optional[Point] = None
    if config.projection == "geographic":
        project = True
    elif config.projection == "auto":
        project = bool(all_coords) and _looks_geographic(all_coords)
    if project and all_coords:
        xs = [c[0] for c in all_coords]
        ys = [c[1] for c in all_coords]
        lon0 = (min(xs) + max(xs)) / 2.0
        lat0 = (min(ys) + max(ys)) / 2.0
        origin = Point(lon0, lat0)
        raw_parts = [[equirectangular(x, y, lon0, lat0) for x, y in part]
                     for part in raw_parts]

    lines: List[Polyline] = []
    for part in raw_parts:
        line = Polyline.cleaned(part, config.snap_tolerance_m)
        if line is None:
            skipped += 1
            continue
        lines.append(line)
    return IngestResult(lines=lines, skipped_features=skipped,
                        projected=project, origin=origin)


def ingest_lines(path: str, config: PipelineConfig = PipelineConfig()) -> List[Polyline]:
    return read_lines(path, config).lines


def _fmt_number(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, int):
        return str(v)
    if math.isinf(v) or math.isnan(v):
        raise ValueError("non-finite number in export: %r" % (v,))
    text = format(v, ".9g")
    # keep valid JSON: '.9g' may produce bare exponents but never commas
    return text


def _dumps(obj) -> str:
    """Deterministic JSON with 9-significant-digit numbers."""
    if obj is None:
        return "null"
    if isinstance(obj, str):
        return json.dumps(obj, ensure_ascii=False)
    if isinstance(obj, bool):
        return "true" if obj else "false"
    if isinstance(obj, (int, float)):
        return _fmt_number(obj)
    if isinstance(obj, (list, tuple)):
        return "[" + ",".join(_dumps(v) for v in obj) + "]"
    if isinstance(obj, dict):
        return "{" + ",".join(
            json.dumps(k, ensure_ascii=False) + ":" + _dumps(v)
            for k, v in obj.items()) + "}"
    raise TypeError("cannot serialize %r" % type(obj))


def write_feature_collection(fc: dict, path: str) -> None:
    try:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(_dumps(fc))
            fh.write("\n")
    except OSError as exc:
        raise InputDataError("cannot write %s: %s" % (path, exc)) from exc


def read_feature_collection(path: str) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as exc:
        raise InputDataError("cannot read %s: %s" % (path, exc)) from exc
    except json.JSONDecodeError as exc:
        raise InputDataError("%s is not valid JSON: %s" % (path, exc)) from exc


def _metric_value(v):
    """Undefined metrics export as null; infinite ones as the 'inf' marker."""
    if v is None:
        return None
    if isinstance(v, float) and math.isinf(v):
        return "inf"
    return v


def build_export_features(units, local_metrics, global_metrics,
                          class_indices) -> dict:
    """Attributed line-feature collection for axial lines or streets.

    Features are ordered by ascending unit id; every metric field is
    present on every feature, null when undefined.
    """
    features = []
    for unit in sorted(units, key=lambda u: u.id):
        geom = getattr(unit, "geometry", None)
        if isinstance(geom, Polyline):
            coords = [[p.x, p.y] for p in geom.points]
            length = geom.length()
            sources = [unit.id]
        else:
            coords = [[unit.start.x, unit.start.y], [unit.end.x, unit.end.y]]
            length = unit.length
            sources = sorted(unit.source_street_ids)
        lm = local_metrics[unit.id]
        gm = global_metrics[unit.id]
        features.append({
            "type": "Feature",
            "id": unit.id,
            "properties": {
                "id": unit.id,
                "length": length,
                "connectivity": lm.connectivity,
                "local_integration": _metric_value(lm.integration),
                "global_integration": _metric_value(gm.integration),
                "class_index": class_indices[unit.id],
                "source_street_ids": sources,
            },
            "geometry": {"type": "LineString", "coordinates": coords},
        })
    return {"type": "FeatureCollection", "features": features}


def export_map(units, local_metrics, global_metrics, class_indices,
               path: str) -> dict:
    fc = build_export_features(units, local_metrics, global_metrics,
                               class_indices)
    write_feature_collection(fc, path)
    return fc


def load_gates(path: str) -> List[GateObservation]:
    """Read a delimited gate table with columns x, y, flow (header required)."""
    try:
        with open(path, "r", encoding="utf-8", newline="") as fh:
            sample = fh.read(4096)
            fh.seek(0)
            first_line = sample.splitlines()[0] if sample else ""
            delimiter = ","
            for cand in ("\t", ";", ","):
                if cand in first_line:
                    delimiter = cand
                    break
            reader = csv.DictReader(fh, delimiter=delimiter)
            if reader.fieldnames is None:
                raise InputDataError("%s: empty gate table" % path)
            names = {name.strip().lower(): name for name in reader.fieldnames}
            for needed in ("x", "y", "flow"):
                if needed not in names:
                    raise InputDataError(
                        "%s: gate table needs columns x, y, flow (got %s)"
                        % (path, reader.fieldnames))
            gates = []
            for lineno, row in enumerate(reader, 2):
                try:
                    gates.append(GateObservation(
                        location=Point(float(row[names["x"]]),
                                       float(row[names["y"]])),
                        flow=float(row[names["flow"]])))
                except (TypeError, ValueError) as exc:
                    raise InputDataError(
                        "%s:%d: malformed gate row %r" % (path, lineno, row)) from exc
            return gates
    except OSError as exc:
        raise InputDataError("cannot read %s: %s" % (path, exc)) from exc


def write_table(path: str, header: Sequence[str], rows: Sequence[Sequence]) -> None:
    """Write a delimited report table (CSV)."""
    try:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(header)
            for row in rows:
                writer.writerow(["" if v is None else v for v in row])
    except OSError as exc:
        raise InputDataError("cannot write %s: %s" % (path, exc)) from exc
