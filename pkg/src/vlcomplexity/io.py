"""Scene/report document serialization: versioned JSON schemas, canonical
hashing, and atomic file writes."""

from __future__ import annotations

import datetime as _dt
import hashlib
import json
import os
from dataclasses import dataclass, field
from pathlib import Path

from .errors import DegenerateGeometry, ParseError, ValidationError
from .geometry import Point2, Polygon, Polyline
from .scale import ComplexityReport, ScaleConfig
from .scene import Bounds, CorridorSegment, NavPath, Obstacle, Scene

SCENE_FORMAT_VERSION = "1"
REPORT_FORMAT_VERSION = "1"
TOOL_VERSION = "0.1.0"


# ----------------------------------------------------------------------
# Validation helpers (hand-rolled so errors carry exact JSON pointers)
# ----------------------------------------------------------------------


def _require(obj: dict, key: str, ptr: str):
    if not isinstance(obj, dict):
        raise ParseError("expected an object", ptr or "/")
    if key not in obj:
        raise ParseError(f"missing required field {key!r}", f"{ptr}/{key}")
    return obj[key]


def _number(value, ptr: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ParseError("expected a number", ptr)
    return float(value)


def _string(value, ptr: str) -> str:
    if not isinstance(value, str):
        raise ParseError("expected a string", ptr)
    return value


def _array(value, ptr: str) -> list:
    if not isinstance(value, list):
        raise ParseError("expected an array", ptr)
    return value


def _point(value, ptr: str) -> Point2:
    arr = _array(value, ptr)
    if len(arr) != 2:
        raise ParseError("expected [x, y]", ptr)
    return Point2(_number(arr[0], f"{ptr}/0"), _number(arr[1], f"{ptr}/1"))


def _points(value, ptr: str) -> list[Point2]:
    return [_point(v, f"{ptr}/{i}") for i, v in enumerate(_array(value, ptr))]


# ----------------------------------------------------------------------
# Scene documents
# ----------------------------------------------------------------------


@dataclass
class SceneDocument:
    """Parsed v1 scene file: the scene plus its named path polylines."""

    scene: Scene
    path_lines: dict[str, Polyline]
    path_corridor_ids: dict[str, tuple[str, ...] | None] = field(default_factory=dict)

    def path_names(self) -> list[str]:
        return list(self.path_lines)

    def nav_path(self, name: str, turn_threshold: float = 15.0) -> NavPath:
        if name not in self.path_lines:
            raise ValidationError(f"path not found: {name!r}")
        return NavPath(
            self.path_lines[name],
            self.scene.corridors,
            turn_threshold,
            corridor_ids=self.path_corridor_ids.get(name),
        )

    def to_dict(self) -> dict:
        b = self.scene.bounds
        doc = {
            "format_version": SCENE_FORMAT_VERSION,
            "units": "meters",
            "bounds": {"xmin": b.xmin, "ymin": b.ymin, "xmax": b.xmax, "ymax": b.ymax},
            "walls": [{"ring": [[p.x, p.y] for p in w.ring]} for w in self.scene.walls],
            "obstacles": [
                {
                    "footprint": [[p.x, p.y] for p in o.footprint.ring],
                    "height": o.height,
                    "tag": o.tag,
                    "movable": o.movable,
                }
                for o in self.scene.obstacles
            ],
            "corridors": [
                {
                    "id": c.cid,
                    "axis": [[c.a.x, c.a.y], [c.b.x, c.b.y]],
                    "width": c.width,
                    "height": c.height,
                }
                for c in self.scene.corridors
            ],
            "paths": {
                name: (
                    {"vertices": [[p.x, p.y] for p in line.vertices]}
                    | (
                        {"corridor_ids": list(self.path_corridor_ids[name])}
                        if self.path_corridor_ids.get(name)
                        else {}
                    )
                )
                for name, line in self.path_lines.items()
            },
        }
        return doc

    def replace_scene(self, scene: Scene, path_lines: dict[str, Polyline] | None = None) -> SceneDocument:
        return SceneDocument(
            scene=scene,
            path_lines=dict(path_lines if path_lines is not None else self.path_lines),
            path_corridor_ids={name: None for name in self.path_lines},
        )


def parse_scene_document(data: dict) -> SceneDocument:
    """Validate a scene document dict and build the domain model.

    Schema violations raise ParseError with a JSON-pointer; geometric invariant
    failures raise ValidationError naming the offending element.
    """
    if not isinstance(data, dict):
        raise ParseError("expected a JSON object", "/")
    version = _string(_require(data, "format_version", ""), "/format_version")
    if version != SCENE_FORMAT_VERSION:
        raise ParseError(f"unsupported format_version {version!r}", "/format_version")
    units = _string(_require(data, "units", ""), "/units")
    if units != "meters":
        raise ParseError(f"unsupported units {units!r} (only 'meters')", "/units")

    braw = _require(data, "bounds", "")
    bounds = Bounds(
        _number(_require(braw, "xmin", "/bounds"), "/bounds/xmin"),
        _number(_require(braw, "ymin", "/bounds"), "/bounds/ymin"),
        _number(_require(braw, "xmax", "/bounds"), "/bounds/xmax"),
        _number(_require(braw, "ymax", "/bounds"), "/bounds/ymax"),
    )

    walls = []
    for i, wraw in enumerate(_array(data.get("walls", []), "/walls")):
        ring = _points(_require(wraw, "ring", f"/walls/{i}"), f"/walls/{i}/ring")
        try:
            walls.append(Polygon(ring))
        except DegenerateGeometry as exc:
            raise ValidationError(f"wall {i}: {exc}") from exc

    obstacles = []
    for i, oraw in enumerate(_array(data.get("obstacles", []), "/obstacles")):
        ptr = f"/obstacles/{i}"
        ring = _points(_require(oraw, "footprint", ptr), f"{ptr}/footprint")
        height = _number(_require(oraw, "height", ptr), f"{ptr}/height")
        tag = _string(oraw.get("tag", ""), f"{ptr}/tag")
        movable = oraw.get("movable", True)
        if not isinstance(movable, bool):
            raise ParseError("expected a boolean", f"{ptr}/movable")
        try:
            obstacles.append(Obstacle(Polygon(ring), height, tag, movable))
        except (DegenerateGeometry, ValidationError) as exc:
            raise ValidationError(f"obstacle {i} ({tag!r}): {exc}") from exc

    corridors = []
    seen_ids = set()
    for i, craw in enumerate(_array(data.get("corridors", []), "/corridors")):
        ptr = f"/corridors/{i}"
        cid = _string(_require(craw, "id", ptr), f"{ptr}/id")
        if cid in seen_ids:
            raise ValidationError(f"duplicate corridor id {cid!r}")
        seen_ids.add(cid)
        axis = _points(_require(craw, "axis", ptr), f"{ptr}/axis")
        if len(axis) != 2:
            raise ParseError("corridor axis needs exactly 2 points", f"{ptr}/axis")
        width = _number(_require(craw, "width", ptr), f"{ptr}/width")
        height = _number(_require(craw, "height", ptr), f"{ptr}/height")
        try:
            corridors.append(CorridorSegment(axis[0], axis[1], width, height, cid))
        except ValidationError as exc:
            raise ValidationError(f"corridor {i} ({cid!r}): {exc}") from exc

    try:
        scene = Scene(walls, obstacles, corridors, bounds)
    except ValidationError:
        raise

    paths_raw = data.get("paths", {})
    if not isinstance(paths_raw, dict):
        raise ParseError("expected an object mapping path names", "/paths")
    path_lines: dict[str, Polyline] = {}
    path_cids: dict[str, tuple[str, ...] | None] = {}
    for name, praw in paths_raw.items():
        ptr = f"/paths/{name}"
        vertices = _points(_require(praw, "vertices", ptr), f"{ptr}/vertices")
        try:
            line = Polyline(vertices)
        except DegenerateGeometry as exc:
            raise ValidationError(f"path {name!r}: {exc}") from exc
        for j, p in enumerate(line.vertices):
            if not bounds.contains(p, tol=1e-6):
                raise ValidationError(f"path {name!r} vertex {j} lies outside scene bounds")
        cids = praw.get("corridor_ids")
        if cids is not None:
            cids = tuple(
                _string(c, f"{ptr}/corridor_ids/{k}")
                for k, c in enumerate(_array(cids, f"{ptr}/corridor_ids"))
            )
            unknown = [c for c in cids if c not in seen_ids]
            if unknown:
                raise ValidationError(f"path {name!r} references unknown corridor ids {unknown}")
        path_lines[name] = line
        path_cids[name] = cids
    return SceneDocument(scene=scene, path_lines=path_lines, path_corridor_ids=path_cids)


def load_scene(data: bytes | str) -> SceneDocument:
    """Parse scene document bytes (UTF-8 JSON)."""
    if isinstance(data, bytes):
        try:
            data = data.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise ParseError(f"not valid UTF-8: {exc}", "/") from exc
    try:
        raw = json.loads(data)
    except json.JSONDecodeError as exc:
        raise ParseError(f"not valid JSON: {exc}", "/") from exc
    return parse_scene_document(raw)


def load_scene_file(path: str | os.PathLike) -> SceneDocument:
    return load_scene(Path(path).read_bytes())


# ----------------------------------------------------------------------
# Canonical JSON, hashing, atomic writes
# ----------------------------------------------------------------------


def canonical_json(data) -> str:
    return json.dumps(data, sort_keys=True, separators=(",", ":"), allow_nan=False)


def sha256_of(data) -> str:
    return hashlib.sha256(canonical_json(data).encode("utf-8")).hexdigest()


def scene_hash(doc: SceneDocument) -> str:
    return sha256_of(doc.to_dict())


def config_hash(config: ScaleConfig) -> str:
    return sha256_of(config.to_dict())


def json_dumps_pretty(data) -> str:
    return json.dumps(data, sort_keys=True, indent=2, allow_nan=False) + "\n"


def atomic_write_text(path: str | os.PathLike, text: str):
    path = Path(path)
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(text, encoding="utf-8")
    os.replace(tmp, path)


def write_json(path: str | os.PathLike, data):
    atomic_write_text(path, json_dumps_pretty(data))


def _timestamp() -> str:
    # SOURCE_DATE_EPOCH makes outputs reproducible (declared env dependence).
    epoch = os.environ.get("SOURCE_DATE_EPOCH")
    if epoch is not None:
        dt = _dt.datetime.fromtimestamp(int(epoch), tz=_dt.timezone.utc)
    else:
        dt = _dt.datetime.now(tz=_dt.timezone.utc)
    return dt.strftime("%Y-%m-%dT%H:%M:%SZ")


def report_document(
    report: ComplexityReport,
    doc: SceneDocument,
    config: ScaleConfig,
    path_name: str,
) -> dict:
    return {
        "format_version": REPORT_FORMAT_VERSION,
        "report": report.to_dict(),
        "provenance": {
            "scene_hash": scene_hash(doc),
            "config_hash": config_hash(config),
            "path_name": path_name,
            "tool_version": TOOL_VERSION,
            "timestamp": _timestamp(),
        },
    }
