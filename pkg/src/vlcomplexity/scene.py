"""Scene model (walls, obstacles, corridors) and the navigation path built on it.

The scene is 2.5D: obstacle footprints carry heights, but visibility is computed
in plan and every wall or obstacle occludes fully regardless of height.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Sequence

import numpy as np
import shapely

from .errors import DegenerateGeometry, OutOfBounds, ValidationError
from .geometry import (
    COINCIDENCE_EPS,
    DEFAULT_TURN_THRESHOLD_DEG,
    Point2,
    Polygon,
    Polyline,
    ray_edge_hits,
    segment_path,
    segment_to_edges_distance,
)


@dataclass(frozen=True)
class Bounds:
    """Axis-aligned scene extent."""

    xmin: float
    ymin: float
    xmax: float
    ymax: float

    def __post_init__(self):
        if not (self.xmax > self.xmin and self.ymax > self.ymin):
            raise ValidationError("bounds must have positive extent")

    def contains(self, p: Point2, tol: float = COINCIDENCE_EPS) -> bool:
        return (
            self.xmin - tol <= p.x <= self.xmax + tol
            and self.ymin - tol <= p.y <= self.ymax + tol
        )

    def edges(self) -> np.ndarray:
        c = np.array(
            [
                [self.xmin, self.ymin],
                [self.xmax, self.ymin],
                [self.xmax, self.ymax],
                [self.xmin, self.ymax],
                [self.xmin, self.ymin],
            ]
        )
        return np.stack([c[:-1], c[1:]], axis=1)


@dataclass(frozen=True)
class Obstacle:
    """A solid 3D element standing in the walkable space."""

    footprint: Polygon
    height: float
    tag: str = ""
    movable: bool = True

    def __post_init__(self):
        if not (math.isfinite(self.height) and self.height > 0):
            raise ValidationError(f"obstacle height must be finite and > 0, got {self.height}")


@dataclass(frozen=True)
class CorridorSegment:
    """Cross-section of one stretch of walkable space: axis plus width and height."""

    a: Point2
    b: Point2
    width: float
    height: float
    cid: str = ""

    def __post_init__(self):
        if self.a.distance_to(self.b) <= COINCIDENCE_EPS:
            raise ValidationError("corridor axis has zero length")
        if not (self.width > 0 and self.height > 0):
            raise ValidationError("corridor width and height must be > 0")

    def axis_distance(self, p: Point2) -> float:
        pt = np.array(p.as_tuple())
        edge = np.array([[self.a.as_tuple(), self.b.as_tuple()]])
        return float(segment_to_edges_distance(pt, pt, edge)[0])


class Scene:
    """Immutable 2.5D environment: opaque wall solids, obstacles, corridor bands."""

    def __init__(
        self,
        walls: Sequence[Polygon],
        obstacles: Sequence[Obstacle],
        corridors: Sequence[CorridorSegment],
        bounds: Bounds,
    ):
        self.walls = tuple(walls)
        self.obstacles = tuple(obstacles)
        self.corridors = tuple(corridors)
        self.bounds = bounds
        for i, w in enumerate(self.walls):
            self._check_inside(w.ring, f"wall {i}")
        for i, o in enumerate(self.obstacles):
            self._check_inside(o.footprint.ring, f"obstacle {i} ({o.tag!r})")
        for i, c in enumerate(self.corridors):
            self._check_inside((c.a, c.b), f"corridor {i} ({c.cid!r})")

    def _check_inside(self, points, what: str):
        for p in points:
            if not self.bounds.contains(p, tol=1e-6):
                raise ValidationError(f"{what} lies outside scene bounds at ({p.x}, {p.y})")

    @cached_property
    def occlusion_edges(self) -> np.ndarray:
        """All wall and obstacle footprint edges as an (n, 2, 2) array."""
        parts = [w.edges() for w in self.walls] + [o.footprint.edges() for o in self.obstacles]
        if not parts:
            return np.empty((0, 2, 2))
        return np.concatenate(parts, axis=0)

    @cached_property
    def obstacle_union(self) -> shapely.geometry.base.BaseGeometry:
        if not self.obstacles:
            return shapely.Polygon()
        return shapely.unary_union([o.footprint.to_shapely() for o in self.obstacles])

    def replace(self, *, walls=None, obstacles=None, corridors=None) -> Scene:
        return Scene(
            walls=self.walls if walls is None else walls,
            obstacles=self.obstacles if obstacles is None else obstacles,
            corridors=self.corridors if corridors is None else corridors,
            bounds=self.bounds,
        )

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, Scene)
            and self.walls == other.walls
            and self.obstacles == other.obstacles
            and self.corridors == other.corridors
            and self.bounds == other.bounds
        )

    def __repr__(self) -> str:
        return (
            f"Scene({len(self.walls)} walls, {len(self.obstacles)} obstacles, "
            f"{len(self.corridors)} corridors)"
        )


# ----------------------------------------------------------------------
# Visibility primitives
# ----------------------------------------------------------------------


def ray_cast(scene: Scene, origin: Point2, direction: tuple[float, float]) -> float:
    """Distance from origin along direction to the nearest wall/obstacle edge.

    The scene bounds act as a backstop, so the result is always finite for an
    origin inside bounds. Hits at edge endpoints count (conservative).
    """
    if not scene.bounds.contains(origin):
        raise OutOfBounds(f"ray origin ({origin.x}, {origin.y}) outside scene bounds")
    d = np.array(direction, dtype=float)
    norm = float(np.hypot(d[0], d[1]))
    if norm <= COINCIDENCE_EPS:
        raise DegenerateGeometry("ray direction must be nonzero")
    d = d / norm
    o = np.array(origin.as_tuple())
    hits = ray_edge_hits(o, d, scene.occlusion_edges)
    backstop = ray_edge_hits(o, d, scene.bounds.edges())
    candidates = np.concatenate([hits, backstop])
    return float(np.min(candidates)) if len(candidates) else math.inf


def line_of_sight(scene: Scene, a: Point2, b: Point2) -> bool:
    """True iff the sight segment a-b clears every wall and obstacle edge.

    Touching an edge within COINCIDENCE_EPS counts as blocked (conservative);
    a zero-length sight line is always clear.
    """
    for p in (a, b):
        if not scene.bounds.contains(p):
            raise OutOfBounds(f"sight point ({p.x}, {p.y}) outside scene bounds")
    if a.distance_to(b) <= COINCIDENCE_EPS:
        return True
    edges = scene.occlusion_edges
    if len(edges) == 0:
        return True
    dists = segment_to_edges_distance(np.array(a.as_tuple()), np.array(b.as_tuple()), edges)
    return bool(np.min(dists) > COINCIDENCE_EPS)


# ----------------------------------------------------------------------
# Navigation path
# ----------------------------------------------------------------------

# A corridor supports a path edge when the edge midpoint is within this many
# half-widths of its axis; >1 leaves room for paths relaxed off-axis.
_ASSOC_SLACK = 2.0


@dataclass(frozen=True)
class PathSegment:
    """One turn-delimited stretch of the navigation path."""

    index: int
    start: int
    end: int
    corridor: CorridorSegment | None
    line: Polyline = field(compare=False)
    chainage_start: float
    chainage_end: float

    @property
    def length(self) -> float:
        return self.chainage_end - self.chainage_start

    @property
    def width(self) -> float:
        if self.corridor is None:
            return math.nan
        return self.corridor.width

    @property
    def height(self) -> float:
        if self.corridor is None:
            return math.nan
        return self.corridor.height

    def band(self) -> shapely.Polygon:
        """Widthwise envelope around this segment of the path."""
        if self.corridor is None:
            raise DegenerateGeometry(f"segment {self.index} has no corridor cross-section")
        ls = shapely.LineString(self.line.coords)
        return ls.buffer(self.corridor.width / 2.0, cap_style="flat", join_style="mitre", mitre_limit=20.0)


class NavPath:
    """A navigation polyline with its derived turn-delimited segments."""

    def __init__(
        self,
        line: Polyline,
        corridors: Sequence[CorridorSegment],
        turn_threshold: float = DEFAULT_TURN_THRESHOLD_DEG,
        corridor_ids: Sequence[str] | None = None,
    ):
        self.line = line
        self.turn_threshold = turn_threshold
        split = segment_path(line, turn_threshold)
        self.turn_angles_deg = split.turn_angles_deg
        corridors = tuple(corridors)
        if corridor_ids is not None:
            if len(corridor_ids) != len(split.spans):
                raise ValidationError(
                    f"path declares {len(corridor_ids)} corridor ids but derives "
                    f"{len(split.spans)} segments at turn threshold {turn_threshold} deg"
                )
            by_id = {c.cid: c for c in corridors}
            missing = [cid for cid in corridor_ids if cid not in by_id]
            if missing:
                raise ValidationError(f"unknown corridor id(s): {missing}")
            assoc = [by_id[cid] for cid in corridor_ids]
        else:
            assoc = [_associate_corridor(line, span, corridors) for span in split.spans]
        segments = []
        for i, ((s, e), corridor) in enumerate(zip(split.spans, assoc)):
            sub = Polyline(line.vertices[s : e + 1])
            segments.append(
                PathSegment(
                    index=i,
                    start=s,
                    end=e,
                    corridor=corridor,
                    line=sub,
                    chainage_start=float(line.cum_lengths[s]),
                    chainage_end=float(line.cum_lengths[e]),
                )
            )
        self.segments = tuple(segments)

    @property
    def length(self) -> float:
        return self.line.length

    def turn_attribution(self) -> list[int]:
        """Segment index that owns the turn at each vertex (split turns go to the
        segment they enter); -1 for the path endpoints."""
        owner = [-1] * len(self.line.vertices)
        starts = {seg.start: seg.index for seg in self.segments}
        for v in range(1, len(self.line.vertices) - 1):
            if v in starts:
                owner[v] = starts[v]
            else:
                for seg in self.segments:
                    if seg.start < v < seg.end:
                        owner[v] = seg.index
                        break
        return owner

    def rebuilt(self, line: Polyline, corridors: Sequence[CorridorSegment]) -> NavPath:
        return NavPath(line, corridors, self.turn_threshold)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, NavPath)
            and self.line == other.line
            and self.turn_threshold == other.turn_threshold
        )

    def __repr__(self) -> str:
        return f"NavPath({len(self.segments)} segments, {self.length:.2f} m)"


def _associate_corridor(
    line: Polyline, span: tuple[int, int], corridors: Sequence[CorridorSegment]
) -> CorridorSegment | None:
    """Pick the corridor carrying the most path length within the span, by axis proximity."""
    if not corridors:
        return None
    votes = {i: 0.0 for i in range(len(corridors))}
    s, e = span
    for k in range(s, e):
        mid = 0.5 * (line.coords[k] + line.coords[k + 1])
        mid_pt = Point2(float(mid[0]), float(mid[1]))
        edge_len = float(line.edge_lengths[k])
        best = None
        best_d = math.inf
        for i, c in enumerate(corridors):
            d = c.axis_distance(mid_pt)
            if d < best_d:
                best, best_d = i, d
        if best is not None and best_d <= corridors[best].width / 2.0 * _ASSOC_SLACK:
            votes[best] += edge_len
    winner = max(votes, key=lambda i: (votes[i], -i))
    if votes[winner] <= 0.0:
        return None
    return corridors[winner]


# ----------------------------------------------------------------------
# Rigid transforms (shared by tests and fixtures)
# ----------------------------------------------------------------------


def _xf(p: Point2, cos_a: float, sin_a: float, tx: float, ty: float, mirror: bool) -> Point2:
    x = -p.x if mirror else p.x
    return Point2(cos_a * x - sin_a * p.y + tx, sin_a * x + cos_a * p.y + ty)


def transform_scene_path(
    scene: Scene,
    path: NavPath,
    angle_rad: float,
    tx: float,
    ty: float,
    mirror: bool = False,
) -> tuple[Scene, NavPath]:
    """Apply (optional mirror about x=0, then rotation, then translation) jointly."""
    ca, sa = math.cos(angle_rad), math.sin(angle_rad)

    def xf(p: Point2) -> Point2:
        return _xf(p, ca, sa, tx, ty, mirror)

    corners = [
        Point2(scene.bounds.xmin, scene.bounds.ymin),
        Point2(scene.bounds.xmax, scene.bounds.ymin),
        Point2(scene.bounds.xmax, scene.bounds.ymax),
        Point2(scene.bounds.xmin, scene.bounds.ymax),
    ]
    moved = [xf(p) for p in corners]
    pad = 1e-6
    new_bounds = Bounds(
        min(p.x for p in moved) - pad,
        min(p.y for p in moved) - pad,
        max(p.x for p in moved) + pad,
        max(p.y for p in moved) + pad,
    )
    new_scene = Scene(
        walls=[Polygon([xf(p) for p in w.ring]) for w in scene.walls],
        obstacles=[
            Obstacle(Polygon([xf(p) for p in o.footprint.ring]), o.height, o.tag, o.movable)
            for o in scene.obstacles
        ],
        corridors=[
            CorridorSegment(xf(c.a), xf(c.b), c.width, c.height, c.cid) for c in scene.corridors
        ],
        bounds=new_bounds,
    )
    new_line = Polyline([xf(p) for p in path.line.vertices])
    new_path = NavPath(new_line, new_scene.corridors, path.turn_threshold)
    return new_scene, new_path
