"""2D geometry primitives: points, polylines, polygons, and path segmentation.

All coordinates are meters in a shared plan-view frame. Two epsilons are used
throughout the package: COINCIDENCE_EPS (1e-9 m) for point/edge coincidence
tests and METRIC_EPS (1e-6) for metric comparisons.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np
import shapely

from .errors import DegenerateGeometry

COINCIDENCE_EPS = 1e-9
METRIC_EPS = 1e-6


@dataclass(frozen=True)
class Point2:
    """A point in the plan, meters."""

    x: float
    y: float

    def __post_init__(self):
        object.__setattr__(self, "x", float(self.x))
        object.__setattr__(self, "y", float(self.y))
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise DegenerateGeometry(f"non-finite coordinate ({self.x}, {self.y})")

    def as_tuple(self) -> tuple[float, float]:
        return (self.x, self.y)

    def distance_to(self, other: Point2) -> float:
        return math.hypot(self.x - other.x, self.y - other.y)


def _as_coord_array(points: Iterable[Point2]) -> np.ndarray:
    return np.array([(p.x, p.y) for p in points], dtype=float)


class Polyline:
    """Ordered open chain of >= 2 points; consecutive vertices must be distinct."""

    def __init__(self, vertices: Sequence[Point2]):
        vertices = tuple(vertices)
        if len(vertices) < 2:
            raise DegenerateGeometry("polyline needs at least 2 vertices")
        for a, b in zip(vertices, vertices[1:]):
            if a.distance_to(b) <= COINCIDENCE_EPS:
                raise DegenerateGeometry("consecutive polyline vertices coincide")
        self.vertices = vertices
        self.coords = _as_coord_array(vertices)
        deltas = np.diff(self.coords, axis=0)
        self.edge_lengths = np.hypot(deltas[:, 0], deltas[:, 1])
        self.cum_lengths = np.concatenate([[0.0], np.cumsum(self.edge_lengths)])

    @property
    def length(self) -> float:
        return float(self.cum_lengths[-1])

    def point_at(self, s: float) -> Point2:
        """Point at arc length s, clamped to [0, length]."""
        s = min(max(s, 0.0), self.length)
        i = int(np.searchsorted(self.cum_lengths, s, side="right")) - 1
        i = min(max(i, 0), len(self.edge_lengths) - 1)
        t = (s - self.cum_lengths[i]) / self.edge_lengths[i]
        a = self.coords[i]
        b = self.coords[i + 1]
        p = a + t * (b - a)
        return Point2(float(p[0]), float(p[1]))

    def turn_angles_deg(self) -> np.ndarray:
        """Interior direction change at every vertex, degrees in [0, 180]; 0 at endpoints."""
        angles = np.zeros(len(self.vertices))
        c = self.coords
        for i in range(1, len(self.vertices) - 1):
            v1 = c[i] - c[i - 1]
            v2 = c[i + 1] - c[i]
            cross = v1[0] * v2[1] - v1[1] * v2[0]
            dot = float(np.dot(v1, v2))
            angles[i] = math.degrees(math.atan2(abs(cross), dot))
        return angles

    def __eq__(self, other) -> bool:
        return isinstance(other, Polyline) and self.vertices == other.vertices

    def __repr__(self) -> str:
        return f"Polyline({len(self.vertices)} vertices, {self.length:.2f} m)"


class Polygon:
    """Simple polygon ring, stored counterclockwise, implicitly closed."""

    def __init__(self, ring: Sequence[Point2]):
        ring = tuple(ring)
        distinct = {p.as_tuple() for p in ring}
        if len(ring) < 3 or len(distinct) < 3:
            raise DegenerateGeometry("polygon ring needs at least 3 distinct vertices")
        signed = _shoelace(_as_coord_array(ring))
        if abs(signed) <= COINCIDENCE_EPS**0.5 * 1e-4:
            raise DegenerateGeometry("polygon has (near-)zero area")
        if signed < 0:
            ring = tuple(reversed(ring))
        shp = shapely.Polygon([p.as_tuple() for p in ring])
        if not shp.is_valid:
            raise DegenerateGeometry("polygon ring self-intersects")
        self.ring = ring
        self.coords = _as_coord_array(ring)

    @property
    def area(self) -> float:
        return abs(_shoelace(self.coords))

    @cached_property
    def centroid(self) -> Point2:
        c = self.to_shapely().centroid
        return Point2(float(c.x), float(c.y))

    @cached_property
    def _shapely(self) -> shapely.Polygon:
        return shapely.Polygon(self.coords)

    def to_shapely(self) -> shapely.Polygon:
        return self._shapely

    def translated(self, dx: float, dy: float) -> Polygon:
        return Polygon([Point2(p.x + dx, p.y + dy) for p in self.ring])

    def edges(self) -> np.ndarray:
        """(n, 2, 2) array of edge endpoint pairs, ring closed."""
        closed = np.vstack([self.coords, self.coords[:1]])
        return np.stack([closed[:-1], closed[1:]], axis=1)

    def __eq__(self, other) -> bool:
        return isinstance(other, Polygon) and self.ring == other.ring

    def __repr__(self) -> str:
        return f"Polygon({len(self.ring)} vertices, {self.area:.2f} m^2)"


def _shoelace(coords: np.ndarray) -> float:
    x = coords[:, 0]
    y = coords[:, 1]
    return 0.5 * float(np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y))


def polygon_area(p: Polygon) -> float:
    """Positive area of a simple polygon (shoelace magnitude), square meters."""
    return p.area


def rect_polygon(xmin: float, ymin: float, xmax: float, ymax: float) -> Polygon:
    return Polygon(
        [Point2(xmin, ymin), Point2(xmax, ymin), Point2(xmax, ymax), Point2(xmin, ymax)]
    )


def square_polygon(cx: float, cy: float, side: float) -> Polygon:
    h = side / 2.0
    return rect_polygon(cx - h, cy - h, cx + h, cy + h)


# ----------------------------------------------------------------------
# Path segmentation
# ----------------------------------------------------------------------

DEFAULT_TURN_THRESHOLD_DEG = 15.0


@dataclass(frozen=True)
class PathSplit:
    """Turn-delimited split of a polyline: inclusive vertex index ranges."""

    spans: tuple[tuple[int, int], ...]
    turn_angles_deg: tuple[float, ...]


def segment_path(line: Polyline, turn_threshold: float = DEFAULT_TURN_THRESHOLD_DEG) -> PathSplit:
    """Split a polyline at every vertex whose direction change exceeds the threshold.

    Returns the inclusive (start, end) vertex index span of each segment plus the
    per-vertex turn angle in degrees (0 at the endpoints).
    """
    if not 0.0 < turn_threshold < 180.0:
        raise ValueError("turn_threshold must be in (0, 180) degrees")
    angles = line.turn_angles_deg()
    split_at = [i for i in range(1, len(line.vertices) - 1) if angles[i] > turn_threshold]
    starts = [0] + split_at
    ends = split_at + [len(line.vertices) - 1]
    spans = tuple((s, e) for s, e in zip(starts, ends))
    return PathSplit(spans=spans, turn_angles_deg=tuple(float(a) for a in angles))


# ----------------------------------------------------------------------
# Segment/segment and ray/edge numerics (vectorized over edge arrays)
# ----------------------------------------------------------------------


def segment_to_edges_distance(p: np.ndarray, q: np.ndarray, edges: np.ndarray) -> np.ndarray:
    """Minimum distance from closed segment p-q to each edge in an (n, 2, 2) array."""
    if len(edges) == 0:
        return np.empty(0)
    d1 = q - p
    a = float(np.dot(d1, d1))
    p2 = edges[:, 0, :]
    d2 = edges[:, 1, :] - p2
    e = np.einsum("ij,ij->i", d2, d2)
    r = p[None, :] - p2
    f = np.einsum("ij,ij->i", d2, r)
    if a <= COINCIDENCE_EPS**2:
        # Query segment degenerate: point-to-segment distance.
        t = np.clip(np.divide(f, e, out=np.zeros_like(e), where=e > 0), 0.0, 1.0)
        closest = p2 + t[:, None] * d2
        return np.hypot(*(p[None, :] - closest).T)
    c = r @ d1
    b = d2 @ d1
    denom = a * e - b * b
    s = np.where(np.abs(denom) > 0, (b * f - c * e) / np.where(denom == 0, 1.0, denom), 0.0)
    s = np.clip(s, 0.0, 1.0)
    t = np.divide(b * s + f, e, out=np.zeros_like(e), where=e > 0)
    t_low = t < 0.0
    t_high = t > 1.0
    s = np.where(t_low, np.clip(-c / a, 0.0, 1.0), s)
    s = np.where(t_high, np.clip((b - c) / a, 0.0, 1.0), s)
    t = np.clip(t, 0.0, 1.0)
    c1 = p[None, :] + s[:, None] * d1[None, :]
    c2 = p2 + t[:, None] * d2
    return np.hypot(c1[:, 0] - c2[:, 0], c1[:, 1] - c2[:, 1])


def ray_edge_hits(origin: np.ndarray, direction: np.ndarray, edges: np.ndarray) -> np.ndarray:
    """Positive ray-parameter distances for each hit edge; +inf where the ray misses.

    Hits at edge endpoints count (conservative occlusion).
    """
    if len(edges) == 0:
        return np.empty(0)
    a = edges[:, 0, :]
    ab = edges[:, 1, :] - a
    ao = a - origin[None, :]
    denom = direction[0] * ab[:, 1] - direction[1] * ab[:, 0]
    parallel = np.abs(denom) <= 1e-14
    safe = np.where(parallel, 1.0, denom)
    t = (ao[:, 0] * ab[:, 1] - ao[:, 1] * ab[:, 0]) / safe
    u = (ao[:, 0] * direction[1] - ao[:, 1] * direction[0]) / safe
    edge_len = np.hypot(ab[:, 0], ab[:, 1])
    u_tol = np.divide(COINCIDENCE_EPS, edge_len, out=np.full_like(edge_len, 0.0), where=edge_len > 0)
    hit = (~parallel) & (t > COINCIDENCE_EPS) & (u >= -u_tol) & (u <= 1.0 + u_tol)
    return np.where(hit, t, np.inf)
