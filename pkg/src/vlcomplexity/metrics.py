"""Per-path and per-segment raw metrics for the six parametrized attributes:
rotation, size, visibility, symmetry, clutter, order.

Raw values are unnormalized (degrees, meters, fractions); normalization to
complexity scores lives in the scale module.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import shapely
import shapely.affinity

from .errors import DegenerateGeometry, MissingCorridor
from .geometry import COINCIDENCE_EPS, Point2, Polyline
from .scene import NavPath, Scene, line_of_sight

DEFAULT_SAMPLE_SPACING = 1.0
DEFAULT_ORDER_TOLERANCE = 0.25

GRID_THETA_STEP_DEG = 1.0
GRID_SPACING_STEP = 0.05


# ----------------------------------------------------------------------
# Measures
# ----------------------------------------------------------------------


@dataclass(frozen=True)
class RotationMeasure:
    turn_count: int
    accumulated_degrees: float


@dataclass(frozen=True)
class SizeMeasure:
    mean_width: float
    mean_height: float
    total_length: float


@dataclass(frozen=True)
class VisibilityMeasure:
    visible_fraction: float
    per_segment_fractions: tuple[float, ...]
    per_segment_sample_counts: tuple[int, ...] = ()


@dataclass(frozen=True)
class Axis:
    """A line in the plan: origin point plus unit direction."""

    px: float
    py: float
    dx: float
    dy: float

    def reflect_coeffs(self) -> tuple[float, float, float, float, float, float]:
        """Affine coefficients (a, b, d, e, xoff, yoff) of reflection about this line."""
        a = self.dx * self.dx - self.dy * self.dy
        b = 2.0 * self.dx * self.dy
        xoff = self.px - (a * self.px + b * self.py)
        yoff = self.py - (b * self.px - a * self.py)
        return (a, b, b, -a, xoff, yoff)

    def reflect_point(self, x: float, y: float) -> tuple[float, float]:
        a, b, _, _, xoff, yoff = self.reflect_coeffs()
        return (a * x + b * y + xoff, b * x - a * y + yoff)


@dataclass(frozen=True)
class SymmetryMeasure:
    best_score: float
    best_axis: Axis


@dataclass(frozen=True)
class ClutterMeasure:
    coverage_fraction: float
    per_segment_fractions: tuple[float, ...]


@dataclass(frozen=True)
class OrderMeasure:
    ordered_fraction: float
    best_template: str  # one of: grid, line, circle, none


@dataclass(frozen=True)
class SegmentRaw:
    """Raw metric values restricted to one path segment."""

    index: int
    turn_count: int
    rotation_degrees: float
    width: float
    height: float
    length: float
    visibility_fraction: float
    symmetry_score: float
    clutter_fraction: float
    order_fraction: float
    order_template: str


@dataclass(frozen=True)
class AttributeProfile:
    """Raw values for all six attributes, per path and per segment."""

    rotation: RotationMeasure
    size: SizeMeasure
    visibility: VisibilityMeasure
    symmetry: SymmetryMeasure
    clutter: ClutterMeasure
    order: OrderMeasure
    segments: tuple[SegmentRaw, ...]


# ----------------------------------------------------------------------
# Rotation and size
# ----------------------------------------------------------------------


def rotation_metric(path: NavPath) -> RotationMeasure:
    """Turn count above the segmentation threshold plus total accumulated heading
    change (sub-threshold wiggles included)."""
    angles = np.asarray(path.turn_angles_deg)
    interior = angles[1:-1] if len(angles) > 2 else np.empty(0)
    return RotationMeasure(
        turn_count=int(np.sum(interior > path.turn_threshold)),
        accumulated_degrees=float(np.sum(interior)),
    )


def size_metric(scene: Scene, path: NavPath) -> SizeMeasure:
    """Length-weighted mean corridor width/height over the path plus total length."""
    total = 0.0
    ws = 0.0
    hs = 0.0
    for seg in path.segments:
        if seg.corridor is None:
            raise MissingCorridor(f"path segment {seg.index} has no corridor cross-section")
        total += seg.length
        ws += seg.width * seg.length
        hs += seg.height * seg.length
    if total <= 0:
        raise DegenerateGeometry("path has zero length")
    return SizeMeasure(mean_width=ws / total, mean_height=hs / total, total_length=path.length)


# ----------------------------------------------------------------------
# Visibility
# ----------------------------------------------------------------------


def _vantage_samples(path: NavPath, spacing: float) -> tuple[list[Point2], list[int]]:
    """Sample points every `spacing` meters of chainage plus their segment index.

    The final vertex is excluded: it is the sight target, not a vantage point,
    so a goal sealed off by a wall reads as fraction 0.
    """
    if spacing <= 0:
        raise ValueError("sample_spacing must be > 0")
    length = path.length
    if length <= COINCIDENCE_EPS:
        raise DegenerateGeometry("path has zero length")
    positions = np.arange(0.0, length - spacing * 1e-9, spacing)
    points = [path.line.point_at(float(s)) for s in positions]
    starts = [seg.chainage_start for seg in path.segments]
    # Nudge boundary samples past fp noise in the segment starts so their
    # segment assignment survives rigid transforms.
    seg_idx = [
        min(int(np.searchsorted(starts, s + 1e-9, side="right")) - 1, len(path.segments) - 1)
        for s in positions
    ]
    return points, seg_idx


def visibility_metric(
    scene: Scene,
    path: NavPath,
    sample_spacing: float = DEFAULT_SAMPLE_SPACING,
    mode: str = "endpoint",
) -> VisibilityMeasure:
    """Fraction of sight lines that are clear while walking the path.

    endpoint mode: each vantage sample sights the final path vertex.
    remaining_path mode: each vantage sample sights every downstream sample.
    """
    if mode not in ("endpoint", "remaining_path"):
        raise ValueError(f"unknown visibility mode {mode!r}")
    points, seg_idx = _vantage_samples(path, sample_spacing)
    n_seg = len(path.segments)
    if mode == "endpoint":
        goal = path.line.vertices[-1]
        visible = [line_of_sight(scene, p, goal) for p in points]
        weights = [1] * len(points)
    else:
        visible = []
        weights = []
        for i, p in enumerate(points):
            ok = sum(1 for q in points[i + 1 :] if line_of_sight(scene, p, q))
            visible.append(ok)
            weights.append(len(points) - i - 1)
    per_seg_num = [0.0] * n_seg
    per_seg_den = [0] * n_seg
    for v, w, k in zip(visible, weights, seg_idx):
        per_seg_num[k] += float(v)
        per_seg_den[k] += w
    fractions = tuple(
        per_seg_num[k] / per_seg_den[k] if per_seg_den[k] > 0 else _midpoint_fraction(scene, path, k, mode)
        for k in range(n_seg)
    )
    total_den = sum(per_seg_den)
    overall = sum(per_seg_num) / total_den if total_den > 0 else 1.0
    return VisibilityMeasure(
        visible_fraction=float(overall),
        per_segment_fractions=fractions,
        per_segment_sample_counts=tuple(per_seg_den),
    )


def _midpoint_fraction(scene: Scene, path: NavPath, k: int, mode: str) -> float:
    # Segment shorter than the sample spacing: report its midpoint sight line
    # (zero weight in the aggregate).
    seg = path.segments[k]
    mid = path.line.point_at(0.5 * (seg.chainage_start + seg.chainage_end))
    if mode == "endpoint":
        return 1.0 if line_of_sight(scene, mid, path.line.vertices[-1]) else 0.0
    return 1.0


# ----------------------------------------------------------------------
# Corridor bands and clutter
# ----------------------------------------------------------------------


def segment_bands(path: NavPath) -> list[shapely.Polygon]:
    bands = []
    for seg in path.segments:
        if seg.corridor is None:
            raise MissingCorridor(f"path segment {seg.index} has no corridor cross-section")
        band = seg.band()
        if band.area <= COINCIDENCE_EPS:
            raise DegenerateGeometry(f"segment {seg.index} has a zero-area corridor band")
        bands.append(band)
    return bands


def clutter_metric(scene: Scene, path: NavPath) -> ClutterMeasure:
    """Fraction of the corridor band covered by obstacle footprints, per segment
    and band-area-weighted overall."""
    bands = segment_bands(path)
    union = scene.obstacle_union
    inter_areas = []
    band_areas = []
    for band in bands:
        band_areas.append(band.area)
        inter_areas.append(band.intersection(union).area if not union.is_empty else 0.0)
    fractions = tuple(min(1.0, ia / ba) for ia, ba in zip(inter_areas, band_areas))
    overall = min(1.0, sum(inter_areas) / sum(band_areas))
    return ClutterMeasure(coverage_fraction=float(overall), per_segment_fractions=fractions)


# ----------------------------------------------------------------------
# Symmetry
# ----------------------------------------------------------------------


def _chord_axis(line: Polyline) -> Axis | None:
    a = line.coords[0]
    b = line.coords[-1]
    d = b - a
    n = float(np.hypot(d[0], d[1]))
    if n <= COINCIDENCE_EPS:
        d = line.coords[1] - line.coords[0]
        n = float(np.hypot(d[0], d[1]))
    if n <= COINCIDENCE_EPS:
        return None
    return Axis(float(a[0]), float(a[1]), float(d[0] / n), float(d[1] / n))


def _obb_midlines(geom: shapely.geometry.base.BaseGeometry, frame: Axis) -> list[Axis]:
    """Midlines of the bounding box of `geom` taken in the frame direction."""
    c, s = frame.dx, frame.dy
    pts = shapely.get_coordinates(geom)
    u = pts[:, 0] * c + pts[:, 1] * s
    v = -pts[:, 0] * s + pts[:, 1] * c
    cu = 0.5 * (u.min() + u.max())
    cv = 0.5 * (v.min() + v.max())
    cx = cu * c - cv * s
    cy = cu * s + cv * c
    return [Axis(cx, cy, c, s), Axis(cx, cy, -s, c)]


def _pca_axes(points: np.ndarray) -> list[Axis]:
    if len(points) < 2:
        return []
    centred = points - points.mean(axis=0)
    cov = centred.T @ centred / len(points)
    vals, vecs = np.linalg.eigh(cov)
    cx, cy = points.mean(axis=0)
    axes = []
    for k in range(2):
        v = vecs[:, k]
        n = float(np.hypot(v[0], v[1]))
        if n > COINCIDENCE_EPS:
            axes.append(Axis(float(cx), float(cy), float(v[0] / n), float(v[1] / n)))
    return axes


def _dedup_axes(axes: list[Axis]) -> list[Axis]:
    kept: list[Axis] = []
    for ax in axes:
        dup = False
        for other in kept:
            cross = abs(ax.dx * other.dy - ax.dy * other.dx)
            if cross < 1e-9:
                # Parallel: same line iff origin offset is along the direction.
                ox, oy = ax.px - other.px, ax.py - other.py
                if abs(ox * other.dy - oy * other.dx) < 1e-9:
                    dup = True
                    break
        if not dup:
            kept.append(ax)
    return kept


def symmetry_axis_candidates(
    scene: Scene, path: NavPath, bands: list[shapely.Polygon] | None = None
) -> list[Axis]:
    """Candidate reflection axes: path/segment chords, band bounding-box midlines,
    principal axes of the in-band footprint vertices. All are built covariantly
    with the geometry so scores survive rigid transforms."""
    bands = bands if bands is not None else segment_bands(path)
    band_union = shapely.unary_union(bands)
    axes: list[Axis] = []
    chord = _chord_axis(path.line)
    if chord is not None:
        axes.append(chord)
        axes.extend(_obb_midlines(band_union, chord))
    for seg in path.segments:
        seg_chord = _chord_axis(seg.line)
        if seg_chord is not None:
            axes.append(seg_chord)
    in_band = _footprints_in_band(scene, band_union)
    if in_band:
        verts = np.concatenate([o.footprint.coords for o in in_band], axis=0)
        axes.extend(_pca_axes(verts))
    return _dedup_axes(axes)


def _footprints_in_band(scene: Scene, band) -> list:
    return [o for o in scene.obstacles if o.footprint.to_shapely().intersects(band)]


def _reflection_score(union: shapely.geometry.base.BaseGeometry, axis: Axis) -> float:
    area = union.area
    if area <= 0:
        return 1.0
    reflected = shapely.affinity.affine_transform(union, list(axis.reflect_coeffs()))
    sym_diff = union.symmetric_difference(reflected).area
    return max(0.0, min(1.0, 1.0 - sym_diff / (2.0 * area)))


def symmetry_metric(scene: Scene, path: NavPath) -> SymmetryMeasure:
    """Best mirror-overlap score of the in-band obstacle footprints over the
    candidate axes. An empty band is vacuously symmetric (score 1)."""
    bands = segment_bands(path)
    band_union = shapely.unary_union(bands)
    in_band = _footprints_in_band(scene, band_union)
    chord = _chord_axis(path.line)
    fallback = _obb_midlines(band_union, chord)[0] if chord else Axis(0, 0, 1, 0)
    if not in_band:
        return SymmetryMeasure(best_score=1.0, best_axis=fallback)
    union = shapely.unary_union([o.footprint.to_shapely() for o in in_band])
    best_score = -1.0
    best_axis = fallback
    for axis in symmetry_axis_candidates(scene, path, bands):
        score = _reflection_score(union, axis)
        if score > best_score + 1e-12:
            best_score = score
            best_axis = axis
    return SymmetryMeasure(best_score=float(best_score), best_axis=best_axis)


# ----------------------------------------------------------------------
# Order: template fits
# ----------------------------------------------------------------------


@dataclass(frozen=True)
class LineFit:
    origin: tuple[float, float]
    direction: tuple[float, float]
    residuals: tuple[float, ...]


@dataclass(frozen=True)
class GridFit:
    theta_deg: float
    spacing: float
    offset: tuple[float, float]
    residuals: tuple[float, ...]


@dataclass(frozen=True)
class CircleFit:
    center: tuple[float, float]
    radius: float
    residuals: tuple[float, ...]


def fit_line(points: np.ndarray) -> LineFit:
    """Total-least-squares line through the points (principal direction)."""
    if len(points) == 1:
        return LineFit(tuple(points[0]), (1.0, 0.0), (0.0,))
    centre = points.mean(axis=0)
    centred = points - centre
    cov = centred.T @ centred
    _, vecs = np.linalg.eigh(cov)
    d = vecs[:, -1]
    res = np.abs(centred[:, 0] * d[1] - centred[:, 1] * d[0])
    return LineFit(
        (float(centre[0]), float(centre[1])),
        (float(d[0]), float(d[1])),
        tuple(float(r) for r in res),
    )


def _wrap_residual(values: np.ndarray, spacings: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Circular-mean lattice offsets and wrapped distances to the nearest node.

    values: (..., n) coordinates along one lattice axis; spacings: (..., 1)
    broadcastable spacing per row. Returns offsets (...,) and |residuals| (..., n).
    """
    phase = 2.0 * math.pi * values / spacings
    offsets = spacings[..., 0] * np.arctan2(
        np.mean(np.sin(phase), axis=-1), np.mean(np.cos(phase), axis=-1)
    ) / (2.0 * math.pi)
    wrapped = np.mod(values - offsets[..., None] + spacings / 2.0, spacings) - spacings / 2.0
    return offsets, np.abs(wrapped)


def _grid_spacing_candidates(points: np.ndarray, residual_tolerance: float) -> list[float]:
    if len(points) < 2:
        return []
    diffs = points[:, None, :] - points[None, :, :]
    dists = np.hypot(diffs[..., 0], diffs[..., 1])
    np.fill_diagonal(dists, np.inf)
    nn = dists.min(axis=1)
    median_nn = float(np.median(nn))
    if median_nn <= 1e-9:
        return []
    # A lattice whose pitch is comparable to the tolerance "explains" any point
    # set, so spacings below 4x tolerance are not admissible templates.
    lo = max(0.5 * median_nn, 4.0 * residual_tolerance)
    hi = 1.5 * median_nn
    if hi < lo:
        return []
    k_lo = math.ceil((lo - median_nn) / GRID_SPACING_STEP)
    k_hi = math.floor((hi - median_nn) / GRID_SPACING_STEP)
    return [median_nn + k * GRID_SPACING_STEP for k in range(k_lo, k_hi + 1)]


def fit_grid(points: np.ndarray, residual_tolerance: float) -> GridFit:
    """Best square-lattice fit over an exhaustive rotation x spacing search.

    Rotations step 1 degree over [0, 90); spacings step 0.05 m around the median
    nearest-neighbour distance +/- 50%. Deterministic tie-breaking: most points
    within tolerance, then least total residual, then smallest angle and spacing.
    """
    key = tuple(float(x) for x in points.ravel())
    return _fit_grid_cached(key, float(residual_tolerance))


@lru_cache(maxsize=8192)
def _fit_grid_cached(points_key: tuple[float, ...], residual_tolerance: float) -> GridFit:
    points = np.array(points_key).reshape(-1, 2)
    if len(points) < 2:
        return GridFit(0.0, 1.0, (0.0, 0.0), tuple(0.0 for _ in points))
    spacings = np.asarray(_grid_spacing_candidates(points, residual_tolerance))
    if len(spacings) == 0:
        return GridFit(0.0, 1.0, (0.0, 0.0), tuple(math.inf for _ in points))
    thetas = np.arange(0.0, 90.0, GRID_THETA_STEP_DEG)
    rad = np.radians(thetas)
    c, s = np.cos(rad), np.sin(rad)
    # (T, n) rotated coordinates, broadcast against (m, 1) spacings -> (T, m, n).
    u = c[:, None] * points[None, :, 0] + s[:, None] * points[None, :, 1]
    v = -s[:, None] * points[None, :, 0] + c[:, None] * points[None, :, 1]
    sp = spacings[None, :, None]
    ou, du = _wrap_residual(u[:, None, :], np.broadcast_to(sp, (len(thetas), len(spacings), 1)))
    ov, dv = _wrap_residual(v[:, None, :], np.broadcast_to(sp, (len(thetas), len(spacings), 1)))
    res = np.hypot(du, dv)
    counts = np.sum(res <= residual_tolerance, axis=-1)
    totals = np.sum(res, axis=-1)
    theta_grid = np.broadcast_to(thetas[:, None], counts.shape)
    sp_grid = np.broadcast_to(spacings[None, :], counts.shape)
    order = np.lexsort(
        (sp_grid.ravel(), theta_grid.ravel(), totals.ravel(), -counts.ravel())
    )
    ti, si = np.unravel_index(order[0], counts.shape)
    return GridFit(
        float(thetas[ti]),
        float(spacings[si]),
        (float(ou[ti, si]), float(ov[ti, si])),
        tuple(float(r) for r in res[ti, si]),
    )


def fit_circle(points: np.ndarray) -> CircleFit | None:
    """Algebraic least-squares circle; None when the system degenerates."""
    if len(points) < 3:
        return None
    a = np.column_stack([points[:, 0], points[:, 1], np.ones(len(points))])
    b = points[:, 0] ** 2 + points[:, 1] ** 2
    sol, _, rank, _ = np.linalg.lstsq(a, b, rcond=None)
    if rank < 3:
        return None
    cx, cy = sol[0] / 2.0, sol[1] / 2.0
    r2 = sol[2] + cx * cx + cy * cy
    if not math.isfinite(r2) or r2 <= 0:
        return None
    r = math.sqrt(r2)
    res = np.abs(np.hypot(points[:, 0] - cx, points[:, 1] - cy) - r)
    return CircleFit((float(cx), float(cy)), float(r), tuple(float(x) for x in res))


TEMPLATE_PRECEDENCE = ("grid", "line", "circle")


def order_metric(
    scene: Scene, path: NavPath, residual_tolerance: float = DEFAULT_ORDER_TOLERANCE
) -> OrderMeasure:
    """Fraction of in-band objects whose centroids sit on a recognized template
    (grid, line or circle) within the residual tolerance."""
    if residual_tolerance <= 0:
        raise ValueError("residual_tolerance must be > 0")
    bands = segment_bands(path)
    band_union = shapely.unary_union(bands)
    in_band = _footprints_in_band(scene, band_union)
    return _order_of_obstacles(in_band, residual_tolerance)


def _order_of_obstacles(obstacles: list, residual_tolerance: float) -> OrderMeasure:
    n = len(obstacles)
    if n == 0:
        return OrderMeasure(ordered_fraction=1.0, best_template="none")
    if n <= 2:
        # One point fits any lattice; two points fit the lattice spaced by their
        # gap. Grid wins by template precedence.
        return OrderMeasure(ordered_fraction=1.0, best_template="grid")
    pts = np.array([o.footprint.centroid.as_tuple() for o in obstacles])
    fractions: dict[str, float] = {}
    fractions["grid"] = _fraction_within(fit_grid(pts, residual_tolerance).residuals, residual_tolerance)
    fractions["line"] = _fraction_within(fit_line(pts).residuals, residual_tolerance)
    circ = fit_circle(pts)
    fractions["circle"] = _fraction_within(circ.residuals, residual_tolerance) if circ else 0.0
    best = max(TEMPLATE_PRECEDENCE, key=lambda t: (fractions[t], -TEMPLATE_PRECEDENCE.index(t)))
    return OrderMeasure(ordered_fraction=float(fractions[best]), best_template=best)


def _fraction_within(residuals: tuple[float, ...], tol: float) -> float:
    return sum(1 for r in residuals if r <= tol) / len(residuals)


# ----------------------------------------------------------------------
# Full profile (path + per segment) in one pass
# ----------------------------------------------------------------------


def compute_profile(
    scene: Scene,
    path: NavPath,
    sample_spacing: float = DEFAULT_SAMPLE_SPACING,
    visibility_mode: str = "endpoint",
    order_residual_tolerance: float = DEFAULT_ORDER_TOLERANCE,
) -> AttributeProfile:
    """Raw values for all six attributes at path level and per segment."""
    rotation = rotation_metric(path)
    size = size_metric(scene, path)
    visibility = visibility_metric(scene, path, sample_spacing, visibility_mode)
    bands = segment_bands(path)
    clutter = clutter_metric(scene, path)
    symmetry = symmetry_metric(scene, path)
    order = order_metric(scene, path, order_residual_tolerance)

    owners = path.turn_attribution()
    angles = path.turn_angles_deg
    segments = []
    for seg in path.segments:
        seg_turn_deg = sum(angles[v] for v in range(len(angles)) if owners[v] == seg.index)
        seg_turns = sum(
            1
            for v in range(len(angles))
            if owners[v] == seg.index and angles[v] > path.turn_threshold
        )
        band = bands[seg.index]
        seg_obs = _footprints_in_band(scene, band)
        if seg_obs:
            seg_union = shapely.unary_union([o.footprint.to_shapely() for o in seg_obs])
            chord = _chord_axis(seg.line)
            cands = _dedup_axes(
                ([chord] if chord else [])
                + (_obb_midlines(band, chord) if chord else [])
                + _pca_axes(np.concatenate([o.footprint.coords for o in seg_obs], axis=0))
            )
            seg_sym = max(_reflection_score(seg_union, ax) for ax in cands) if cands else 1.0
        else:
            seg_sym = 1.0
        seg_order = _order_of_obstacles(seg_obs, order_residual_tolerance)
        segments.append(
            SegmentRaw(
                index=seg.index,
                turn_count=seg_turns,
                rotation_degrees=float(seg_turn_deg),
                width=seg.width,
                height=seg.height,
                length=seg.length,
                visibility_fraction=visibility.per_segment_fractions[seg.index],
                symmetry_score=float(seg_sym),
                clutter_fraction=clutter.per_segment_fractions[seg.index],
                order_fraction=seg_order.ordered_fraction,
                order_template=seg_order.best_template,
            )
        )
    return AttributeProfile(
        rotation=rotation,
        size=size,
        visibility=visibility,
        symmetry=symmetry,
        clutter=clutter,
        order=order,
        segments=tuple(segments),
    )
