"""Independent oracles used to verify the metric implementations.

These deliberately take different routes than the package: point-in-polygon
rasterization via matplotlib.path (the package uses exact shapely areas),
line-of-sight via shapely intersection tests (the package uses its own
segment-distance code), and an anchor-based brute-force lattice search (the
package uses a circular-mean offset).
"""

from __future__ import annotations

import math

import numpy as np
import shapely
from matplotlib.path import Path as MplPath

DEFAULT_CELL = 0.02


def _footprint_paths(obstacles) -> list[MplPath]:
    return [MplPath(o.footprint.coords) for o in obstacles]


def _covered(points: np.ndarray, paths: list[MplPath]) -> np.ndarray:
    inside = np.zeros(len(points), dtype=bool)
    for p in paths:
        inside |= p.contains_points(points)
    return inside


def _segment_frame(seg):
    """Origin, unit axis and length of a straight (2-vertex) path segment."""
    coords = seg.line.coords
    assert len(coords) == 2, "oracle requires straight single-edge segments"
    origin = coords[0]
    d = coords[1] - coords[0]
    length = float(np.hypot(d[0], d[1]))
    return origin, d / length, length


def raster_clutter(scene, nav, cell: float = DEFAULT_CELL):
    """Rasterized band-coverage fractions (per segment and band-weighted overall)."""
    paths = _footprint_paths(scene.obstacles)
    per_segment = []
    covered_total = 0
    cells_total = 0
    for seg in nav.segments:
        origin, axis, length = _segment_frame(seg)
        w = seg.corridor.width
        along = np.arange(cell / 2.0, length, cell)
        lat = np.arange(-w / 2.0 + cell / 2.0, w / 2.0, cell)
        aa, ll = np.meshgrid(along, lat, indexing="ij")
        xs = origin[0] + aa * axis[0] - ll * axis[1]
        ys = origin[1] + aa * axis[1] + ll * axis[0]
        pts = np.column_stack([xs.ravel(), ys.ravel()])
        inside = _covered(pts, paths) if paths else np.zeros(len(pts), dtype=bool)
        per_segment.append(inside.sum() / len(pts))
        covered_total += int(inside.sum())
        cells_total += len(pts)
    return covered_total / cells_total, per_segment


def raster_symmetry_score(obstacles, axis, cell: float = DEFAULT_CELL) -> float:
    """Rasterized mirror-overlap score of the footprint union about one axis."""
    paths = _footprint_paths(obstacles)
    if not paths:
        return 1.0
    coords = np.concatenate([o.footprint.coords for o in obstacles], axis=0)
    refl = np.array([axis.reflect_point(x, y) for x, y in coords])
    allc = np.vstack([coords, refl])
    xmin, ymin = allc.min(axis=0) - cell
    xmax, ymax = allc.max(axis=0) + cell
    xs = np.arange(xmin + cell / 2.0, xmax, cell)
    ys = np.arange(ymin + cell / 2.0, ymax, cell)
    gx, gy = np.meshgrid(xs, ys, indexing="ij")
    pts = np.column_stack([gx.ravel(), gy.ravel()])
    in_a = _covered(pts, paths)
    a, b, _, _, xoff, yoff = axis.reflect_coeffs()
    rx = a * pts[:, 0] + b * pts[:, 1] + xoff
    ry = b * pts[:, 0] - a * pts[:, 1] + yoff
    in_r = _covered(np.column_stack([rx, ry]), paths)
    area_a = int(in_a.sum())
    if area_a == 0:
        return 1.0
    sym_diff = int(np.sum(in_a != in_r))
    return max(0.0, min(1.0, 1.0 - sym_diff / (2.0 * area_a)))


def _interp_point(coords: np.ndarray, cum: np.ndarray, s: float) -> tuple[float, float]:
    x = float(np.interp(s, cum, coords[:, 0]))
    y = float(np.interp(s, cum, coords[:, 1]))
    return x, y


def shapely_los_clear(scene, a, b) -> bool:
    seg = shapely.LineString([a, b])
    for poly in [w.to_shapely() for w in scene.walls] + [
        o.footprint.to_shapely() for o in scene.obstacles
    ]:
        if seg.intersects(poly):
            return False
    return True


def dense_visibility_fraction(scene, nav, spacing: float = 0.05) -> float:
    """Endpoint-mode visible fraction from a dense chainage grid, independent
    line-of-sight route (shapely intersection)."""
    coords = nav.line.coords
    cum = nav.line.cum_lengths
    goal = (coords[-1][0], coords[-1][1])
    samples = np.arange(0.0, cum[-1] - spacing * 1e-9, spacing)
    ok = 0
    for s in samples:
        p = _interp_point(coords, cum, float(s))
        if p == goal or shapely_los_clear(scene, p, goal):
            ok += 1
    return ok / len(samples)


def brute_force_grid_fraction(points: np.ndarray, tol: float) -> float:
    """Max fraction of points on a square lattice, brute force over rotation,
    spacing and per-point anchors (independent of the circular-mean method)."""
    n = len(points)
    if n <= 2:
        return 1.0
    diffs = points[:, None, :] - points[None, :, :]
    dists = np.hypot(diffs[..., 0], diffs[..., 1])
    np.fill_diagonal(dists, np.inf)
    median_nn = float(np.median(dists.min(axis=1)))
    best = 0
    spacings = np.arange(max(0.5 * median_nn, 4.0 * tol), 1.5 * median_nn + 1e-9, 0.01)
    for theta in np.arange(0.0, 90.0, 0.25):
        rad = math.radians(theta)
        c, s = math.cos(rad), math.sin(rad)
        u = points[:, 0] * c + points[:, 1] * s
        v = -points[:, 0] * s + points[:, 1] * c
        for spacing in spacings:
            for anchor in range(n):
                du = u - u[anchor]
                dv = v - v[anchor]
                ru = np.abs(du - np.round(du / spacing) * spacing)
                rv = np.abs(dv - np.round(dv / spacing) * spacing)
                count = int(np.sum(np.hypot(ru, rv) <= tol))
                best = max(best, count)
    return best / n


def pairwise_remaining_fraction(scene, nav, spacing: float = 1.0) -> float:
    """remaining_path-mode fraction recomputed with the shapely LOS route at
    the same vantage spacing (checks the sight-test implementation, not the
    sampling)."""
    coords = nav.line.coords
    cum = nav.line.cum_lengths
    samples = np.arange(0.0, cum[-1] - spacing * 1e-9, spacing)
    pts = [_interp_point(coords, cum, float(s)) for s in samples]
    ok = 0
    total = 0
    for i, p in enumerate(pts):
        for q in pts[i + 1 :]:
            total += 1
            if p == q or shapely_los_clear(scene, p, q):
                ok += 1
    return ok / total if total else 1.0
