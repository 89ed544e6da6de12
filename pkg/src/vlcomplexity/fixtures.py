"""Synthetic fixture scenes: an empty corridor, an L-corridor, a zigzag, and
two hospital-wing analogs (a cramped high-complexity wing and a calm low-
complexity wing with an entrance lobby).

All fixtures are generated deterministically in code; the JSON copies under
fixtures/ are exports of these builders.
"""

from __future__ import annotations

import math

import shapely
import shapely.affinity

from .geometry import Point2, Polygon, Polyline, rect_polygon
from .io import SceneDocument
from .scene import Bounds, CorridorSegment, Obstacle, Scene

WALL_THICKNESS = 0.3


def _band_union(corridors: list[CorridorSegment]) -> shapely.geometry.base.BaseGeometry:
    parts = [
        shapely.LineString([c.a.as_tuple(), c.b.as_tuple()]).buffer(
            c.width / 2.0, cap_style="flat", join_style="mitre"
        )
        for c in corridors
    ]
    return shapely.unary_union(parts)


def _end_box(p: Point2, outward: tuple[float, float], half_width: float, depth: float) -> shapely.Polygon:
    ox, oy = outward
    n = math.hypot(ox, oy)
    ox, oy = ox / n, oy / n
    lx, ly = -oy, ox
    corners = [
        (p.x + lx * half_width, p.y + ly * half_width),
        (p.x - lx * half_width, p.y - ly * half_width),
        (p.x - lx * half_width + ox * depth, p.y - ly * half_width + oy * depth),
        (p.x + lx * half_width + ox * depth, p.y + ly * half_width + oy * depth),
    ]
    return shapely.Polygon(corners)


def corridor_walls(
    corridors: list[CorridorSegment],
    line: Polyline,
    thickness: float = WALL_THICKNESS,
) -> list[Polygon]:
    """Wall slabs hugging the walkable band, left open at the path ends."""
    band = _band_union(corridors)
    shell = band.buffer(thickness, join_style="mitre")
    open_depth = thickness * 1.5
    start, end = line.vertices[0], line.vertices[-1]
    start_dir = (line.coords[0] - line.coords[1])
    end_dir = (line.coords[-1] - line.coords[-2])
    max_half = max(c.width for c in corridors) / 2.0 + thickness * 2
    holes = [
        _end_box(start, (float(start_dir[0]), float(start_dir[1])), max_half, open_depth),
        _end_box(end, (float(end_dir[0]), float(end_dir[1])), max_half, open_depth),
    ]
    walls_geom = shell.difference(band)
    for h in holes:
        walls_geom = walls_geom.difference(h)
    polys = (
        list(walls_geom.geoms)
        if walls_geom.geom_type == "MultiPolygon"
        else [walls_geom]
    )
    out = []
    for poly in polys:
        if poly.is_empty or poly.area < 1e-6:
            continue
        if list(poly.interiors):
            raise AssertionError("corridor wall generation produced a ring with holes")
        ring = [Point2(x, y) for x, y in list(poly.exterior.coords)[:-1]]
        out.append(Polygon(ring))
    return out


def _envelope_bounds(*geoms: shapely.geometry.base.BaseGeometry, margin: float = 2.0) -> Bounds:
    union = shapely.unary_union(list(geoms))
    xmin, ymin, xmax, ymax = union.bounds
    return Bounds(xmin - margin, ymin - margin, xmax + margin, ymax + margin)


def _document(scene: Scene, line: Polyline, path_name: str = "main") -> SceneDocument:
    return SceneDocument(scene=scene, path_lines={path_name: line}, path_corridor_ids={path_name: None})


def _block(cx: float, cy: float, w: float, h: float, angle_deg: float = 0.0) -> Polygon:
    poly = rect_polygon(cx - w / 2, cy - h / 2, cx + w / 2, cy + h / 2)
    if angle_deg:
        shp = shapely.affinity.rotate(poly.to_shapely(), angle_deg, origin=(cx, cy))
        return Polygon([Point2(x, y) for x, y in list(shp.exterior.coords)[:-1]])
    return poly


def empty_corridor() -> SceneDocument:
    """Straight comfortable 20 m corridor, nothing in it: the class-1 baseline."""
    line = Polyline([Point2(0, 0), Point2(20, 0)])
    corridors = [CorridorSegment(Point2(0, 0), Point2(20, 0), 3.0, 3.0, "c0")]
    walls = corridor_walls(corridors, line)
    scene = Scene(walls, [], corridors, _envelope_bounds(_band_union(corridors).buffer(WALL_THICKNESS)))
    return _document(scene, line)


def l_corridor() -> SceneDocument:
    """Two 10 m legs meeting at a right angle; the corner fully occludes."""
    line = Polyline([Point2(0, 0), Point2(10, 0), Point2(10, 10)])
    corridors = [
        CorridorSegment(Point2(0, 0), Point2(10, 0), 2.5, 3.0, "c0"),
        CorridorSegment(Point2(10, 0), Point2(10, 10), 2.5, 3.0, "c1"),
    ]
    walls = corridor_walls(corridors, line)
    scene = Scene(walls, [], corridors, _envelope_bounds(_band_union(corridors).buffer(WALL_THICKNESS)))
    return _document(scene, line)


def zigzag() -> SceneDocument:
    """Open hall with a marked zigzag route: three right-angle turns, no occluders."""
    line = Polyline([Point2(0, 0), Point2(5, 0), Point2(5, 5), Point2(10, 5), Point2(10, 10)])
    corridors = [
        CorridorSegment(Point2(0, 0), Point2(5, 0), 2.0, 3.0, "c0"),
        CorridorSegment(Point2(5, 0), Point2(5, 5), 2.0, 3.0, "c1"),
        CorridorSegment(Point2(5, 5), Point2(10, 5), 2.0, 3.0, "c2"),
        CorridorSegment(Point2(10, 5), Point2(10, 10), 2.0, 3.0, "c3"),
    ]
    scene = Scene([], [], corridors, _envelope_bounds(_band_union(corridors)))
    return _document(scene, line)


def old_wing_analog() -> SceneDocument:
    """Cramped hospital-wing analog: narrow, tall, three hard turns, heavy
    scattered clutter; identifies at overall class 4."""
    verts = [Point2(0, 0), Point2(15, 0), Point2(15, 10), Point2(27, 10), Point2(27, 18)]
    line = Polyline(verts)
    width, height = 1.4, 5.5
    corridors = [
        CorridorSegment(verts[i], verts[i + 1], width, height, f"c{i}") for i in range(4)
    ]
    walls = corridor_walls(corridors, line)

    # Planters hug the walls, alternating sides, irregular spacing: cluttered,
    # asymmetric and unordered on purpose. Local frame: (along, lateral).
    placements = [
        # (leg, along, lateral, length, rotated)
        (0, 2.0, 0.37, 2.8),
        (0, 6.1, -0.37, 2.8),
        (0, 11.3, 0.37, 2.8),
        (1, 1.7, -0.37, 2.8),
        (1, 5.4, 0.37, 2.8),
        (1, 8.2, -0.37, 2.8),
        (2, 1.1, 0.37, 2.8),
        (2, 4.9, -0.37, 2.8),
        (2, 8.6, 0.37, 2.8),
        (2, 10.9, -0.37, 2.2),
        (3, 2.3, -0.37, 2.8),
        (3, 5.6, 0.37, 2.2),
    ]
    legs = [
        ((0.0, 0.0), (1.0, 0.0)),
        ((15.0, 0.0), (0.0, 1.0)),
        ((15.0, 10.0), (1.0, 0.0)),
        ((27.0, 10.0), (0.0, 1.0)),
    ]
    obstacles = []
    for k, (leg, along, lateral, length) in enumerate(placements):
        (ox, oy), (dx, dy) = legs[leg]
        cx = ox + dx * along - dy * lateral
        cy = oy + dy * along + dx * lateral
        w, h = (length, 0.62) if dy == 0 else (0.62, length)
        obstacles.append(Obstacle(_block(cx, cy, w, h), 1.1, f"planter-{k}", movable=True))

    scene = Scene(
        walls,
        obstacles,
        corridors,
        _envelope_bounds(_band_union(corridors).buffer(WALL_THICKNESS)),
    )
    return _document(scene, line)


def new_wing_analog() -> SceneDocument:
    """Calm hospital-wing analog with an entrance lobby: wide, gently bent,
    tidy; identifies at overall class 2. Segment 0 is the lobby."""
    a = Point2(0, 0)
    b = Point2(12, 0)
    ang = math.radians(26.0)
    c = Point2(12 + 10 * math.cos(ang), 10 * math.sin(ang))
    d = Point2(c.x + 10, c.y)
    line = Polyline([a, b, c, d])
    corridors = [
        CorridorSegment(a, b, 7.5, 4.5, "lobby"),
        CorridorSegment(b, c, 2.4, 3.0, "c1"),
        CorridorSegment(c, d, 2.4, 3.0, "c2"),
    ]
    walls = corridor_walls(corridors, line)

    benches = [
        Obstacle(_block(3.0, -1.5, 1.0, 1.0), 0.5, "bench-0", movable=True),
        Obstacle(_block(3.0, 1.5, 1.0, 1.0), 0.5, "bench-1", movable=True),
        Obstacle(_block(6.0, -1.5, 1.0, 1.0), 0.5, "bench-2", movable=True),
        Obstacle(_block(6.0, 1.5, 1.0, 1.0), 0.5, "bench-3", movable=True),
    ]
    # Kiosks sit on the benches' 1.5 m lattice so the grid fit stays exact.
    kiosks = [
        Obstacle(_block(10.5, -1.5, 1.5, 1.5), 2.2, "kiosk-0", movable=False),
        Obstacle(_block(10.5, 1.5, 1.5, 1.5), 2.2, "kiosk-1", movable=False),
    ]
    scene = Scene(
        walls,
        benches + kiosks,
        corridors,
        _envelope_bounds(_band_union(corridors).buffer(WALL_THICKNESS)),
    )
    return _document(scene, line)


FIXTURE_BUILDERS = {
    "empty-corridor": empty_corridor,
    "l-corridor": l_corridor,
    "zigzag": zigzag,
    "old-wing-analog": old_wing_analog,
    "new-wing-analog": new_wing_analog,
}


def fixture_document(name: str) -> SceneDocument:
    try:
        return FIXTURE_BUILDERS[name]()
    except KeyError:
        raise KeyError(f"unknown fixture {name!r}; known: {sorted(FIXTURE_BUILDERS)}") from None
