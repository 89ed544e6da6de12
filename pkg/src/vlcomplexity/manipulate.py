"""Morphology manipulation: deterministic per-attribute operators plus a seeded
(mu+lambda) evolutionary search that drives a scene/path toward a target class.

Every modification is expressed as a primitive change step; the ordered step
list is the result's change log and replays bit-exactly onto the input scene.
Objective evaluations run sequentially in genome index order, so results are
independent of any parallel scheduling.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field

import numpy as np
import shapely

from .errors import InfeasibleRequest
from .geometry import Point2, Polygon, Polyline, rect_polygon
from .metrics import (
    Axis,
    fit_circle,
    fit_grid,
    fit_line,
    symmetry_axis_candidates,
)
from .scale import Attribute, ComplexityReport, ScaleConfig, classify, identify
from .scene import CorridorSegment, NavPath, Obstacle, Scene

UNIT_OBSTACLE_SIDE = 1.2
INSERT_SIDES = (0.9, 1.2, 1.5)
UNIT_OBSTACLE_HEIGHT = 1.2
INSERTED_WALL_THICKNESS = 0.25
PATH_CLEARANCE = 0.3
MIRROR_PAIR_TOL = 2.0
PENALTY_WEIGHT = 10.0
CONVERGENCE_TOL = 0.25
DEFAULT_BUDGET = 5000
ES_MU = 8
ES_LAMBDA = 32


# ----------------------------------------------------------------------
# Constraints and requests
# ----------------------------------------------------------------------


@dataclass(frozen=True)
class ConstraintSet:
    """Hard feasibility envelope for manipulation results."""

    endpoints_fixed: bool = True
    min_width: float = 1.2
    max_width: float = 12.0
    min_objects: int = 0
    max_objects: int | None = None
    immovable_tags: tuple[str, ...] = ()

    def __post_init__(self):
        if self.min_width > self.max_width:
            raise InfeasibleRequest(
                f"min_width {self.min_width} exceeds max_width {self.max_width}"
            )
        if self.max_objects is not None and self.min_objects > self.max_objects:
            raise InfeasibleRequest("min_objects exceeds max_objects")

    def object_cap(self, initial_count: int) -> int:
        if self.max_objects is not None:
            return self.max_objects
        return initial_count + 48


@dataclass(frozen=True)
class ManipulationRequest:
    target_class: float = 3.0
    attributes: tuple[Attribute, ...] = tuple(Attribute)
    segment_selector: tuple[int, ...] | None = None
    constraints: ConstraintSet = ConstraintSet()
    seed: int = 0
    budget: int = DEFAULT_BUDGET

    def __post_init__(self):
        if not 1.0 <= self.target_class <= 5.0:
            raise InfeasibleRequest(f"target class {self.target_class} outside [1, 5]")
        if not self.attributes:
            raise InfeasibleRequest("attribute set must be nonempty")
        object.__setattr__(self, "attributes", tuple(Attribute(a) for a in self.attributes))


# ----------------------------------------------------------------------
# Change steps and replay
# ----------------------------------------------------------------------


@dataclass(frozen=True)
class ChangeStep:
    op: str
    params: dict
    attribute: str = ""

    def to_dict(self) -> dict:
        d = {"op": self.op, "params": dict(self.params)}
        if self.attribute:
            d["attribute"] = self.attribute
        return d

    @classmethod
    def from_dict(cls, data: dict) -> ChangeStep:
        return cls(op=data["op"], params=dict(data["params"]), attribute=data.get("attribute", ""))


class _Workspace:
    """Mutable working copy of (scene, line) with original-index addressing.

    Removed obstacles become tombstones so step indices stay stable; the final
    scene compacts them away.
    """

    def __init__(self, scene: Scene, line: Polyline):
        self.base_scene = scene
        self.walls: list[Polygon] = list(scene.walls)
        self.obstacles: list[Obstacle | None] = list(scene.obstacles)
        self.corridors: list[CorridorSegment] = list(scene.corridors)
        self.vertices: list[Point2] = list(line.vertices)

    def line(self) -> Polyline:
        return Polyline(self.vertices)

    def live_obstacles(self) -> list[Obstacle]:
        return [o for o in self.obstacles if o is not None]

    def scene(self) -> Scene:
        return Scene(self.walls, self.live_obstacles(), self.corridors, self.base_scene.bounds)

    def apply(self, step: ChangeStep):
        getattr(self, f"_apply_{step.op}")(**step.params)

    def _apply_relax_turn(self, vertex: int, amount: float):
        prev_p = np.array(self.vertices[vertex - 1].as_tuple())
        v = np.array(self.vertices[vertex].as_tuple())
        next_p = np.array(self.vertices[vertex + 1].as_tuple())
        d_prev = float(np.hypot(*(v - prev_p)))
        d_next = float(np.hypot(*(v - next_p)))
        foot = prev_p + (d_prev / (d_prev + d_next)) * (next_p - prev_p)
        moved = v + amount * (foot - v)
        self.vertices[vertex] = Point2(float(moved[0]), float(moved[1]))

    def _apply_scale_corridor(self, corridor: int, width: float, height: float):
        c = self.corridors[corridor]
        self.corridors[corridor] = CorridorSegment(c.a, c.b, width, height, c.cid)

    def _apply_scale_wall(self, wall: int, factor: float):
        poly = self.walls[wall]
        centre = np.array(poly.centroid.as_tuple())
        centred = poly.coords - centre
        cov = centred.T @ centred
        _, vecs = np.linalg.eigh(cov)
        d = vecs[:, -1]
        along = centred @ d
        scaled = centred + np.outer(along * (factor - 1.0), d)
        pts = scaled + centre
        self.walls[wall] = Polygon([Point2(float(x), float(y)) for x, y in pts])

    def _apply_insert_wall(self, x: float, y: float, dx: float, dy: float, length: float, thickness: float):
        hx, hy = dx * length / 2.0, dy * length / 2.0
        nx, ny = -dy * thickness / 2.0, dx * thickness / 2.0
        ring = [
            Point2(x - hx - nx, y - hy - ny),
            Point2(x + hx - nx, y + hy - ny),
            Point2(x + hx + nx, y + hy + ny),
            Point2(x - hx + nx, y - hy + ny),
        ]
        self.walls.append(Polygon(ring))

    def _apply_remove_obstacle(self, index: int):
        self.obstacles[index] = None

    def _apply_move_obstacle(self, index: int, dx: float, dy: float):
        o = self.obstacles[index]
        self.obstacles[index] = Obstacle(o.footprint.translated(dx, dy), o.height, o.tag, o.movable)

    def _apply_insert_obstacle(self, x: float, y: float, side: float, tag: str):
        half = side / 2.0
        self.obstacles.append(
            Obstacle(
                rect_polygon(x - half, y - half, x + half, y + half),
                UNIT_OBSTACLE_HEIGHT,
                tag,
                movable=True,
            )
        )


def replay_changes(scene: Scene, line: Polyline, steps: list[ChangeStep]) -> tuple[Scene, Polyline]:
    """Apply a change log to a scene/path; bit-identical to the original decode."""
    ws = _Workspace(scene, line)
    for step in steps:
        ws.apply(step)
    return ws.scene(), ws.line()


# ----------------------------------------------------------------------
# Genome and genome space
# ----------------------------------------------------------------------


@dataclass
class ManipulationGenome:
    turn_relax: list[float]
    corridor_width_mult: list[float]
    corridor_height_mult: list[float]
    wall_scale: list[float]
    wall_inserts: list[tuple[bool, float, float, float]]  # active, t, side, reach
    keep: list[bool]
    disp: list[tuple[float, float]]
    snap_grid: list[bool]
    axis_snap: list[bool]
    obj_inserts: list[tuple[bool, float, float]]  # active, x, y

    def clone(self) -> ManipulationGenome:
        return ManipulationGenome(
            turn_relax=list(self.turn_relax),
            corridor_width_mult=list(self.corridor_width_mult),
            corridor_height_mult=list(self.corridor_height_mult),
            wall_scale=list(self.wall_scale),
            wall_inserts=list(self.wall_inserts),
            keep=list(self.keep),
            disp=list(self.disp),
            snap_grid=list(self.snap_grid),
            axis_snap=list(self.axis_snap),
            obj_inserts=list(self.obj_inserts),
        )


N_OBJ_INSERT_SLOTS = 40
N_WALL_INSERT_SLOTS = 6


@dataclass
class GenomeSpace:
    """Mutable-gene inventory for one manipulation run, built on the base scene."""

    scene: Scene
    line: Polyline
    nav: NavPath
    config: ScaleConfig
    constraints: ConstraintSet
    attributes: tuple[Attribute, ...]
    segment_indices: tuple[int, ...]  # segments whose genes are active
    turn_vertices: list[int]
    corridor_idxs: list[int]
    wall_idxs: list[int]
    movable_obs: list[int]
    axis_candidates: list[Axis]
    scope_chainage: tuple[float, float]
    base_report: ComplexityReport | None = None
    _clearance: object = None

    def base_clearance(self):
        """Union of base obstacles and the buffered path: spots to avoid when
        sampling insertion positions."""
        if self._clearance is None:
            parts = [shapely.LineString(self.line.coords).buffer(PATH_CLEARANCE + 0.01)]
            parts += [o.footprint.to_shapely() for o in self.scene.obstacles]
            self._clearance = shapely.unary_union(parts)
        return self._clearance

    def identity(self) -> ManipulationGenome:
        return ManipulationGenome(
            turn_relax=[0.0] * len(self.turn_vertices),
            corridor_width_mult=[1.0] * len(self.corridor_idxs),
            corridor_height_mult=[1.0] * len(self.corridor_idxs),
            wall_scale=[1.0] * len(self.wall_idxs),
            wall_inserts=[(False, 0.5, 1.0, 0.5)] * N_WALL_INSERT_SLOTS,
            keep=[True] * len(self.movable_obs),
            disp=[(0.0, 0.0)] * len(self.movable_obs),
            snap_grid=[False] * len(self.movable_obs),
            axis_snap=[False] * len(self.axis_candidates),
            obj_inserts=[(False, 0.0, 0.0)] * N_OBJ_INSERT_SLOTS,
        )


def build_space(
    scene: Scene,
    path: NavPath,
    config: ScaleConfig,
    constraints: ConstraintSet,
    attributes: tuple[Attribute, ...],
    segment_selector: tuple[int, ...] | None = None,
) -> GenomeSpace:
    if segment_selector is None:
        segments = tuple(range(len(path.segments)))
    else:
        bad = [i for i in segment_selector if not 0 <= i < len(path.segments)]
        if bad:
            raise InfeasibleRequest(f"segment indices out of range: {bad}")
        segments = tuple(sorted(set(segment_selector)))
    selected = [path.segments[i] for i in segments]
    restrict = segment_selector is not None

    if restrict:
        # Only strictly interior (sub-threshold) vertices: relaxing them can
        # never re-segment the path, so segment identity stays stable.
        turn_vertices = [
            v for seg in selected for v in range(seg.start + 1, seg.end)
        ]
    else:
        turn_vertices = list(range(1, len(path.line.vertices) - 1))

    corridor_idxs = sorted(
        {
            scene.corridors.index(seg.corridor)
            for seg in selected
            if seg.corridor is not None
        }
    )

    bands = [seg.band() for seg in selected]
    scope_band = shapely.unary_union(bands)
    if restrict:
        probe = scope_band.buffer(1.0)
        wall_idxs = [i for i, w in enumerate(scene.walls) if w.to_shapely().intersects(probe)]
    else:
        wall_idxs = list(range(len(scene.walls)))

    immovable = set(constraints.immovable_tags)
    movable_obs = [
        i
        for i, o in enumerate(scene.obstacles)
        if o.movable
        and o.tag not in immovable
        and scope_band.intersects(shapely.Point(o.footprint.centroid.as_tuple()))
    ]

    axis_candidates = _scope_axes(scene, path, segments)
    scope_chainage = (
        min(s.chainage_start for s in selected),
        max(s.chainage_end for s in selected),
    )
    return GenomeSpace(
        scene=scene,
        line=path.line,
        nav=path,
        config=config,
        constraints=constraints,
        attributes=attributes,
        segment_indices=segments,
        turn_vertices=turn_vertices,
        corridor_idxs=corridor_idxs,
        wall_idxs=wall_idxs,
        movable_obs=movable_obs,
        axis_candidates=axis_candidates,
        scope_chainage=scope_chainage,
    )


def _scope_axes(scene: Scene, path: NavPath, segments: tuple[int, ...]) -> list[Axis]:
    if len(segments) == len(path.segments):
        return symmetry_axis_candidates(scene, path)
    axes: list[Axis] = []
    for i in segments:
        seg = path.segments[i]
        a, b = seg.line.coords[0], seg.line.coords[-1]
        d = b - a
        n = float(np.hypot(d[0], d[1]))
        if n > 1e-12:
            axes.append(Axis(float(a[0]), float(a[1]), float(d[0] / n), float(d[1] / n)))
    return axes


# ----------------------------------------------------------------------
# Decoding: genome -> (scene', line', change log, violations)
# ----------------------------------------------------------------------


@dataclass
class Decoded:
    scene: Scene
    line: Polyline
    steps: list[ChangeStep]
    violations: float


def _scope_band_current(space: GenomeSpace, ws: _Workspace) -> shapely.geometry.base.BaseGeometry:
    line = ws.line()
    nav = NavPath(line, tuple(ws.corridors), space.config.turn_threshold_deg)
    if len(space.segment_indices) == len(space.nav.segments):
        segs = nav.segments
    else:
        lo, hi = space.scope_chainage
        segs = [
            s
            for s in nav.segments
            if s.chainage_end > lo + 1e-9 and s.chainage_start < hi - 1e-9
        ]
    bands = [s.band() for s in segs if s.corridor is not None]
    return shapely.unary_union(bands) if bands else shapely.Polygon()


def decode(space: GenomeSpace, genome: ManipulationGenome) -> Decoded:
    """Expand a genome into concrete change steps, applying them as they are
    emitted so later steps see the evolving state; replaying the same steps
    reproduces the output exactly."""
    ws = _Workspace(space.scene, space.line)
    steps: list[ChangeStep] = []

    def emit(op: str, attribute: str, **params):
        step = ChangeStep(op=op, params=params, attribute=attribute)
        ws.apply(step)
        steps.append(step)

    # 1. Turn relaxations, ascending vertex index.
    for v, t in zip(space.turn_vertices, genome.turn_relax):
        if t > 1e-12:
            emit("relax_turn", "rotation", vertex=v, amount=float(min(t, 1.0)))

    # 2. Corridor width/height scaling (width repaired into constraint bounds).
    for k, ci in enumerate(space.corridor_idxs):
        wf = genome.corridor_width_mult[k]
        hf = genome.corridor_height_mult[k]
        if abs(wf - 1.0) <= 1e-12 and abs(hf - 1.0) <= 1e-12:
            continue
        base = space.scene.corridors[ci]
        new_w = min(max(base.width * wf, space.constraints.min_width), space.constraints.max_width)
        new_h = base.height * min(max(hf, 0.5), 2.0)
        if abs(new_w - base.width) <= 1e-12 and abs(new_h - base.height) <= 1e-12:
            continue
        emit("scale_corridor", "size", corridor=ci, width=float(new_w), height=float(new_h))

    # 3. Wall shortening.
    for k, wi in enumerate(space.wall_idxs):
        f = genome.wall_scale[k]
        if f < 1.0 - 1e-12:
            emit("scale_wall", "visibility", wall=wi, factor=float(max(f, 0.05)))

    # 4. Wall insertion slots (partitions jutting from a corridor side, leaving
    # the path clear).
    line_now = ws.line()
    path_buffer = shapely.LineString(line_now.coords).buffer(PATH_CLEARANCE)
    for active, t, side, reach in genome.wall_inserts:
        if not active:
            continue
        lo, hi = space.scope_chainage
        chain = lo + min(max(t, 0.0), 1.0) * (hi - lo)
        p = line_now.point_at(chain)
        i = int(np.searchsorted(line_now.cum_lengths, chain, side="right")) - 1
        i = min(max(i, 0), len(line_now.edge_lengths) - 1)
        d = (line_now.coords[i + 1] - line_now.coords[i]) / line_now.edge_lengths[i]
        nx, ny = -float(d[1]), float(d[0])
        nav_now = NavPath(line_now, tuple(ws.corridors), space.config.turn_threshold_deg)
        seg = next(
            (s for s in nav_now.segments if s.chainage_start - 1e-9 <= chain <= s.chainage_end + 1e-9),
            None,
        )
        if seg is None or seg.corridor is None:
            continue
        w = seg.corridor.width
        max_reach = w / 2.0 - PATH_CLEARANCE - 0.05
        if max_reach < 0.15:
            continue
        length = min(max(reach, 0.0), 1.0) * max_reach
        if length < 0.15:
            continue
        sgn = 1.0 if side >= 0 else -1.0
        cx = p.x + sgn * (w / 2.0 - length / 2.0) * nx
        cy = p.y + sgn * (w / 2.0 - length / 2.0) * ny
        probe = shapely.Point(cx, cy).buffer(length / 2.0)
        if probe.intersects(path_buffer):
            continue
        if not (
            space.scene.bounds.xmin <= cx <= space.scene.bounds.xmax
            and space.scene.bounds.ymin <= cy <= space.scene.bounds.ymax
        ):
            continue
        emit(
            "insert_wall",
            "visibility",
            x=float(cx),
            y=float(cy),
            dx=float(nx),
            dy=float(ny),
            length=float(length),
            thickness=INSERTED_WALL_THICKNESS,
        )

    # 5. Removals.
    for k, oi in enumerate(space.movable_obs):
        if not genome.keep[k]:
            emit("remove_obstacle", "clutter", index=oi)

    # 6. Displacements.
    for k, oi in enumerate(space.movable_obs):
        dx, dy = genome.disp[k]
        if genome.keep[k] and (abs(dx) > 1e-12 or abs(dy) > 1e-12):
            emit("move_obstacle", "symmetry", index=oi, dx=float(dx), dy=float(dy))

    # 7. Object insertions (inside the scope band, clear of the path and walls).
    scope = _scope_band_current(space, ws)
    scope_cached = scope
    wall_union = shapely.unary_union([w.to_shapely() for w in ws.walls]) if ws.walls else shapely.Polygon()
    path_buffer = shapely.LineString(ws.line().coords).buffer(PATH_CLEARANCE)
    inserted = 0
    for slot, (active, x, y) in enumerate(genome.obj_inserts):
        if not active:
            continue
        side = INSERT_SIDES[slot % len(INSERT_SIDES)]
        half = side / 2.0
        foot = shapely.box(x - half, y - half, x + half, y + half)
        if not scope.contains(foot):
            continue
        if foot.intersects(path_buffer) or foot.intersects(wall_union):
            continue
        blocked = False
        for o in ws.obstacles:
            if o is not None and foot.intersects(o.footprint.to_shapely()):
                blocked = True
                break
        if blocked:
            continue
        emit(
            "insert_obstacle",
            "clutter",
            x=float(x),
            y=float(y),
            side=side,
            tag=f"inserted-{slot}",
        )
        inserted += 1

    # 8. Template snaps: one fit over the current in-scope centroids, then snap
    # each flagged object to its nearest template node.
    flagged = [k for k, s in enumerate(genome.snap_grid) if s and genome.keep[k]]
    if flagged:
        scope = scope_cached
        pool = [
            (i, o)
            for i, o in enumerate(ws.obstacles)
            if o is not None and scope.intersects(shapely.Point(o.footprint.centroid.as_tuple()))
        ]
        if pool:
            pts = np.array([o.footprint.centroid.as_tuple() for _, o in pool])
            targets = _template_targets(pts, space.config.order_residual_tolerance)
            centroid_by_idx = {i: (o.footprint.centroid, pos) for (i, o), pos in zip(pool, range(len(pool)))}
            for k in flagged:
                oi = space.movable_obs[k]
                if oi in centroid_by_idx:
                    c, pos = centroid_by_idx[oi]
                    tx, ty = targets[pos]
                    if abs(tx - c.x) > 1e-12 or abs(ty - c.y) > 1e-12:
                        emit("move_obstacle", "order", index=oi, dx=float(tx - c.x), dy=float(ty - c.y))

    # 9. Mirror snaps about active candidate axes.
    for a_idx, active in enumerate(genome.axis_snap):
        if not active:
            continue
        axis = space.axis_candidates[a_idx]
        for oi, dx, dy in _mirror_moves(ws, space, axis):
            emit("move_obstacle", "symmetry", index=oi, dx=dx, dy=dy)

    scene_out = ws.scene()
    line_out = ws.line()
    violations = _violations(space, scene_out, line_out)
    return Decoded(scene=scene_out, line=line_out, steps=steps, violations=violations)


def _template_targets(pts: np.ndarray, tol: float) -> list[tuple[float, float]]:
    """Nearest-node targets under the best-fitting template (grid precedence)."""
    grid = fit_grid(pts, tol)
    gfrac = sum(1 for r in grid.residuals if r <= tol) / len(pts)
    line = fit_line(pts)
    lfrac = sum(1 for r in line.residuals if r <= tol) / len(pts)
    circ = fit_circle(pts)
    cfrac = (sum(1 for r in circ.residuals if r <= tol) / len(pts)) if circ else -1.0
    best = max(
        (("grid", gfrac), ("line", lfrac), ("circle", cfrac)),
        key=lambda kv: (kv[1], -("grid", "line", "circle").index(kv[0])),
    )[0]
    targets = []
    if best == "grid":
        rad = math.radians(grid.theta_deg)
        c, s = math.cos(rad), math.sin(rad)
        for x, y in pts:
            u = x * c + y * s
            v = -x * s + y * c
            su = grid.offset[0] + round((u - grid.offset[0]) / grid.spacing) * grid.spacing
            sv = grid.offset[1] + round((v - grid.offset[1]) / grid.spacing) * grid.spacing
            targets.append((su * c - sv * s, su * s + sv * c))
    elif best == "line":
        ox, oy = line.origin
        dx, dy = line.direction
        for x, y in pts:
            t = (x - ox) * dx + (y - oy) * dy
            targets.append((ox + t * dx, oy + t * dy))
    else:
        cx, cy = circ.center
        for x, y in pts:
            d = math.hypot(x - cx, y - cy)
            if d < 1e-12:
                targets.append((cx + circ.radius, cy))
            else:
                targets.append((cx + (x - cx) * circ.radius / d, cy + (y - cy) * circ.radius / d))
    return targets


def _mirror_moves(ws: _Workspace, space: GenomeSpace, axis: Axis) -> list[tuple[int, float, float]]:
    """Mirror-average movable objects about the axis; singletons snap onto it."""
    movable = [
        (i, o)
        for i, o in enumerate(ws.obstacles)
        if o is not None and o.movable and o.tag not in set(space.constraints.immovable_tags)
    ]
    moves: list[tuple[int, float, float]] = []
    consumed: set[int] = set()
    for i, o in movable:
        if i in consumed:
            continue
        p = o.footprint.centroid
        rx, ry = axis.reflect_point(p.x, p.y)
        best_j, best_d = None, MIRROR_PAIR_TOL
        for j, oj in movable:
            if j == i or j in consumed:
                continue
            q = oj.footprint.centroid
            d = math.hypot(q.x - rx, q.y - ry)
            if d < best_d:
                best_j, best_d = j, d
        if best_j is not None:
            oj = ws.obstacles[best_j]
            q = oj.footprint.centroid
            mx, my = axis.reflect_point(q.x, q.y)
            qx, qy = (p.x + mx) / 2.0, (p.y + my) / 2.0
            tx, ty = axis.reflect_point(qx, qy)
            if abs(qx - p.x) > 1e-12 or abs(qy - p.y) > 1e-12:
                moves.append((i, qx - p.x, qy - p.y))
            if abs(tx - q.x) > 1e-12 or abs(ty - q.y) > 1e-12:
                moves.append((best_j, tx - q.x, ty - q.y))
            consumed.update((i, best_j))
        else:
            fx, fy = (p.x + rx) / 2.0, (p.y + ry) / 2.0
            if abs(fx - p.x) > 1e-12 or abs(fy - p.y) > 1e-12:
                moves.append((i, fx - p.x, fy - p.y))
            consumed.add(i)
    return moves


def _violations(space: GenomeSpace, scene: Scene, line: Polyline) -> float:
    total = 0.0
    ls = shapely.LineString(line.coords)
    for poly in [w.to_shapely() for w in scene.walls] + [
        o.footprint.to_shapely() for o in scene.obstacles
    ]:
        if ls.crosses(poly) or ls.within(poly):
            total += 1.0
    b = scene.bounds
    for coords in (
        [w.coords for w in scene.walls]
        + [o.footprint.coords for o in scene.obstacles]
        + [line.coords]
    ):
        total += float(np.sum(np.maximum(0.0, b.xmin - coords[:, 0])))
        total += float(np.sum(np.maximum(0.0, coords[:, 0] - b.xmax)))
        total += float(np.sum(np.maximum(0.0, b.ymin - coords[:, 1])))
        total += float(np.sum(np.maximum(0.0, coords[:, 1] - b.ymax)))
    count = len(scene.obstacles)
    cap = space.constraints.object_cap(len(space.scene.obstacles))
    if count < space.constraints.min_objects:
        total += float(space.constraints.min_objects - count)
    elif count > cap:
        total += float(count - cap)
    return total


# ----------------------------------------------------------------------
# Mutation: one small operator-flavoured move per child
# ----------------------------------------------------------------------


def _family_available(space: GenomeSpace, attr: Attribute) -> bool:
    if attr is Attribute.ROTATION:
        return bool(space.turn_vertices)
    if attr is Attribute.SIZE:
        return bool(space.corridor_idxs)
    if attr is Attribute.VISIBILITY:
        return bool(space.wall_idxs) or N_WALL_INSERT_SLOTS > 0
    if attr in (Attribute.SYMMETRY, Attribute.ORDER):
        return bool(space.movable_obs) or bool(space.axis_candidates)
    if attr is Attribute.CLUTTER:
        return bool(space.movable_obs) or N_OBJ_INSERT_SLOTS > 0
    return False


def _insert_side(slot: int) -> float:
    return INSERT_SIDES[slot % len(INSERT_SIDES)]


def _sample_in_scope(
    space: GenomeSpace,
    rng: random.Random,
    side: float = max(INSERT_SIDES),
    occupied: list[tuple[float, float, float]] | None = None,
) -> tuple[float, float] | None:
    """Deterministic rejection sample of an insertion spot inside the scope
    band, clear of the path, the base obstacles, and already-claimed spots."""
    segs = [space.nav.segments[i] for i in space.segment_indices]
    weights = [max(s.length, 1e-6) for s in segs]
    total = sum(weights)
    half = side / 2.0
    clearance = space.base_clearance()
    for _ in range(24):
        r = rng.uniform(0.0, total)
        acc = 0.0
        seg = segs[-1]
        for s, w in zip(segs, weights):
            acc += w
            if r <= acc:
                seg = s
                break
        chain = rng.uniform(
            min(seg.chainage_start + half, seg.chainage_end),
            max(seg.chainage_end - half, seg.chainage_start),
        )
        p = space.line.point_at(chain)
        i = int(np.searchsorted(space.line.cum_lengths, chain, side="right")) - 1
        i = min(max(i, 0), len(space.line.edge_lengths) - 1)
        d = (space.line.coords[i + 1] - space.line.coords[i]) / space.line.edge_lengths[i]
        width = seg.width if seg.corridor else 2.0
        margin = half + 0.05
        span = max(width / 2.0 - margin, 0.0)
        lateral = rng.uniform(-1.0, 1.0) * span
        x = float(p.x - d[1] * lateral)
        y = float(p.y + d[0] * lateral)
        if occupied and any(
            abs(x - ox) < (side + oside) / 2.0 and abs(y - oy) < (side + oside) / 2.0
            for ox, oy, oside in occupied
        ):
            continue
        if not clearance.intersects(shapely.box(x - half, y - half, x + half, y + half)):
            return (x, y)
    return None


def _sample_any_side(
    space: GenomeSpace,
    rng: random.Random,
    occupied: list[tuple[float, float, float]],
) -> tuple[float, float, float] | None:
    """Smallest-first attempt over the insert sizes; narrow corridors only
    admit the small ones."""
    for side in sorted(INSERT_SIDES):
        pos = _sample_in_scope(space, rng, side, occupied)
        if pos is not None:
            return (pos[0], pos[1], side)
    return None


def _claimed_spots(genome: ManipulationGenome) -> list[tuple[float, float, float]]:
    return [
        (x, y, _insert_side(k))
        for k, (active, x, y) in enumerate(genome.obj_inserts)
        if active
    ]


def mutate(space: GenomeSpace, genome: ManipulationGenome, rng: random.Random) -> ManipulationGenome:
    """Apply one randomly chosen operator-flavoured move of small magnitude."""
    child = genome.clone()
    families = [a for a in space.attributes if _family_available(space, a)]
    if not families:
        return child
    attr = families[rng.randrange(len(families))]

    if attr is Attribute.ROTATION:
        k = rng.randrange(len(child.turn_relax))
        child.turn_relax[k] = min(1.0, max(0.0, child.turn_relax[k] + rng.uniform(-0.3, 0.3)))
    elif attr is Attribute.SIZE:
        k = rng.randrange(len(child.corridor_width_mult))
        if rng.random() < 0.5:
            child.corridor_width_mult[k] = min(
                2.0, max(0.5, child.corridor_width_mult[k] * math.exp(rng.uniform(-0.25, 0.25)))
            )
        else:
            child.corridor_height_mult[k] = min(
                2.0, max(0.5, child.corridor_height_mult[k] * math.exp(rng.uniform(-0.25, 0.25)))
            )
    elif attr is Attribute.VISIBILITY:
        if child.wall_scale and rng.random() < 0.5:
            k = rng.randrange(len(child.wall_scale))
            child.wall_scale[k] = min(1.0, max(0.05, child.wall_scale[k] + rng.uniform(-0.3, 0.3)))
        else:
            k = rng.randrange(N_WALL_INSERT_SLOTS)
            active, t, side, reach = child.wall_inserts[k]
            if active and rng.random() < 0.4:
                child.wall_inserts[k] = (False, t, side, reach)
            else:
                child.wall_inserts[k] = (
                    True,
                    rng.random(),
                    1.0 if rng.random() < 0.5 else -1.0,
                    rng.uniform(0.3, 1.0),
                )
    elif attr is Attribute.SYMMETRY:
        if space.axis_candidates and (not space.movable_obs or rng.random() < 0.5):
            k = rng.randrange(len(child.axis_snap))
            child.axis_snap[k] = not child.axis_snap[k]
        elif space.movable_obs:
            k = rng.randrange(len(child.disp))
            dx, dy = child.disp[k]
            child.disp[k] = (dx + rng.gauss(0.0, 0.4), dy + rng.gauss(0.0, 0.4))
    elif attr is Attribute.ORDER:
        if space.movable_obs and rng.random() < 0.6:
            k = rng.randrange(len(child.snap_grid))
            child.snap_grid[k] = not child.snap_grid[k]
        elif space.movable_obs:
            k = rng.randrange(len(child.disp))
            dx, dy = child.disp[k]
            child.disp[k] = (dx + rng.gauss(0.0, 0.5), dy + rng.gauss(0.0, 0.5))
    elif attr is Attribute.CLUTTER:
        if space.movable_obs and rng.random() < 0.35:
            k = rng.randrange(len(child.keep))
            child.keep[k] = not child.keep[k]
        elif rng.random() < 0.25:
            actives = [k for k, (a, _, _) in enumerate(child.obj_inserts) if a]
            if actives:
                k = actives[rng.randrange(len(actives))]
                _, x, y = child.obj_inserts[k]
                child.obj_inserts[k] = (False, x, y)
        else:
            # One clutter move may place a small batch of unit objects.
            occupied = _claimed_spots(child)
            for _ in range(1 + rng.randrange(3)):
                free = [k for k, (a, _, _) in enumerate(child.obj_inserts) if not a]
                if not free:
                    break
                k = free[rng.randrange(len(free))]
                side = _insert_side(k)
                pos = _sample_in_scope(space, rng, side, occupied)
                if pos is not None:
                    child.obj_inserts[k] = (True, pos[0], pos[1])
                    occupied.append((pos[0], pos[1], side))
    return child


# ----------------------------------------------------------------------
# (mu + lambda) evolutionary engine
# ----------------------------------------------------------------------


@dataclass
class _Candidate:
    genome: ManipulationGenome
    decoded: Decoded
    report: ComplexityReport | None
    raw_objective: float
    penalized: float
    feasible: bool
    birth: int

    def sort_key(self) -> tuple:
        return (self.penalized, len(self.decoded.steps), self.birth)


@dataclass
class EvolveOutcome:
    best: _Candidate
    evaluations: int
    generations: int
    best_history: list[float]
    converged: bool


def _primed_genomes(space: GenomeSpace, rng: random.Random) -> list[ManipulationGenome]:
    """Operator-flavoured starting points: a bulk-insertion genome and a
    scatter genome. Poor candidates are selected away immediately, strong ones
    shortcut the search by several generations."""
    primed: list[ManipulationGenome] = []
    if Attribute.CLUTTER in space.attributes:
        g = space.identity()
        filled = 0
        occupied: list[tuple[float, float, float]] = []
        for k in range(N_OBJ_INSERT_SLOTS):
            side = _insert_side(k)
            pos = _sample_in_scope(space, rng, side, occupied)
            if pos is not None:
                g.obj_inserts[k] = (True, pos[0], pos[1])
                occupied.append((pos[0], pos[1], side))
                filled += 1
            if filled >= 32:
                break
        if filled:
            primed.append(g)
    if space.movable_obs and (
        Attribute.SYMMETRY in space.attributes or Attribute.ORDER in space.attributes
    ):
        g = space.identity()
        for k in range(len(g.disp)):
            g.disp[k] = (rng.gauss(0.0, 1.2), rng.gauss(0.0, 1.2))
        primed.append(g)
    return primed


def _evolve(
    space: GenomeSpace,
    objective,
    converged,
    seed: int,
    budget: int,
    mu: int = ES_MU,
    lam: int = ES_LAMBDA,
) -> EvolveOutcome:
    """Truncation-selection (mu+lambda) search, fully deterministic per seed.

    objective(report, decoded) -> float; converged(report, f) -> bool. The
    returned best candidate is always feasible (the identity genome is).
    """
    rng = random.Random(seed)
    birth = 0
    evals = 0

    def evaluate(genome: ManipulationGenome) -> _Candidate:
        nonlocal birth, evals
        decoded = decode(space, genome)
        evals += 1
        try:
            nav = NavPath(decoded.line, decoded.scene.corridors, space.config.turn_threshold_deg)
            report = identify(decoded.scene, nav, space.config)
            raw = objective(report, decoded)
        except Exception:
            report = None
            raw = 1e6
        feasible = decoded.violations <= 0.0 and report is not None
        cand = _Candidate(
            genome=genome,
            decoded=decoded,
            report=report,
            raw_objective=raw,
            penalized=raw + PENALTY_WEIGHT * decoded.violations,
            feasible=feasible,
            birth=birth,
        )
        birth += 1
        return cand

    identity = evaluate(space.identity())
    if not identity.feasible:
        raise InfeasibleRequest(
            "input scene/path violates the hard constraints "
            f"(violation units: {identity.decoded.violations})"
        )
    best = identity
    history = [best.raw_objective]
    if converged(identity.report, identity.raw_objective):
        return EvolveOutcome(best=identity, evaluations=evals, generations=0, best_history=history, converged=True)

    parents = [identity]
    for primed in _primed_genomes(space, rng):
        if len(parents) >= mu or evals >= budget:
            break
        parents.append(evaluate(primed))
    while len(parents) < mu and evals < budget:
        parents.append(evaluate(mutate(space, identity.genome, rng)))
    for cand in parents:
        if cand.feasible and cand.sort_key() < best.sort_key():
            best = cand

    generations = 0
    done = converged(best.report, best.raw_objective)
    while not done and evals + lam <= budget:
        generations += 1
        children = []
        for _ in range(lam):
            parent = parents[rng.randrange(len(parents))]
            children.append(evaluate(mutate(space, parent.genome, rng)))
        pool = parents + children
        pool.sort(key=_Candidate.sort_key)
        parents = pool[:mu]
        for cand in parents:
            if cand.feasible and cand.sort_key() < best.sort_key():
                best = cand
        history.append(best.raw_objective)
        done = converged(best.report, best.raw_objective)
    return EvolveOutcome(
        best=best, evaluations=evals, generations=generations, best_history=history, converged=done
    )


# ----------------------------------------------------------------------
# Results
# ----------------------------------------------------------------------


@dataclass
class ManipulationResult:
    """Outcome of a manipulation run: modified morphology, reports, replayable
    change log and solver bookkeeping."""

    scene: Scene
    line: Polyline
    nav_path: NavPath
    before_report: ComplexityReport
    after_report: ComplexityReport
    steps: list[ChangeStep]
    objective: float
    evaluations: int
    generations: int
    converged: bool
    best_history: list[float] = field(default_factory=list)

    @property
    def best_effort(self) -> bool:
        return not self.converged

    def change_log(self) -> list[dict]:
        return [s.to_dict() for s in self.steps]

    def to_dict(self) -> dict:
        return {
            "objective": self.objective,
            "evaluations": self.evaluations,
            "generations": self.generations,
            "converged": self.converged,
            "best_history": list(self.best_history),
            "change_log": self.change_log(),
            "before_report": self.before_report.to_dict(),
            "after_report": self.after_report.to_dict(),
        }


def _result_from_outcome(
    space: GenomeSpace, outcome: EvolveOutcome, before: ComplexityReport
) -> ManipulationResult:
    best = outcome.best
    # Returned candidates must satisfy the hard constraints; the identity
    # genome is feasible, so a feasible best always exists.
    assert best.feasible and best.decoded.violations <= 0.0
    nav = NavPath(best.decoded.line, best.decoded.scene.corridors, space.config.turn_threshold_deg)
    after = identify(best.decoded.scene, nav, space.config)
    return ManipulationResult(
        scene=best.decoded.scene,
        line=best.decoded.line,
        nav_path=nav,
        before_report=before,
        after_report=after,
        steps=best.decoded.steps,
        objective=best.raw_objective,
        evaluations=outcome.evaluations,
        generations=outcome.generations,
        converged=outcome.converged,
        best_history=outcome.best_history,
    )


# ----------------------------------------------------------------------
# Public entry points
# ----------------------------------------------------------------------


def _score_pseudo_mean(report: ComplexityReport) -> float:
    """Continuous stand-in for the aggregate: 1 + 4 * mean attribute score.

    Class means move in 1/6 jumps; this term gives the search gradient between
    jumps and only ever acts as a tie-break (weight << one class unit)."""
    scores = [r.score for r in report.attributes.values()]
    return 1.0 + 4.0 * sum(scores) / len(scores)


def manipulate(
    scene: Scene,
    path: NavPath,
    request: ManipulationRequest,
    config: ScaleConfig | None = None,
) -> ManipulationResult:
    """Drive the aggregate complexity class toward request.target_class.

    Stops when |aggregate_mean - target| <= 0.25 or the evaluation budget is
    exhausted; the result is always the best feasible candidate found and its
    change log replays deterministically onto the input scene.
    """
    config = config or ScaleConfig()
    space = build_space(
        scene, path, config, request.constraints, request.attributes, request.segment_selector
    )
    before = identify(scene, path, config)
    target = request.target_class

    def objective(report: ComplexityReport, decoded: Decoded) -> float:
        return abs(report.aggregate_mean - target) + 0.08 * abs(_score_pseudo_mean(report) - target)

    def converged(report: ComplexityReport | None, f: float) -> bool:
        return report is not None and abs(report.aggregate_mean - target) <= CONVERGENCE_TOL

    outcome = _evolve(space, objective, converged, request.seed, request.budget)
    return _result_from_outcome(space, outcome, before)


def manipulate_segment(
    scene: Scene,
    path: NavPath,
    segment_index: int,
    attribute: Attribute | str,
    segment_target: int,
    overall_target: float = 3.0,
    *,
    constraints: ConstraintSet | None = None,
    seed: int = 0,
    budget: int = DEFAULT_BUDGET,
    config: ScaleConfig | None = None,
) -> ManipulationResult:
    """Drive one segment's attribute class to segment_target while keeping the
    overall aggregate near overall_target. Genes are restricted to the segment."""
    config = config or ScaleConfig()
    attribute = Attribute(attribute)
    constraints = constraints or ConstraintSet()
    if not 0 <= segment_index < len(path.segments):
        raise InfeasibleRequest(f"segment index {segment_index} out of range")
    if not 1 <= int(segment_target) <= 5:
        raise InfeasibleRequest(f"segment target {segment_target} outside [1, 5]")
    if len(path.segments) == 1:
        # Single segment: the segment class and the overall target must agree.
        if abs(segment_target - overall_target) > 0.5:
            raise InfeasibleRequest(
                "single-segment path: segment target and overall target must coincide"
            )
    space = build_space(
        scene, path, config, constraints, tuple(Attribute), (segment_index,)
    )
    before = identify(scene, path, config)
    edges = config.bin_edges
    lo = 0.0 if segment_target == 1 else edges[segment_target - 2]
    hi = 1.0 if segment_target == 5 else edges[segment_target - 1]
    mid = (lo + hi) / 2.0

    def seg_attr(report: ComplexityReport):
        return report.segments[segment_index].attributes[attribute.value]

    def objective(report: ComplexityReport, decoded: Decoded) -> float:
        res = seg_attr(report)
        return (
            abs(res.cls - segment_target)
            + abs(report.aggregate_mean - overall_target)
            + 0.1 * abs(res.score - mid)
            + 0.08 * abs(_score_pseudo_mean(report) - overall_target)
        )

    def converged(report: ComplexityReport | None, f: float) -> bool:
        if report is None or segment_index >= len(report.segments):
            return False
        return (
            seg_attr(report).cls == segment_target
            and abs(report.aggregate_mean - overall_target) <= CONVERGENCE_TOL
        )

    outcome = _evolve(space, objective, converged, seed, budget)
    return _result_from_outcome(space, outcome, before)


# ----------------------------------------------------------------------
# Deterministic per-attribute operators
# ----------------------------------------------------------------------


@dataclass
class OpResult:
    """Outcome of one deterministic operator: edited morphology, the steps that
    produce it, and whether the target bin was reached (best effort otherwise)."""

    scene: Scene
    line: Polyline
    steps: list[ChangeStep]
    reached_target: bool

    @property
    def best_effort(self) -> bool:
        return not self.reached_target


def _path_clear(scene: Scene, line: Polyline) -> bool:
    ls = shapely.LineString(line.coords)
    for poly in [w.to_shapely() for w in scene.walls] + [
        o.footprint.to_shapely() for o in scene.obstacles
    ]:
        if ls.crosses(poly) or ls.within(poly):
            return False
    return True


def _rotation_class(line: Polyline, config: ScaleConfig) -> int:
    angles = line.turn_angles_deg()
    acc = float(np.sum(angles[1:-1])) if len(angles) > 2 else 0.0
    rate = acc * 100.0 / line.length
    return classify(min(1.0, rate / config.rotation_degrees_cap), config)


def op_rotation_simplify(
    scene: Scene,
    path: NavPath,
    target_class: int,
    config: ScaleConfig | None = None,
    constraints: ConstraintSet | None = None,
) -> OpResult:
    """Straighten the path by relaxing its sharpest turns toward the chord of
    their neighbours until the rotation class drops to the target; endpoints
    never move and relaxations that would push the path into walls or
    obstacles are rolled back."""
    config = config or ScaleConfig()
    n = len(path.line.vertices)
    relax = {v: 0.0 for v in range(1, n - 1)}
    capped: set[int] = set()

    def steps_for(tvec: dict[int, float]) -> list[ChangeStep]:
        return [
            ChangeStep("relax_turn", {"vertex": v, "amount": t}, "rotation")
            for v, t in sorted(tvec.items())
            if t > 1e-12
        ]

    line = path.line
    reached = _rotation_class(line, config) <= target_class
    for _ in range(400):
        if reached:
            break
        angles = line.turn_angles_deg()
        candidates = [
            v for v in range(1, n - 1) if v not in capped and relax[v] < 1.0 - 1e-9
        ]
        if not candidates:
            break
        v = max(candidates, key=lambda i: (angles[i], -i))
        old = relax[v]
        relax[v] = min(1.0, old + 0.2)
        _, new_line = replay_changes(scene, path.line, steps_for(relax))
        if not _path_clear(scene, new_line):
            relax[v] = old
            capped.add(v)
            continue
        line = new_line
        reached = _rotation_class(line, config) <= target_class
    steps = steps_for(relax)
    _, final_line = replay_changes(scene, path.line, steps)
    return OpResult(scene=scene, line=final_line, steps=steps, reached_target=reached)


def _target_band(target_class: int, config: ScaleConfig) -> tuple[float, float]:
    edges = config.bin_edges
    lo = 0.0 if target_class == 1 else edges[target_class - 2]
    hi = 1.0 if target_class == 5 else edges[target_class - 1]
    return lo, hi


def op_size_fit(
    scene: Scene,
    path: NavPath,
    target_class: int,
    config: ScaleConfig | None = None,
    constraints: ConstraintSet | None = None,
) -> OpResult:
    """Scale corridor cross-sections toward (or away from) the comfort band so
    the size class matches the target, respecting the width constraints."""
    from .metrics import size_metric
    from .scale import Attribute as _A, normalize as _norm

    config = config or ScaleConfig()
    constraints = constraints or ConstraintSet()
    measure = size_metric(scene, path)
    current = classify(_norm(_A.SIZE, (measure.mean_width, measure.mean_height), config), config)
    if current == target_class:
        return OpResult(scene=scene, line=path.line, steps=[], reached_target=True)

    lo, hi = _target_band(target_class, config)
    dev = 0.0 if target_class == 1 else (lo + hi) / 2.0 * config.size_deviation_cap
    w_lo, w_hi = config.width_comfort
    h_lo, h_hi = config.height_comfort

    if dev == 0.0:
        widths = {c.cid: min(max(c.width, w_lo), w_hi) for c in scene.corridors}
        heights = {c.cid: min(max(c.height, h_lo), h_hi) for c in scene.corridors}
    else:
        # Prefer the narrow side (cramped corridors), fall back to the wide
        # side, then to the height channel when width constraints pin us.
        w_narrow = w_lo * (1.0 - dev)
        w_wide = w_hi * (1.0 + dev)
        if w_narrow >= constraints.min_width:
            target_w = w_narrow
        elif w_wide <= constraints.max_width:
            target_w = w_wide
        else:
            target_w = None
        if target_w is not None:
            widths = {c.cid: target_w for c in scene.corridors}
            heights = {c.cid: min(max(c.height, h_lo), h_hi) for c in scene.corridors}
        else:
            widths = {c.cid: min(max(c.width, w_lo), w_hi) for c in scene.corridors}
            heights = {c.cid: h_lo * (1.0 - dev) for c in scene.corridors}

    steps = []
    ws = _Workspace(scene, path.line)
    for i, c in enumerate(scene.corridors):
        new_w = min(max(widths[c.cid], constraints.min_width), constraints.max_width)
        new_h = max(heights[c.cid], 0.5)
        if abs(new_w - c.width) > 1e-12 or abs(new_h - c.height) > 1e-12:
            step = ChangeStep(
                "scale_corridor", {"corridor": i, "width": float(new_w), "height": float(new_h)}, "size"
            )
            ws.apply(step)
            steps.append(step)
    new_scene = ws.scene()
    new_nav = NavPath(path.line, new_scene.corridors, config.turn_threshold_deg)
    after = size_metric(new_scene, new_nav)
    achieved = classify(_norm(_A.SIZE, (after.mean_width, after.mean_height), config), config)
    return OpResult(
        scene=new_scene, line=path.line, steps=steps, reached_target=achieved == target_class
    )


def _symmetry_class(scene: Scene, nav: NavPath, config: ScaleConfig) -> int:
    from .metrics import symmetry_metric

    return classify(min(1.0, max(0.0, 1.0 - symmetry_metric(scene, nav).best_score)), config)


def op_symmetrize(
    scene: Scene,
    path: NavPath,
    target_class: int,
    config: ScaleConfig | None = None,
    seed: int = 0,
    constraints: ConstraintSet | None = None,
) -> OpResult:
    """Mirror-average movable objects about the best candidate axis to lower the
    symmetry class, or apply seeded off-axis perturbations to raise it."""
    from .metrics import symmetry_metric

    config = config or ScaleConfig()
    constraints = constraints or ConstraintSet()
    current = _symmetry_class(scene, path, config)
    if current == target_class:
        return OpResult(scene=scene, line=path.line, steps=[], reached_target=True)

    space = build_space(scene, path, config, constraints, (Attribute.SYMMETRY,))
    if current > target_class:
        measure = symmetry_metric(scene, path)
        ws = _Workspace(scene, path.line)
        steps = []
        for oi, dx, dy in _mirror_moves(ws, space, measure.best_axis):
            step = ChangeStep("move_obstacle", {"index": oi, "dx": dx, "dy": dy}, "symmetry")
            ws.apply(step)
            steps.append(step)
        new_scene = ws.scene()
        nav = NavPath(path.line, new_scene.corridors, config.turn_threshold_deg)
        achieved = _symmetry_class(new_scene, nav, config)
        return OpResult(
            scene=new_scene, line=path.line, steps=steps, reached_target=achieved <= target_class
        )

    # Raise asymmetry: escalating seeded jitter of the movable objects.
    best: tuple[float, Scene, list[ChangeStep], int] | None = None
    for round_idx, magnitude in enumerate((0.3, 0.6, 1.0, 1.5, 2.2, 3.0)):
        rng = random.Random((seed << 8) ^ round_idx)
        ws = _Workspace(scene, path.line)
        steps = []
        for oi in space.movable_obs:
            dx = rng.gauss(0.0, magnitude)
            dy = rng.gauss(0.0, magnitude)
            step = ChangeStep("move_obstacle", {"index": oi, "dx": dx, "dy": dy}, "symmetry")
            ws.apply(step)
            steps.append(step)
        cand = ws.scene()
        try:
            nav = NavPath(path.line, cand.corridors, config.turn_threshold_deg)
            if not _path_clear(cand, path.line) or _violations(space, cand, path.line) > 0:
                continue
            achieved = _symmetry_class(cand, nav, config)
        except Exception:
            continue
        key = (abs(achieved - target_class), round_idx)
        if best is None or key < (best[0], best[3]):
            best = (abs(achieved - target_class), cand, steps, round_idx)
        if achieved == target_class:
            break
    if best is None:
        return OpResult(scene=scene, line=path.line, steps=[], reached_target=False)
    return OpResult(scene=best[1], line=path.line, steps=best[2], reached_target=best[0] == 0)


def _clutter_class(scene: Scene, nav: NavPath, config: ScaleConfig) -> tuple[int, float]:
    from .metrics import clutter_metric

    cov = clutter_metric(scene, nav).coverage_fraction
    return classify(min(1.0, cov / config.clutter_cap), config), cov


def op_clutter_adjust(
    scene: Scene,
    path: NavPath,
    target_class: int,
    seed: int = 0,
    config: ScaleConfig | None = None,
    constraints: ConstraintSet | None = None,
) -> OpResult:
    """Remove the largest movable objects to lower coverage, or insert unit
    objects at seeded collision-free spots inside the band to raise it, until
    the clutter class matches the target."""
    from .metrics import segment_bands

    config = config or ScaleConfig()
    constraints = constraints or ConstraintSet()
    current, _ = _clutter_class(scene, path, config)
    if current == target_class:
        return OpResult(scene=scene, line=path.line, steps=[], reached_target=True)

    space = build_space(scene, path, config, constraints, (Attribute.CLUTTER,))
    ws = _Workspace(scene, path.line)
    steps: list[ChangeStep] = []

    def achieved() -> int:
        s = ws.scene()
        nav = NavPath(path.line, s.corridors, config.turn_threshold_deg)
        return _clutter_class(s, nav, config)[0]

    if current > target_class:
        order = sorted(space.movable_obs, key=lambda i: (-scene.obstacles[i].footprint.area, i))
        for oi in order:
            if len(ws.live_obstacles()) <= constraints.min_objects:
                break
            step = ChangeStep("remove_obstacle", {"index": oi}, "clutter")
            ws.apply(step)
            steps.append(step)
            if achieved() <= target_class:
                break
        got = achieved()
        # Overshot below the band: top back up with insertions.
        reached = got == target_class
        if got < target_class:
            reached = _insert_until(ws, steps, space, path, target_class, seed, config, constraints)
        return OpResult(scene=ws.scene(), line=path.line, steps=steps, reached_target=reached)

    reached = _insert_until(ws, steps, space, path, target_class, seed, config, constraints)
    return OpResult(scene=ws.scene(), line=path.line, steps=steps, reached_target=reached)


def _insert_until(
    ws: _Workspace,
    steps: list[ChangeStep],
    space: GenomeSpace,
    path: NavPath,
    target_class: int,
    seed: int,
    config: ScaleConfig,
    constraints: ConstraintSet,
) -> bool:
    rng = random.Random(seed)
    cap = constraints.object_cap(len(space.scene.obstacles))
    path_buffer = shapely.LineString(path.line.coords).buffer(PATH_CLEARANCE)
    inserted = 0
    occupied: list[tuple[float, float, float]] = []
    for attempt in range(400):
        s = ws.scene()
        nav = NavPath(path.line, s.corridors, config.turn_threshold_deg)
        cls, _ = _clutter_class(s, nav, config)
        if cls == target_class:
            return True
        if cls > target_class or len(ws.live_obstacles()) >= cap:
            return cls == target_class
        sampled = _sample_any_side(space, rng, occupied)
        if sampled is None:
            continue
        x, y, side = sampled
        half = side / 2.0
        foot = shapely.box(x - half, y - half, x + half, y + half)
        scope = _scope_band_current(space, ws)
        if not scope.contains(foot) or foot.intersects(path_buffer):
            continue
        if any(
            o is not None and foot.intersects(o.footprint.to_shapely()) for o in ws.obstacles
        ):
            continue
        if any(foot.intersects(w.to_shapely()) for w in ws.walls):
            continue
        step = ChangeStep(
            "insert_obstacle",
            {"x": float(x), "y": float(y), "side": side, "tag": f"inserted-{inserted}"},
            "clutter",
        )
        ws.apply(step)
        steps.append(step)
        occupied.append((x, y, side))
        inserted += 1
    s = ws.scene()
    nav = NavPath(path.line, s.corridors, config.turn_threshold_deg)
    return _clutter_class(s, nav, config)[0] == target_class


def _order_class(scene: Scene, nav: NavPath, config: ScaleConfig) -> int:
    from .metrics import order_metric

    frac = order_metric(scene, nav, config.order_residual_tolerance).ordered_fraction
    return classify(min(1.0, max(0.0, 1.0 - frac)), config)


def op_order_impose(
    scene: Scene,
    path: NavPath,
    target_class: int,
    config: ScaleConfig | None = None,
    seed: int = 0,
    constraints: ConstraintSet | None = None,
) -> OpResult:
    """Snap object centroids onto the best-fit template to raise order, or
    seed-jitter them beyond the residual tolerance to lower it."""
    from .metrics import segment_bands

    config = config or ScaleConfig()
    constraints = constraints or ConstraintSet()
    current = _order_class(scene, path, config)
    if current == target_class:
        return OpResult(scene=scene, line=path.line, steps=[], reached_target=True)
    space = build_space(scene, path, config, constraints, (Attribute.ORDER,))
    if not space.movable_obs and current < target_class:
        return OpResult(scene=scene, line=path.line, steps=[], reached_target=False)

    if current > target_class:
        ws = _Workspace(scene, path.line)
        steps: list[ChangeStep] = []
        band = shapely.unary_union(segment_bands(path))
        in_band = [
            i
            for i, o in enumerate(scene.obstacles)
            if o.footprint.to_shapely().intersects(band)
        ]
        if not in_band:
            return OpResult(scene=scene, line=path.line, steps=[], reached_target=False)
        pts = np.array([scene.obstacles[i].footprint.centroid.as_tuple() for i in in_band])
        targets = _template_targets(pts, config.order_residual_tolerance)
        moves = []
        for (i, (tx, ty)), (x, y) in zip(zip(in_band, targets), pts):
            if i in space.movable_obs:
                moves.append((math.hypot(tx - x, ty - y), i, tx - x, ty - y))
        moves.sort(key=lambda m: (-m[0], m[1]))
        reached = False
        for _, oi, dx, dy in moves:
            if abs(dx) < 1e-12 and abs(dy) < 1e-12:
                continue
            step = ChangeStep("move_obstacle", {"index": oi, "dx": dx, "dy": dy}, "order")
            ws.apply(step)
            steps.append(step)
            s = ws.scene()
            nav = NavPath(path.line, s.corridors, config.turn_threshold_deg)
            if _order_class(s, nav, config) <= target_class:
                reached = True
                break
        return OpResult(scene=ws.scene(), line=path.line, steps=steps, reached_target=reached)

    # Lower order: escalating seeded jitter beyond the residual tolerance.
    best = None
    for round_idx, magnitude in enumerate((0.6, 1.0, 1.6, 2.4, 3.2)):
        rng = random.Random((seed << 8) ^ (round_idx + 101))
        ws = _Workspace(scene, path.line)
        steps = []
        for oi in space.movable_obs:
            ang = rng.uniform(0.0, 2.0 * math.pi)
            r = magnitude * (0.7 + 0.6 * rng.random())
            step = ChangeStep(
                "move_obstacle",
                {"index": oi, "dx": r * math.cos(ang), "dy": r * math.sin(ang)},
                "order",
            )
            ws.apply(step)
            steps.append(step)
        cand = ws.scene()
        try:
            if not _path_clear(cand, path.line) or _violations(space, cand, path.line) > 0:
                continue
            nav = NavPath(path.line, cand.corridors, config.turn_threshold_deg)
            achieved = _order_class(cand, nav, config)
        except Exception:
            continue
        key = (abs(achieved - target_class), round_idx)
        if best is None or key < (best[0], best[3]):
            best = (abs(achieved - target_class), cand, steps, round_idx)
        if achieved == target_class:
            break
    if best is None:
        return OpResult(scene=scene, line=path.line, steps=[], reached_target=False)
    return OpResult(scene=best[1], line=path.line, steps=best[2], reached_target=best[0] == 0)


def op_visibility_search(
    scene: Scene,
    path: NavPath,
    target_class: int,
    seed: int = 0,
    budget: int = 2000,
    config: ScaleConfig | None = None,
    constraints: ConstraintSet | None = None,
) -> ManipulationResult:
    """Evolutionary search over wall-length and wall-insertion genes only,
    driving the visibility class to the target. Best-effort (not converged)
    when the budget runs out."""
    config = config or ScaleConfig()
    constraints = constraints or ConstraintSet()
    space = build_space(scene, path, config, constraints, (Attribute.VISIBILITY,))
    before = identify(scene, path, config)
    lo, hi = _target_band(target_class, config)
    mid = (lo + hi) / 2.0

    def objective(report: ComplexityReport, decoded: Decoded) -> float:
        res = report.attributes[Attribute.VISIBILITY.value]
        return abs(res.cls - target_class) + 0.1 * abs(res.score - mid)

    def converged(report: ComplexityReport | None, f: float) -> bool:
        return report is not None and report.attributes[Attribute.VISIBILITY.value].cls == target_class

    outcome = _evolve(space, objective, converged, seed, budget)
    return _result_from_outcome(space, outcome, before)
