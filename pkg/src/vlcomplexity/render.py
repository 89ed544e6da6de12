"""Plan-view and class-profile figures rendered to SVG.

Output is byte-reproducible: fixed svg.hashsalt, no date metadata, deterministic
artist order. Figure elements carry gid attributes (band-<attr>,
plan-segment-<i>, ...) so tests and tooling can address them structurally.
"""

from __future__ import annotations

import os
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np
from matplotlib import cm
from matplotlib.figure import Figure
from matplotlib.patches import Patch, Polygon as MplPolygon

from .scale import ATTRIBUTES, ComplexityReport
from .scene import NavPath, Scene

plt.rcParams["svg.hashsalt"] = "vlcomplexity"

#: Five-step colorblind-safe ramp for classes 1..5 (viridis samples).
CLASS_COLORS = [cm.viridis(x) for x in np.linspace(0.08, 0.92, 5)]


def class_color(cls: int):
    return CLASS_COLORS[min(max(cls, 1), 5) - 1]


def _class_legend(ax):
    handles = [Patch(facecolor=class_color(k), label=f"class {k}") for k in range(1, 6)]
    ax.legend(handles=handles, loc="upper right", fontsize=7, framealpha=0.9)


def render_profile(report: ComplexityReport, ax=None) -> Figure:
    """Per-segment bands of attribute classes over path chainage, one row per
    attribute plus the aggregate row."""
    if ax is None:
        fig, ax = plt.subplots(figsize=(8.0, 3.2))
    else:
        fig = ax.figure
    rows = [a.value for a in ATTRIBUTES] + ["aggregate"]
    for r, name in enumerate(rows):
        y0 = len(rows) - 1 - r
        for seg in report.segments:
            cls = seg.cls if name == "aggregate" else seg.attributes[name].cls
            ax.fill_between(
                [seg.chainage_start, seg.chainage_end],
                y0 + 0.08,
                y0 + 0.92,
                color=class_color(cls),
                gid=f"band-{name}-seg-{seg.index}",
            )
    total = report.segments[-1].chainage_end if report.segments else 1.0
    for seg in report.segments[1:]:
        ax.axvline(seg.chainage_start, color="white", lw=0.8)
    ax.set_xlim(0, total)
    ax.set_ylim(0, len(rows))
    ax.set_yticks([len(rows) - 1 - r + 0.5 for r in range(len(rows))])
    ax.set_yticklabels(rows, fontsize=8)
    ax.set_xlabel("path chainage [m]")
    ax.set_title(
        f"complexity profile: overall class {report.overall_class} "
        f"(mean {report.aggregate_mean:.2f}, preference {report.preference:.2f})",
        fontsize=9,
    )
    _class_legend(ax)
    return fig


def render_plan(scene: Scene, path: NavPath, report: ComplexityReport | None = None, ax=None) -> Figure:
    """Plan view: walls, obstacles, and the path color-coded by segment class."""
    if ax is None:
        fig, ax = plt.subplots(figsize=(8.0, 5.0))
    else:
        fig = ax.figure
    b = scene.bounds
    ax.add_patch(
        MplPolygon(
            [(b.xmin, b.ymin), (b.xmax, b.ymin), (b.xmax, b.ymax), (b.xmin, b.ymax)],
            closed=True,
            facecolor="#f7f7f7",
            edgecolor="#999999",
            lw=0.8,
            gid="plan-bounds",
        )
    )
    for seg in path.segments:
        if seg.corridor is not None:
            band = seg.band()
            ax.add_patch(
                MplPolygon(
                    list(band.exterior.coords),
                    closed=True,
                    facecolor="#ffffff",
                    edgecolor="#d9d9d9",
                    lw=0.5,
                    gid=f"plan-band-{seg.index}",
                )
            )
    for i, wall in enumerate(scene.walls):
        ax.add_patch(
            MplPolygon(
                [p.as_tuple() for p in wall.ring],
                closed=True,
                facecolor="#6f6f6f",
                edgecolor="#4a4a4a",
                lw=0.5,
                gid=f"plan-wall-{i}",
            )
        )
    for i, obs in enumerate(scene.obstacles):
        ax.add_patch(
            MplPolygon(
                [p.as_tuple() for p in obs.footprint.ring],
                closed=True,
                facecolor="#c98c4a" if obs.movable else "#8c5a2a",
                edgecolor="#5a3a1a",
                lw=0.5,
                gid=f"plan-obstacle-{i}",
            )
        )
    for seg in path.segments:
        cls = report.segments[seg.index].cls if report and seg.index < len(report.segments) else 3
        ax.plot(
            seg.line.coords[:, 0],
            seg.line.coords[:, 1],
            color=class_color(cls),
            lw=2.5,
            solid_capstyle="round",
            gid=f"plan-segment-{seg.index}",
        )
    start = path.line.vertices[0]
    end = path.line.vertices[-1]
    ax.plot([start.x], [start.y], marker="o", color="#222222", ms=5, gid="plan-start")
    ax.plot([end.x], [end.y], marker="*", color="#222222", ms=9, gid="plan-end")
    ax.set_aspect("equal")
    ax.set_xlim(b.xmin - 0.5, b.xmax + 0.5)
    ax.set_ylim(b.ymin - 0.5, b.ymax + 0.5)
    ax.set_xlabel("x [m]")
    ax.set_ylabel("y [m]")
    _class_legend(ax)
    return fig


def render_overview(
    scene: Scene, path: NavPath, report: ComplexityReport, title: str = ""
) -> Figure:
    fig, (ax_plan, ax_prof) = plt.subplots(
        2, 1, figsize=(8.5, 8.0), height_ratios=[2.2, 1.0]
    )
    render_plan(scene, path, report, ax=ax_plan)
    render_profile(report, ax=ax_prof)
    if title:
        fig.suptitle(title, fontsize=11)
    fig.tight_layout()
    return fig


def save_svg(fig: Figure, path: str | os.PathLike):
    """Write the figure as reproducible SVG (atomic rename, no timestamps)."""
    path = Path(path)
    tmp = path.with_name(path.name + ".tmp")
    fig.savefig(tmp, format="svg", metadata={"Date": None})
    plt.close(fig)
    os.replace(tmp, path)
