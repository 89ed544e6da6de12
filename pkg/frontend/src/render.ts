/** Canvas rendering: plan view (walls, obstacles, path colored by segment
 * class) and the per-segment class profile. Drawing goes through a minimal 2D
 * context interface so tests can record operations without a DOM. */

import type { Report, SceneDocument, SegmentReport } from "./types.js";
import { ATTRIBUTES } from "./types.js";

/** Five-step colorblind-safe ramp for classes 1..5 (same viridis samples as
 * the CLI figures). */
export const CLASS_COLORS = ["#481d6f", "#365d8d", "#21918c", "#48c16e", "#cae11f"] as const;

export function classColor(cls: number): string {
  const idx = Math.min(5, Math.max(1, Math.round(cls))) - 1;
  return CLASS_COLORS[idx] ?? CLASS_COLORS[2];
}

export interface Ctx2D {
  fillStyle: string;
  strokeStyle: string;
  lineWidth: number;
  font: string;
  globalAlpha: number;
  beginPath(): void;
  moveTo(x: number, y: number): void;
  lineTo(x: number, y: number): void;
  closePath(): void;
  fill(): void;
  stroke(): void;
  fillRect(x: number, y: number, w: number, h: number): void;
  strokeRect(x: number, y: number, w: number, h: number): void;
  fillText(text: string, x: number, y: number): void;
  clearRect(x: number, y: number, w: number, h: number): void;
  arc(x: number, y: number, r: number, a0: number, a1: number): void;
}

export interface Transform {
  scale: number;
  ox: number;
  oy: number;
}

export function planTransform(scene: SceneDocument, width: number, height: number): Transform {
  const b = scene.bounds;
  const margin = 12;
  const sx = (width - 2 * margin) / (b.xmax - b.xmin);
  const sy = (height - 2 * margin) / (b.ymax - b.ymin);
  const scale = Math.min(sx, sy);
  return {
    scale,
    ox: margin - b.xmin * scale,
    // Flip y so +y in the plan points up on screen.
    oy: height - margin + b.ymin * scale,
  };
}

function toCanvas(t: Transform, x: number, y: number): [number, number] {
  return [t.ox + x * t.scale, t.oy - y * t.scale];
}

function drawRing(ctx: Ctx2D, t: Transform, ring: number[][]): void {
  ctx.beginPath();
  ring.forEach((pt, i) => {
    const [x, y] = toCanvas(t, pt[0] ?? 0, pt[1] ?? 0);
    if (i === 0) ctx.moveTo(x, y);
    else ctx.lineTo(x, y);
  });
  ctx.closePath();
}

/** Chainage positions of the path vertices (for segment coloring). */
function vertexChainage(vertices: number[][]): number[] {
  const out = [0];
  for (let i = 1; i < vertices.length; i += 1) {
    const [ax, ay] = vertices[i - 1] as [number, number];
    const [bx, by] = vertices[i] as [number, number];
    out.push((out[i - 1] ?? 0) + Math.hypot(bx - ax, by - ay));
  }
  return out;
}

function pointAt(vertices: number[][], chain: number[], s: number): [number, number] {
  const total = chain[chain.length - 1] ?? 0;
  const target = Math.min(Math.max(s, 0), total);
  for (let i = 1; i < chain.length; i += 1) {
    const c0 = chain[i - 1] ?? 0;
    const c1 = chain[i] ?? 0;
    if (target <= c1 || i === chain.length - 1) {
      const t = c1 > c0 ? (target - c0) / (c1 - c0) : 0;
      const [ax, ay] = vertices[i - 1] as [number, number];
      const [bx, by] = vertices[i] as [number, number];
      return [ax + t * (bx - ax), ay + t * (by - ay)];
    }
  }
  return vertices[0] as [number, number];
}

export function renderPlan(
  ctx: Ctx2D,
  width: number,
  height: number,
  scene: SceneDocument,
  report: Report | null,
  pathName: string,
  selectedSegment: number | "all",
): void {
  ctx.clearRect(0, 0, width, height);
  const t = planTransform(scene, width, height);
  const b = scene.bounds;

  ctx.fillStyle = "#f7f7f7";
  ctx.strokeStyle = "#999999";
  ctx.lineWidth = 1;
  const [bx0, by0] = toCanvas(t, b.xmin, b.ymax);
  const bw = (b.xmax - b.xmin) * t.scale;
  const bh = (b.ymax - b.ymin) * t.scale;
  ctx.fillRect(bx0, by0, bw, bh);
  ctx.strokeRect(bx0, by0, bw, bh);

  for (const wall of scene.walls) {
    drawRing(ctx, t, wall.ring);
    ctx.fillStyle = "#6f6f6f";
    ctx.fill();
  }
  for (const obs of scene.obstacles) {
    drawRing(ctx, t, obs.footprint);
    ctx.fillStyle = obs.movable ? "#c98c4a" : "#8c5a2a";
    ctx.fill();
  }

  const path = scene.paths[pathName];
  if (path) {
    const chain = vertexChainage(path.vertices);
    const segments: SegmentReport[] = report?.segments ?? [];
    const ranges = segments.length
      ? segments.map((s) => ({ s0: s.chainage_start, s1: s.chainage_end, cls: s.class, index: s.index }))
      : [{ s0: 0, s1: chain[chain.length - 1] ?? 0, cls: 3, index: 0 }];
    for (const r of ranges) {
      ctx.beginPath();
      const steps = 24;
      for (let k = 0; k <= steps; k += 1) {
        const s = r.s0 + ((r.s1 - r.s0) * k) / steps;
        const [px, py] = pointAt(path.vertices, chain, s);
        const [cx, cy] = toCanvas(t, px, py);
        if (k === 0) ctx.moveTo(cx, cy);
        else ctx.lineTo(cx, cy);
      }
      ctx.strokeStyle = classColor(r.cls);
      ctx.lineWidth = selectedSegment === r.index ? 6 : 3.5;
      ctx.stroke();
    }
    const [sx, sy] = toCanvas(t, ...(path.vertices[0] as [number, number]));
    const last = path.vertices[path.vertices.length - 1] as [number, number];
    const [ex, ey] = toCanvas(t, last[0], last[1]);
    ctx.fillStyle = "#222222";
    ctx.beginPath();
    ctx.arc(sx, sy, 4, 0, Math.PI * 2);
    ctx.fill();
    ctx.beginPath();
    ctx.arc(ex, ey, 5, 0, Math.PI * 2);
    ctx.fill();
  }

  // Class legend.
  ctx.font = "11px sans-serif";
  for (let k = 1; k <= 5; k += 1) {
    ctx.fillStyle = classColor(k);
    ctx.fillRect(width - 92, 10 + (k - 1) * 16, 12, 12);
    ctx.fillStyle = "#333333";
    ctx.fillText(`class ${k}`, width - 74, 20 + (k - 1) * 16);
  }
}

export const PROFILE_ROWS = [...ATTRIBUTES, "aggregate"] as const;

export function renderProfile(
  ctx: Ctx2D,
  width: number,
  height: number,
  report: Report | null,
  selectedSegment: number | "all" = "all",
): void {
  ctx.clearRect(0, 0, width, height);
  const labelW = 72;
  const rows = PROFILE_ROWS;
  const rowH = height / rows.length;
  if (!report || report.segments.length === 0) {
    ctx.fillStyle = "#888888";
    ctx.font = "12px sans-serif";
    ctx.fillText("no report loaded", labelW, height / 2);
    return;
  }
  const total = report.segments[report.segments.length - 1]?.chainage_end ?? 1;
  const sx = (width - labelW - 8) / total;
  rows.forEach((name, r) => {
    ctx.fillStyle = "#333333";
    ctx.font = "11px sans-serif";
    ctx.fillText(name, 4, r * rowH + rowH * 0.65);
    for (const seg of report.segments) {
      const cls = name === "aggregate" ? seg.class : seg.attributes[name]?.class ?? 1;
      ctx.fillStyle = classColor(cls);
      const x0 = labelW + seg.chainage_start * sx;
      const w = (seg.chainage_end - seg.chainage_start) * sx;
      ctx.fillRect(x0, r * rowH + 2, Math.max(w - 1, 1), rowH - 4);
      if (selectedSegment === seg.index) {
        ctx.strokeStyle = "#e05555";
        ctx.lineWidth = 1.5;
        ctx.strokeRect(x0, r * rowH + 2, Math.max(w - 1, 1), rowH - 4);
      }
    }
  });
}

/** Segment index at a profile x pixel, for hover tooltips; null off the bands. */
export function segmentAtProfileX(
  report: Report | null,
  width: number,
  x: number,
): number | null {
  if (!report || report.segments.length === 0) return null;
  const labelW = 72;
  const total = report.segments[report.segments.length - 1]?.chainage_end ?? 1;
  const chain = ((x - labelW) / (width - labelW - 8)) * total;
  if (chain < 0 || chain > total) return null;
  for (const seg of report.segments) {
    if (chain >= seg.chainage_start && chain <= seg.chainage_end) return seg.index;
  }
  return null;
}
