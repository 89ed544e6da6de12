/** Wire types shared with the complexity service (scene document v1, reports,
 * manipulation results). */

export interface BoundsDoc {
  xmin: number;
  ymin: number;
  xmax: number;
  ymax: number;
}

export interface WallDoc {
  ring: number[][];
}

export interface ObstacleDoc {
  footprint: number[][];
  height: number;
  tag: string;
  movable: boolean;
}

export interface CorridorDoc {
  id: string;
  axis: number[][];
  width: number;
  height: number;
}

export interface PathDoc {
  vertices: number[][];
  corridor_ids?: string[];
}

export interface SceneDocument {
  format_version: string;
  units: string;
  bounds: BoundsDoc;
  walls: WallDoc[];
  obstacles: ObstacleDoc[];
  corridors: CorridorDoc[];
  paths: Record<string, PathDoc>;
}

export interface AttributeResult {
  raw: number;
  score: number;
  class: number;
  detail?: Record<string, unknown>;
}

export interface SegmentReport {
  index: number;
  chainage_start: number;
  chainage_end: number;
  attributes: Record<string, AttributeResult>;
  aggregate_mean: number;
  class: number;
}

export interface Report {
  attributes: Record<string, AttributeResult>;
  segments: SegmentReport[];
  aggregate_mean: number;
  overall_class: number;
  preference: number;
}

export interface ReportEnvelope {
  report: Report;
  scene_hash: string;
  config_hash?: string;
  path_name?: string;
}

export interface SessionCreated extends ReportEnvelope {
  session: string;
}

export interface ChangeStep {
  op: string;
  params: Record<string, unknown>;
  attribute?: string;
}

export interface ManipulationResultDoc {
  objective: number;
  evaluations: number;
  generations: number;
  converged: boolean;
  change_log: ChangeStep[];
  before_report: Report;
  after_report: Report;
}

export interface ManipulateResponse {
  result: ManipulationResultDoc;
  scene: SceneDocument;
  scene_hash: string;
  report: Report;
}

export interface UndoResponse {
  scene: SceneDocument;
  scene_hash: string;
  report: Report;
}

export interface SceneResponse {
  scene: SceneDocument;
  scene_hash: string;
}

export const ATTRIBUTES = [
  "rotation",
  "size",
  "visibility",
  "symmetry",
  "clutter",
  "order",
] as const;

export type AttributeName = (typeof ATTRIBUTES)[number];
