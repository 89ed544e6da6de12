/** Designer view state: loaded scene, current report, slider targets, busy
 * flag and undo depth.
 *
 * Invariants enforced here:
 *  - sliders are clamped to [1, 5] on a 0.5 step;
 *  - apply is a no-op while a run is in flight (mirrors the service 409);
 *  - a report is never displayed unless its scene hash matches the scene that
 *    will be rendered next to it (skew guard).
 */

import { ApiClient, ApiError } from "./api.js";
import type {
  AttributeName,
  ChangeStep,
  Report,
  SceneDocument,
} from "./types.js";
import { ATTRIBUTES } from "./types.js";

export interface SliderState {
  attribute: AttributeName;
  target: number;
  active: boolean;
}

export interface ViewState {
  session: string | null;
  scene: SceneDocument | null;
  sceneHash: string | null;
  report: Report | null;
  pathName: string;
  selectedSegment: number | "all";
  sliders: SliderState[];
  overallTarget: number;
  seed: number;
  budget: number;
  busy: boolean;
  undoDepth: number;
  error: string | null;
  toast: string | null;
  skewGuardTrips: number;
  pendingSteps: ChangeStep[] | null;
}

export function clampTarget(value: number): number {
  const snapped = Math.round(value * 2) / 2;
  return Math.min(5, Math.max(1, snapped));
}

export function initialState(): ViewState {
  return {
    session: null,
    scene: null,
    sceneHash: null,
    report: null,
    pathName: "main",
    selectedSegment: "all",
    sliders: ATTRIBUTES.map((attribute) => ({ attribute, target: 3, active: true })),
    overallTarget: 3,
    seed: 0,
    budget: 2000,
    busy: false,
    undoDepth: 0,
    error: null,
    toast: null,
    skewGuardTrips: 0,
    pendingSteps: null,
  };
}

/** Projection of the view state into the outgoing manipulation request.
 * Tests assert the request body equals exactly this. */
export function buildRequest(state: ViewState): Record<string, unknown> {
  const active = state.sliders.filter((s) => s.active);
  if (state.selectedSegment === "all") {
    return {
      target_class: clampTarget(state.overallTarget),
      attributes: active.map((s) => s.attribute),
      seed: state.seed,
      budget: state.budget,
    };
  }
  const slider = active[0];
  return {
    segment: state.selectedSegment,
    attribute: slider ? slider.attribute : "clutter",
    segment_target: Math.round(clampTarget(slider ? slider.target : 3)),
    overall_target: clampTarget(state.overallTarget),
    seed: state.seed,
    budget: state.budget,
  };
}

export type Listener = (state: ViewState) => void;

export class DesignerStore {
  private state: ViewState = initialState();
  private listeners: Listener[] = [];

  constructor(private readonly api: ApiClient) {}

  getState(): ViewState {
    return this.state;
  }

  subscribe(listener: Listener): () => void {
    this.listeners.push(listener);
    return () => {
      this.listeners = this.listeners.filter((l) => l !== listener);
    };
  }

  private update(patch: Partial<ViewState>): void {
    this.state = { ...this.state, ...patch };
    for (const listener of this.listeners) listener(this.state);
  }

  /** Skew guard: only accept a (scene, report) pair whose hashes agree. */
  private present(
    scene: SceneDocument,
    sceneHash: string,
    report: Report,
    reportHash: string,
    extra: Partial<ViewState> = {},
  ): boolean {
    if (sceneHash !== reportHash) {
      this.update({
        skewGuardTrips: this.state.skewGuardTrips + 1,
        error: "internal: report does not match the displayed scene",
        ...extra,
      });
      return false;
    }
    this.update({ scene, sceneHash, report, error: null, ...extra });
    return true;
  }

  setSlider(attribute: AttributeName, target: number, active?: boolean): void {
    this.update({
      sliders: this.state.sliders.map((s) =>
        s.attribute === attribute
          ? { ...s, target: clampTarget(target), active: active ?? s.active }
          : s,
      ),
    });
  }

  setOverallTarget(value: number): void {
    this.update({ overallTarget: clampTarget(value) });
  }

  setSelectedSegment(segment: number | "all"): void {
    this.update({ selectedSegment: segment });
  }

  setSeed(seed: number): void {
    this.update({ seed: Math.max(0, Math.floor(seed)) });
  }

  setBudget(budget: number): void {
    this.update({ budget: Math.max(1, Math.floor(budget)) });
  }

  async loadScene(doc: SceneDocument, pathName = "main"): Promise<boolean> {
    this.update({ busy: true, error: null, toast: null });
    try {
      const created = await this.api.createSession(doc, pathName);
      const ok = this.present(doc, created.scene_hash, created.report, created.scene_hash, {
        session: created.session,
        pathName,
        selectedSegment: "all",
        undoDepth: 0,
        busy: false,
        pendingSteps: null,
      });
      return ok;
    } catch (err) {
      this.update({
        busy: false,
        session: null,
        error: err instanceof ApiError
          ? `${err.message}${err.pointer ? ` (at ${err.pointer})` : ""}`
          : String(err),
      });
      return false;
    }
  }

  /** Apply the current sliders; returns "busy" when a run is in flight. */
  async apply(): Promise<"ok" | "busy" | "error"> {
    if (this.state.busy) return "busy";
    if (!this.state.session) {
      this.update({ error: "no session loaded" });
      return "error";
    }
    const request = buildRequest(this.state);
    this.update({ busy: true, toast: null, error: null });
    try {
      const res = await this.api.manipulate(this.state.session, request);
      this.present(res.scene, res.scene_hash, res.report, res.scene_hash, {
        busy: false,
        undoDepth: this.state.undoDepth + 1,
        pendingSteps: res.result.change_log,
        toast: res.result.converged ? null : "budget exhausted: best effort shown",
      });
      return "ok";
    } catch (err) {
      if (err instanceof ApiError && err.status === 409) {
        this.update({ busy: false, toast: "a run is already in progress" });
      } else if (err instanceof ApiError && err.status === 422) {
        this.update({ busy: false, error: `infeasible: ${err.message}` });
      } else {
        this.update({ busy: false, error: String(err) });
      }
      return "error";
    }
  }

  /** Re-fetch the current report; the skew guard drops it if it belongs to a
   * different scene than the one on screen. */
  async refreshReport(): Promise<boolean> {
    if (!this.state.session || !this.state.scene || !this.state.sceneHash) return false;
    try {
      const envelope = await this.api.getReport(this.state.session);
      if (!this.state.report) {
        return this.present(this.state.scene, this.state.sceneHash, envelope.report, envelope.scene_hash);
      }
      if (envelope.scene_hash !== this.state.sceneHash) {
        this.update({
          skewGuardTrips: this.state.skewGuardTrips + 1,
          error: "internal: report does not match the displayed scene",
        });
        return false;
      }
      this.update({ report: envelope.report, error: null });
      return true;
    } catch (err) {
      this.update({ error: String(err) });
      return false;
    }
  }

  async undo(): Promise<boolean> {
    if (this.state.busy || !this.state.session) return false;
    this.update({ busy: true, toast: null });
    try {
      const res = await this.api.undo(this.state.session);
      this.present(res.scene, res.scene_hash, res.report, res.scene_hash, {
        busy: false,
        undoDepth: Math.max(0, this.state.undoDepth - 1),
        pendingSteps: null,
      });
      return true;
    } catch (err) {
      if (err instanceof ApiError && err.status === 409) {
        this.update({ busy: false, toast: "nothing to undo" });
      } else {
        this.update({ busy: false, error: String(err) });
      }
      return false;
    }
  }

  clearPendingSteps(): void {
    this.update({ pendingSteps: null });
  }
}
