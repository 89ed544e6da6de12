/** Scripted 20-action designer session: the UI-loop acceptance check.
 * After every action the skew guard must not have fired; applying renders the
 * service's own report; undo restores the exact prior render. */

import { describe, expect, it } from "vitest";

import { ApiClient } from "../src/api.js";
import { renderProfile } from "../src/render.js";
import { DesignerStore } from "../src/state.js";
import { FakeService, smallScene } from "./fake-service.js";

class RecordingCtx {
  fillStyle = "";
  strokeStyle = "";
  lineWidth = 1;
  font = "";
  globalAlpha = 1;
  ops: unknown[][] = [];
  private log(...args: unknown[]): void {
    this.ops.push([...args, this.fillStyle, this.strokeStyle]);
  }
  beginPath(): void {
    this.log("beginPath");
  }
  moveTo(x: number, y: number): void {
    this.log("moveTo", x, y);
  }
  lineTo(x: number, y: number): void {
    this.log("lineTo", x, y);
  }
  closePath(): void {
    this.log("closePath");
  }
  fill(): void {
    this.log("fill");
  }
  stroke(): void {
    this.log("stroke");
  }
  fillRect(x: number, y: number, w: number, h: number): void {
    this.log("fillRect", x, y, w, h);
  }
  strokeRect(x: number, y: number, w: number, h: number): void {
    this.log("strokeRect", x, y, w, h);
  }
  fillText(t: string, x: number, y: number): void {
    this.log("fillText", t, x, y);
  }
  clearRect(x: number, y: number, w: number, h: number): void {
    this.log("clearRect", x, y, w, h);
  }
  arc(x: number, y: number, r: number, a: number, b: number): void {
    this.log("arc", x, y, r, a, b);
  }
}

function renderedProfile(store: DesignerStore): unknown[][] {
  const ctx = new RecordingCtx();
  renderProfile(ctx, 760, 170, store.getState().report, store.getState().selectedSegment);
  return ctx.ops;
}

describe("scripted 20-action session", () => {
  it("keeps scene and report in lockstep throughout", async () => {
    const service = new FakeService();
    const store = new DesignerStore(new ApiClient("", service.fetch));
    let actions = 0;

    const act = async (fn: () => Promise<unknown> | void): Promise<void> => {
      await fn();
      actions += 1;
      expect(store.getState().skewGuardTrips).toBe(0);
    };

    await act(() => store.loadScene(smallScene())); // 1
    const initialRender = renderedProfile(store);
    const initialHash = store.getState().sceneHash;

    await act(() => store.setOverallTarget(3)); // 2  (the "move slider to 3" action)
    await act(() => store.setSlider("clutter", 4)); // 3
    await act(() => store.refreshReport()); // 4
    await act(() => store.apply()); // 5

    // The after-profile renders exactly the service's current report.
    const sid = store.getState().session!;
    const serviceReport = (await new ApiClient("", service.fetch).getReport(sid)).report;
    expect(store.getState().report).toEqual(serviceReport);
    expect(store.getState().report?.aggregate_mean).toBe(serviceReport.aggregate_mean);
    const afterRender = renderedProfile(store);
    expect(afterRender).not.toEqual(initialRender);

    await act(() => store.undo()); // 6
    expect(store.getState().sceneHash).toBe(initialHash);
    expect(renderedProfile(store)).toEqual(initialRender);

    await act(() => store.apply()); // 7
    const levelOneHash = store.getState().sceneHash;
    expect(renderedProfile(store)).toEqual(afterRender); // deterministic service + renderer

    await act(() => store.refreshReport()); // 8
    expect(renderedProfile(store)).toEqual(afterRender);

    await act(() => store.setSelectedSegment(1)); // 9
    await act(() => store.setSlider("rotation", 2, false)); // 10
    await act(() => store.setSlider("size", 2, false)); // 11
    await act(() => store.setSlider("visibility", 2, false)); // 12
    await act(() => store.setSlider("symmetry", 2, false)); // 13
    await act(() => store.setSlider("order", 2, false)); // 14  (clutter stays active)
    await act(() => store.apply()); // 15 — segment-mode request
    const segmentCall = service.manipulateCalls[service.manipulateCalls.length - 1];
    expect(segmentCall).toMatchObject({ segment: 1, attribute: "clutter" });

    await act(() => store.undo()); // 16
    expect(store.getState().sceneHash).toBe(levelOneHash);
    await act(() => store.setSelectedSegment("all")); // 17
    await act(() => store.setSlider("rotation", 3, true)); // 18
    await act(() => store.apply()); // 19
    await act(() => store.undo()); // 20

    expect(actions).toBe(20);
    expect(store.getState().sceneHash).toBe(levelOneHash);
    expect(store.getState().skewGuardTrips).toBe(0);
  });

  it("double-apply while busy produces a single request", async () => {
    const service = new FakeService();
    const store = new DesignerStore(new ApiClient("", service.fetch));
    await store.loadScene(smallScene());
    const calls = service.manipulateCalls.length;
    await Promise.all([store.apply(), store.apply()]);
    expect(service.manipulateCalls.length).toBe(calls + 1);
  });
});
