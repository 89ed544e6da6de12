/** DOM wiring for the designer console. All logic lives in the testable
 * modules; this file only binds events and redraws. */

import { ApiClient } from "./api.js";
import { StepPlayback, describeStep } from "./playback.js";
import { renderPlan, renderProfile, segmentAtProfileX } from "./render.js";
import type { Ctx2D } from "./render.js";
import { DesignerStore } from "./state.js";
import type { ViewState } from "./state.js";
import type { SceneDocument } from "./types.js";
import { ATTRIBUTES } from "./types.js";

const api = new ApiClient("", (url, init) => fetch(url, init));
const store = new DesignerStore(api);

const planCanvas = document.getElementById("plan") as HTMLCanvasElement;
const profileCanvas = document.getElementById("profile") as HTMLCanvasElement;
const fileInput = document.getElementById("scene-file") as HTMLInputElement;
const applyBtn = document.getElementById("apply") as HTMLButtonElement;
const undoBtn = document.getElementById("undo") as HTMLButtonElement;
const skipBtn = document.getElementById("skip") as HTMLButtonElement;
const segmentSelect = document.getElementById("segment") as HTMLSelectElement;
const overallSlider = document.getElementById("overall-target") as HTMLInputElement;
const overallLabel = document.getElementById("overall-label") as HTMLSpanElement;
const slidersDiv = document.getElementById("sliders") as HTMLDivElement;
const statusLine = document.getElementById("status") as HTMLDivElement;
const errorLine = document.getElementById("error") as HTMLDivElement;
const toastLine = document.getElementById("toast") as HTMLDivElement;
const stepsLog = document.getElementById("steps") as HTMLUListElement;
const hoverInfo = document.getElementById("hover-info") as HTMLDivElement;

let playback: StepPlayback | null = null;

function buildSliderControls(): void {
  slidersDiv.innerHTML = "";
  for (const attribute of ATTRIBUTES) {
    const row = document.createElement("div");
    row.className = "slider-row";
    const check = document.createElement("input");
    check.type = "checkbox";
    check.checked = true;
    check.addEventListener("change", () => {
      store.setSlider(attribute, store.getState().sliders.find((s) => s.attribute === attribute)?.target ?? 3, check.checked);
    });
    const label = document.createElement("label");
    label.textContent = attribute;
    const slider = document.createElement("input");
    slider.type = "range";
    slider.min = "1";
    slider.max = "5";
    slider.step = "0.5";
    slider.value = "3";
    const value = document.createElement("span");
    value.textContent = "3";
    slider.addEventListener("input", () => {
      store.setSlider(attribute, Number(slider.value));
      value.textContent = slider.value;
    });
    row.append(check, label, slider, value);
    slidersDiv.append(row);
  }
}

function redraw(state: ViewState): void {
  const planCtx = planCanvas.getContext("2d") as unknown as Ctx2D | null;
  const profCtx = profileCanvas.getContext("2d") as unknown as Ctx2D | null;
  if (state.scene && planCtx) {
    renderPlan(planCtx, planCanvas.width, planCanvas.height, state.scene, state.report, state.pathName, state.selectedSegment);
  }
  if (profCtx) {
    renderProfile(profCtx, profileCanvas.width, profileCanvas.height, state.report, state.selectedSegment);
  }
  applyBtn.disabled = state.busy || !state.session;
  undoBtn.disabled = state.busy || state.undoDepth === 0;
  statusLine.textContent = state.report
    ? `overall class ${state.report.overall_class} (mean ${state.report.aggregate_mean.toFixed(2)}, ` +
      `preference ${state.report.preference.toFixed(2)})${state.busy ? " — running..." : ""}`
    : state.busy
      ? "running..."
      : "load a scene document to begin";
  errorLine.textContent = state.error ?? "";
  toastLine.textContent = state.toast ?? "";
  const options = ["all", ...(state.report?.segments.map((s) => String(s.index)) ?? [])];
  if (segmentSelect.options.length !== options.length) {
    segmentSelect.innerHTML = "";
    for (const opt of options) {
      const el = document.createElement("option");
      el.value = opt;
      el.textContent = opt === "all" ? "whole path" : `segment ${opt}`;
      segmentSelect.append(el);
    }
  }
}

store.subscribe(redraw);

store.subscribe((state) => {
  // Change-log playback after a successful manipulation.
  if (state.pendingSteps && !playback) {
    const steps = state.pendingSteps;
    stepsLog.innerHTML = "";
    playback = new StepPlayback(
      steps,
      {
        onStep: (i, step) => {
          const li = document.createElement("li");
          li.textContent = `${i + 1}. ${describeStep(step)}`;
          stepsLog.append(li);
        },
        onDone: () => {
          playback = null;
          skipBtn.disabled = true;
          store.clearPendingSteps();
        },
      },
      200,
    );
    skipBtn.disabled = false;
    playback.start();
  }
});

fileInput.addEventListener("change", async () => {
  const file = fileInput.files?.[0];
  if (!file) return;
  try {
    const doc = JSON.parse(await file.text()) as SceneDocument;
    await store.loadScene(doc);
  } catch (err) {
    errorLine.textContent = `could not read scene file: ${err}`;
  }
});

applyBtn.addEventListener("click", () => void store.apply());
undoBtn.addEventListener("click", () => void store.undo());
skipBtn.addEventListener("click", () => playback?.skip());

segmentSelect.addEventListener("change", () => {
  store.setSelectedSegment(segmentSelect.value === "all" ? "all" : Number(segmentSelect.value));
});

const seedInput = document.getElementById("seed") as HTMLInputElement;
const budgetInput = document.getElementById("budget") as HTMLInputElement;
seedInput.addEventListener("change", () => store.setSeed(Number(seedInput.value)));
budgetInput.addEventListener("change", () => store.setBudget(Number(budgetInput.value)));

overallSlider.addEventListener("input", () => {
  store.setOverallTarget(Number(overallSlider.value));
  overallLabel.textContent = overallSlider.value;
});

profileCanvas.addEventListener("mousemove", (ev) => {
  const state = store.getState();
  const rect = profileCanvas.getBoundingClientRect();
  const idx = segmentAtProfileX(state.report, profileCanvas.width, ev.clientX - rect.left);
  if (idx === null || !state.report) {
    hoverInfo.textContent = "";
    return;
  }
  const seg = state.report.segments[idx];
  if (!seg) return;
  const classes = ATTRIBUTES.map((a) => `${a} ${seg.attributes[a]?.class ?? "?"}`).join(", ");
  hoverInfo.textContent = `segment ${idx}: ${classes} | aggregate ${seg.class}`;
});

buildSliderControls();
redraw(store.getState());
