/** Step-by-step playback of a manipulation change log: one step per tick
 * (200 ms by default), skippable. The clock is injectable for tests. */

import type { ChangeStep } from "./types.js";

export type Scheduler = (fn: () => void, ms: number) => unknown;
export type CancelTimer = (handle: unknown) => void;

export interface PlaybackHooks {
  onStep?: (index: number, step: ChangeStep) => void;
  onDone?: () => void;
}

export class StepPlayback {
  private index = 0;
  private handle: unknown = null;
  private finished = false;

  constructor(
    private readonly steps: ChangeStep[],
    private readonly hooks: PlaybackHooks = {},
    private readonly intervalMs = 200,
    private readonly schedule: Scheduler = (fn, ms) => setTimeout(fn, ms),
    private readonly cancel: CancelTimer = (h) => clearTimeout(h as number),
  ) {}

  get position(): number {
    return this.index;
  }

  get done(): boolean {
    return this.finished;
  }

  start(): void {
    if (this.finished) return;
    if (this.steps.length === 0) {
      this.finish();
      return;
    }
    this.tick();
  }

  private tick(): void {
    if (this.finished) return;
    const step = this.steps[this.index];
    if (step === undefined) {
      this.finish();
      return;
    }
    this.hooks.onStep?.(this.index, step);
    this.index += 1;
    if (this.index >= this.steps.length) {
      this.handle = this.schedule(() => this.finish(), this.intervalMs);
    } else {
      this.handle = this.schedule(() => this.tick(), this.intervalMs);
    }
  }

  /** Jump straight to the end state. */
  skip(): void {
    if (this.finished) return;
    if (this.handle !== null) this.cancel(this.handle);
    this.index = this.steps.length;
    this.finish();
  }

  private finish(): void {
    if (this.finished) return;
    this.finished = true;
    this.hooks.onDone?.();
  }
}

/** One-line human description of a change step for the playback panel. */
export function describeStep(step: ChangeStep): string {
  const p = step.params;
  const num = (key: string): string => {
    const v = p[key];
    return typeof v === "number" ? v.toFixed(2) : String(v);
  };
  switch (step.op) {
    case "relax_turn":
      return `relax turn at vertex ${p.vertex} by ${num("amount")}`;
    case "scale_corridor":
      return `resize corridor ${p.corridor} to ${num("width")} x ${num("height")} m`;
    case "scale_wall":
      return `shorten wall ${p.wall} to ${num("factor")} of its length`;
    case "insert_wall":
      return `insert a ${num("length")} m partition at (${num("x")}, ${num("y")})`;
    case "remove_obstacle":
      return `remove object ${p.index}`;
    case "move_obstacle":
      return `move object ${p.index} by (${num("dx")}, ${num("dy")}) m`;
    case "insert_obstacle":
      return `place a ${num("side")} m object at (${num("x")}, ${num("y")})`;
    default:
      return `${step.op}`;
  }
}
