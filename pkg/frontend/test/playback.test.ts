import { describe, expect, it } from "vitest";

import { StepPlayback, describeStep } from "../src/playback.js";
import type { ChangeStep } from "../src/types.js";

function steps(n: number): ChangeStep[] {
  return Array.from({ length: n }, (_, i) => ({
    op: "move_obstacle",
    params: { index: i, dx: 0.5, dy: -0.25 },
    attribute: "symmetry",
  }));
}

/** Manual clock: timers fire only when tick() is called. */
class ManualClock {
  private queue: (() => void)[] = [];

  schedule = (fn: () => void): unknown => {
    this.queue.push(fn);
    return this.queue.length - 1;
  };

  cancel = (handle: unknown): void => {
    const idx = handle as number;
    this.queue[idx] = () => undefined;
  };

  tick(): void {
    const fn = this.queue.shift();
    fn?.();
  }

  drain(): void {
    while (this.queue.length) this.tick();
  }
}

describe("StepPlayback", () => {
  it("emits steps in order, one per tick, then finishes", () => {
    const clock = new ManualClock();
    const seen: number[] = [];
    let done = false;
    const pb = new StepPlayback(
      steps(3),
      { onStep: (i) => seen.push(i), onDone: () => (done = true) },
      200,
      clock.schedule,
      clock.cancel,
    );
    pb.start();
    expect(seen).toEqual([0]);
    clock.tick();
    clock.tick();
    expect(seen).toEqual([0, 1, 2]);
    expect(done).toBe(false);
    clock.tick(); // trailing interval before finish
    expect(done).toBe(true);
  });

  it("skip jumps straight to done", () => {
    const clock = new ManualClock();
    const seen: number[] = [];
    let done = false;
    const pb = new StepPlayback(
      steps(5),
      { onStep: (i) => seen.push(i), onDone: () => (done = true) },
      200,
      clock.schedule,
      clock.cancel,
    );
    pb.start();
    pb.skip();
    expect(done).toBe(true);
    expect(pb.position).toBe(5);
    clock.drain(); // cancelled timers must not re-fire callbacks
    expect(seen).toEqual([0]);
  });

  it("empty change log finishes immediately", () => {
    let done = false;
    const pb = new StepPlayback([], { onDone: () => (done = true) }, 200, () => 0, () => undefined);
    pb.start();
    expect(done).toBe(true);
  });
});

describe("describeStep", () => {
  it("renders readable lines for the step vocabulary", () => {
    expect(describeStep({ op: "relax_turn", params: { vertex: 2, amount: 0.4 } })).toContain(
      "vertex 2",
    );
    expect(
      describeStep({ op: "insert_obstacle", params: { x: 3, y: 1, side: 1.2, tag: "t" } }),
    ).toContain("1.20 m object");
    expect(describeStep({ op: "remove_obstacle", params: { index: 4 } })).toContain("object 4");
    expect(describeStep({ op: "custom_op", params: {} })).toBe("custom_op");
  });
});
