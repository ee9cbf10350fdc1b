import { describe, expect, it } from "vitest";

import { confirmItem, correctItem, makeQueue, pendingCount, sortQueue } from "../src/state.js";
import type { WireClassification } from "../src/types.js";
import { fixtures } from "./helpers.js";

const items = fixtures.classifications.items as WireClassification[];

describe("queue state machine", () => {
  it("starts every item pending", () => {
    const queue = makeQueue(items);
    expect(queue).toHaveLength(items.length);
    expect(pendingCount(queue)).toBe(items.length);
    expect(queue.every((q) => q.correction === null)).toBe(true);
  });

  it("confirm produces a correction equal to the prediction", () => {
    const queue = makeQueue(items);
    const item = queue[0]!;
    const correction = confirmItem(item, "op-9");
    expect(item.state).toBe("confirmed");
    expect(correction.corrected).toEqual({
      class_id: item.classification.class_id,
      kind: item.classification.kind,
      bug_id: item.classification.bug_id,
    });
    expect(correction.predicted).toEqual(correction.corrected);
    expect(correction.event).toEqual(item.classification.event);
    expect(correction.operator_id).toBe("op-9");
    expect(correction.note).toBeNull();
  });

  it("correct reassigns the label, including brand-new classes", () => {
    const queue = makeQueue(items);
    const item = queue[1]!;
    const corrected = { class_id: "brand_new", kind: "true_positive" as const, bug_id: null };
    const correction = correctItem(item, corrected, "op-9", "looks like a fresh regression");
    expect(item.state).toBe("corrected");
    expect(item.correction).toBe(correction);
    expect(correction.corrected).toEqual(corrected);
    expect(correction.predicted.class_id).toBe(item.classification.class_id);
    expect(correction.note).toBe("looks like a fresh regression");
  });

  it("only pending items can transition", () => {
    const queue = makeQueue(items);
    const item = queue[0]!;
    confirmItem(item, "op");
    expect(() => confirmItem(item, "op")).toThrow(/pending/);
    expect(() =>
      correctItem(item, { class_id: "x", kind: "false_positive", bug_id: null }, "op"),
    ).toThrow(/pending/);
  });

  it("rejects an empty corrected class id", () => {
    const queue = makeQueue(items);
    expect(() =>
      correctItem(queue[0]!, { class_id: "", kind: "false_positive", bug_id: null }, "op"),
    ).toThrow(/non-empty/);
  });

  it("sorts ascending by probability or confidence", () => {
    const queue = makeQueue(items);
    for (const key of ["probability", "confidence"] as const) {
      const sorted = sortQueue(queue, key).map((q) => q.classification[key]);
      for (let i = 1; i < sorted.length; i++) {
        expect(sorted[i]!).toBeGreaterThanOrEqual(sorted[i - 1]!);
      }
    }
  });

  it("sorting does not mutate the original order", () => {
    const queue = makeQueue(items);
    const before = queue.map((q) => q.classification.event_id);
    sortQueue(queue, "probability");
    expect(queue.map((q) => q.classification.event_id)).toEqual(before);
  });
});
