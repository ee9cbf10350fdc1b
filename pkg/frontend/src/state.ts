// Review-queue state: one item per uncertain classification, moving
// pending -> confirmed | corrected exactly once. Corrections are built
// here so the POST payload matches the wire schema byte for byte.

import type { Correction, WireClassification, WireLabel } from "./types.js";

export type ReviewState = "pending" | "confirmed" | "corrected";

export interface QueueItem {
  classification: WireClassification;
  state: ReviewState;
  correction: Correction | null;
}

export type SortKey = "probability" | "confidence";

export function makeQueue(items: WireClassification[]): QueueItem[] {
  return items.map((classification) => ({
    classification,
    state: "pending",
    correction: null,
  }));
}

export function sortQueue(items: QueueItem[], key: SortKey): QueueItem[] {
  // Ascending: the least certain items surface first.
  return [...items].sort((a, b) => {
    const d = a.classification[key] - b.classification[key];
    if (d !== 0) return d;
    return a.classification.event_id < b.classification.event_id ? -1 : 1;
  });
}

function buildCorrection(
  item: QueueItem,
  corrected: WireLabel,
  operatorId: string,
  note: string | null,
): Correction {
  const { event, class_id, kind, bug_id } = item.classification;
  return {
    event,
    predicted: { class_id, kind, bug_id },
    corrected,
    operator_id: operatorId,
    note,
  };
}

function transition(item: QueueItem, state: ReviewState, correction: Correction): Correction {
  if (item.state !== "pending") {
    throw new Error(`review state is ${item.state}; only pending items can transition`);
  }
  item.state = state;
  item.correction = correction;
  return correction;
}

/** Operator agrees with the prediction: corrected == predicted. */
export function confirmItem(item: QueueItem, operatorId: string, note: string | null = null): Correction {
  const { class_id, kind, bug_id } = item.classification;
  return transition(
    item,
    "confirmed",
    buildCorrection(item, { class_id, kind, bug_id }, operatorId, note),
  );
}

/** Operator reassigns the root cause (possibly a brand-new class id). */
export function correctItem(
  item: QueueItem,
  corrected: WireLabel,
  operatorId: string,
  note: string | null = null,
): Correction {
  if (!corrected.class_id) throw new Error("corrected class_id must be non-empty");
  return transition(item, "corrected", buildCorrection(item, corrected, operatorId, note));
}

export function pendingCount(items: QueueItem[]): number {
  return items.filter((i) => i.state === "pending").length;
}
