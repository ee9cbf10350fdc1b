// The triage queue: uncertain classifications for one replay, least
// certain first, each row expandable to the full event and the
// neighbor evidence the prediction rests on.

import { clear, fmt, h } from "../dom.js";
import { classColor } from "../palette.js";
import type { QueueItem, SortKey } from "../state.js";
import { sortQueue } from "../state.js";
import type { LabelKind, WireLabel, WireNeighbor } from "../types.js";

export interface QueueHandlers {
  onConfirm(item: QueueItem): void;
  onCorrect(item: QueueItem, corrected: WireLabel): void;
}

export interface QueueView {
  element: HTMLElement;
  render(items: QueueItem[], knownClasses: string[]): void;
  setSort(key: SortKey): void;
}

export function createQueueView(handlers: QueueHandlers): QueueView {
  let sortKey: SortKey = "confidence";
  let current: QueueItem[] = [];
  let classes: string[] = [];

  const list = h("div", { class: "queue-list", "data-testid": "queue-list" });
  const count = h("span", { class: "queue-count", "data-testid": "queue-count" });

  const sortSelect = h("select", { "data-testid": "queue-sort" }, [
    h("option", { value: "confidence" }, ["confidence ↑"]),
    h("option", { value: "probability" }, ["probability ↑"]),
  ]);
  sortSelect.addEventListener("change", () => {
    sortKey = sortSelect.value as SortKey;
    render(current, classes);
  });

  const element = h("section", { class: "queue" }, [
    h("div", { class: "queue-header" }, [
      h("h2", {}, ["Uncertain classifications"]),
      count,
      h("label", {}, ["sort by ", sortSelect]),
    ]),
    list,
  ]);

  function render(items: QueueItem[], knownClasses: string[]): void {
    current = items;
    classes = knownClasses;
    clear(list);
    count.textContent = `${items.length} items`;
    for (const item of sortQueue(items, sortKey)) {
      list.append(renderRow(item, knownClasses, handlers, () => render(current, classes)));
    }
  }

  return {
    element,
    render,
    setSort(key: SortKey) {
      sortKey = key;
      sortSelect.value = key;
      render(current, classes);
    },
  };
}

function renderRow(
  item: QueueItem,
  knownClasses: string[],
  handlers: QueueHandlers,
  rerender: () => void,
): HTMLElement {
  const c = item.classification;
  const row = h("details", { class: `queue-row state-${item.state}`, "data-testid": "queue-row" });
  const badge = h("span", {
    class: "class-badge",
    style: `background:${classColor(c.class_id)}`,
  }, [c.class_id]);

  row.append(
    h("summary", {}, [
      h("code", { class: "event-id" }, [c.event_id]),
      badge,
      h("span", { class: "metric" }, [`p ${fmt(c.probability)}`]),
      h("span", { class: "metric" }, [`conf ${fmt(c.confidence)}`]),
      h("span", { class: "state-tag", "data-testid": "row-state" }, [item.state]),
    ]),
  );

  const body = h("div", { class: "row-body" });
  body.append(
    h("p", { class: "message" }, [c.event.error_message || "(empty message)"]),
    attributeTable(c),
  );
  if (c.event.trace_excerpt) {
    body.append(h("pre", { class: "trace" }, [c.event.trace_excerpt]));
  }
  body.append(neighborTable(c.neighbors));

  if (item.state === "pending") {
    body.append(actionBar(item, knownClasses, handlers, rerender));
  } else if (item.correction) {
    body.append(
      h("p", { class: "resolution", "data-testid": "row-resolution" }, [
        `${item.state}: ${item.correction.corrected.class_id} by ${item.correction.operator_id}`,
      ]),
    );
  }
  row.append(body);
  return row;
}

function attributeTable(c: { event: { error_code: string; sql_type: string; sql_subtype: string; request_type: string } }): HTMLElement {
  const e = c.event;
  return h("table", { class: "attrs" }, [
    h("tr", {}, [h("th", {}, ["error code"]), h("td", {}, [e.error_code])]),
    h("tr", {}, [h("th", {}, ["sql type"]), h("td", {}, [e.sql_type])]),
    h("tr", {}, [h("th", {}, ["sql subtype"]), h("td", {}, [e.sql_subtype])]),
    h("tr", {}, [h("th", {}, ["request type"]), h("td", {}, [e.request_type])]),
  ]);
}

function neighborTable(neighbors: WireNeighbor[]): HTMLElement {
  const rows = neighbors.map((n) =>
    h("tr", { "data-testid": "neighbor-row" }, [
      h("td", {}, [String(n.training_row_id)]),
      h("td", {}, [n.class_id]),
      h("td", {}, [fmt(n.distance)]),
    ]),
  );
  return h("table", { class: "neighbors", "data-testid": "neighbor-table" }, [
    h("tr", {}, [h("th", {}, ["row"]), h("th", {}, ["class"]), h("th", {}, ["distance"])]),
    ...rows,
  ]);
}

function actionBar(
  item: QueueItem,
  knownClasses: string[],
  handlers: QueueHandlers,
  rerender: () => void,
): HTMLElement {
  const confirmBtn = h("button", { "data-testid": "confirm-btn" }, ["Confirm"]);
  confirmBtn.addEventListener("click", () => {
    handlers.onConfirm(item);
    rerender();
  });

  const classInput = h("input", {
    list: "known-classes",
    placeholder: "class id (existing or new)",
    "data-testid": "class-input",
  });
  const datalist = h("datalist", { id: "known-classes" },
    knownClasses.map((cid) => h("option", { value: cid })));
  const kindSelect = h("select", { "data-testid": "kind-select" }, [
    h("option", { value: "false_positive" }, ["false positive"]),
    h("option", { value: "true_positive" }, ["true positive"]),
  ]);
  const correctBtn = h("button", { "data-testid": "correct-btn" }, ["Correct"]);
  correctBtn.addEventListener("click", () => {
    const classId = (classInput as HTMLInputElement).value.trim();
    if (!classId) return;
    handlers.onCorrect(item, {
      class_id: classId,
      kind: (kindSelect as HTMLSelectElement).value as LabelKind,
      bug_id: null,
    });
    rerender();
  });

  return h("div", { class: "actions" }, [
    confirmBtn, classInput, datalist, kindSelect, correctBtn,
  ]);
}
