// Application shell: replay picker, model panel with the retrain
// control, triage queue, and the class overview. All mutations go
// through the API; reloading the page rebuilds identical state.

import type { ApiClient } from "../api.js";
import { NoModelError, RetrainInProgressError } from "../api.js";
import { clear, h } from "../dom.js";
import type { QueueItem } from "../state.js";
import { confirmItem, correctItem, makeQueue } from "../state.js";
import type { WireLabel } from "../types.js";
import { createOverviewView } from "./overview.js";
import { createQueueView } from "./queue.js";

export interface App {
  element: HTMLElement;
  refresh(): Promise<void>;
  loadReplay(replayId: string): Promise<void>;
  retrain(): Promise<void>;
}

export function createApp(api: ApiClient): App {
  const versionBadge = h("span", { class: "version-badge", "data-testid": "model-version" }, ["–"]);
  const status = h("span", { class: "status", "data-testid": "status" });
  const operatorInput = h("input", {
    value: "operator",
    class: "operator",
    "data-testid": "operator-input",
    title: "operator id recorded on corrections",
  }) as HTMLInputElement;
  const retrainBtn = h("button", { "data-testid": "retrain-btn" }, ["Retrain"]);
  const replaySelect = h("select", { "data-testid": "replay-select" }) as HTMLSelectElement;

  const overview = createOverviewView();
  let queueItems: QueueItem[] = [];
  let knownClasses: string[] = [];

  const queue = createQueueView({
    onConfirm(item) {
      void submit(confirmItem(item, operatorInput.value));
    },
    onCorrect(item, corrected: WireLabel) {
      void submit(correctItem(item, corrected, operatorInput.value));
    },
  });

  async function submit(correction: ReturnType<typeof confirmItem>): Promise<void> {
    try {
      const receipt = await api.postCorrections([correction]);
      status.textContent =
        receipt.new_classes.length > 0
          ? `correction stored (new class: ${receipt.new_classes.join(", ")})`
          : "correction stored";
    } catch (err) {
      status.textContent = `correction failed: ${(err as Error).message}`;
    }
  }

  const element = h("div", { class: "app" }, [
    h("header", {}, [
      h("h1", {}, ["Replay triage"]),
      h("span", {}, ["model version ", versionBadge]),
      retrainBtn,
      h("label", {}, ["operator ", operatorInput]),
      h("label", {}, ["replay ", replaySelect]),
      status,
    ]),
    h("main", {}, [queue.element, overview.element]),
  ]);

  retrainBtn.addEventListener("click", () => void retrain());
  replaySelect.addEventListener("change", () => void loadReplay(replaySelect.value));

  async function refreshModelPanel(): Promise<void> {
    try {
      const [model, projection] = await Promise.all([api.getModel(), api.getProjection()]);
      versionBadge.textContent = String(model.version);
      knownClasses = model.classes.map((c) => c.class_id);
      overview.render(model, projection);
    } catch (err) {
      if (err instanceof NoModelError) {
        versionBadge.textContent = "none";
        status.textContent = "no trained model yet - retrain to create version 1";
        return;
      }
      throw err;
    }
  }

  async function refreshReplays(): Promise<void> {
    const replays = await api.listReplays();
    clear(replaySelect);
    for (const r of replays) {
      replaySelect.append(
        h("option", { value: r.replay_id }, [
          `${r.replay_id} (${r.capture_id}, ${r.uncertain}/${r.total} uncertain)`,
        ]),
      );
    }
    if (replays.length > 0) {
      const last = replays[replays.length - 1]!;
      replaySelect.value = last.replay_id;
      await loadReplay(last.replay_id);
    }
  }

  async function loadReplay(replayId: string): Promise<void> {
    if (!replayId) return;
    const page = await api.getClassifications(replayId, { uncertain: true, pageSize: 1000 });
    queueItems = makeQueue(page.items);
    queue.render(queueItems, knownClasses);
  }

  async function retrain(): Promise<void> {
    retrainBtn.setAttribute("disabled", "true");
    status.textContent = "retraining…";
    try {
      const result = await api.retrain();
      status.textContent =
        `retrained: version ${result.old_version} -> ${result.new_version} ` +
        `(${result.training_size} rows)`;
      versionBadge.textContent = String(result.new_version);
      await refreshModelPanel();
    } catch (err) {
      status.textContent =
        err instanceof RetrainInProgressError
          ? "retrain in progress"
          : `retrain failed: ${(err as Error).message}`;
    } finally {
      retrainBtn.removeAttribute("disabled");
    }
  }

  async function refresh(): Promise<void> {
    await refreshModelPanel();
    await refreshReplays();
  }

  return { element, refresh, loadReplay, retrain };
}
