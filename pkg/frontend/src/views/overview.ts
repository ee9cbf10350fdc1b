// Class overview: per-class training counts as a bar chart and the 2D
// projection of training message vectors as a scatter, both colored by
// the stable class palette. Hover over the scatter names the class.

import { clear, h } from "../dom.js";
import { classColor } from "../palette.js";
import type { ModelInfo, Projection, ProjectionPoint } from "../types.js";

export interface OverviewView {
  element: HTMLElement;
  render(model: ModelInfo, projection: Projection): void;
  /** Number of points drawn in the last scatter render. */
  pointCount(): number;
}

const SCATTER_SIZE = 420;

export function createOverviewView(): OverviewView {
  const bars = h("div", { class: "bars", "data-testid": "class-bars" });
  const canvas = h("canvas", {
    width: String(SCATTER_SIZE),
    height: String(SCATTER_SIZE),
    class: "scatter",
    "data-testid": "scatter",
  });
  const hover = h("div", { class: "scatter-hover", "data-testid": "scatter-hover" });
  const element = h("section", { class: "overview" }, [
    h("h2", {}, ["Class overview"]),
    bars,
    h("div", { class: "scatter-wrap" }, [canvas, hover]),
  ]);

  let drawn: { px: number; py: number; point: ProjectionPoint }[] = [];

  canvas.addEventListener("mousemove", (ev: MouseEvent) => {
    const rect = canvas.getBoundingClientRect();
    const mx = ev.clientX - rect.left;
    const my = ev.clientY - rect.top;
    let best: { d: number; point: ProjectionPoint } | null = null;
    for (const { px, py, point } of drawn) {
      const d = (px - mx) ** 2 + (py - my) ** 2;
      if (best === null || d < best.d) best = { d, point };
    }
    hover.textContent =
      best && best.d <= 100 ? `${best.point.class_id} (row ${best.point.training_row_id})` : "";
  });

  function render(model: ModelInfo, projection: Projection): void {
    clear(bars);
    const max = Math.max(...model.classes.map((c) => c.count), 1);
    for (const cls of model.classes) {
      const width = Math.max(2, Math.round((cls.count / max) * 100));
      bars.append(
        h("div", { class: "bar-row", "data-testid": "class-bar" }, [
          h("span", { class: "bar-label" }, [cls.class_id]),
          h("div", {
            class: "bar",
            style: `width:${width}%;background:${classColor(cls.class_id)}`,
            title: `${cls.class_id}: ${cls.count} (${cls.kind})`,
          }),
          h("span", { class: "bar-count" }, [String(cls.count)]),
        ]),
      );
    }
    drawn = drawScatter(canvas, projection.points);
  }

  return { element, render, pointCount: () => drawn.length };
}

export function drawScatter(
  canvas: HTMLCanvasElement,
  points: ProjectionPoint[],
): { px: number; py: number; point: ProjectionPoint }[] {
  const ctx = canvas.getContext("2d");
  const placed: { px: number; py: number; point: ProjectionPoint }[] = [];
  if (points.length === 0) {
    ctx?.clearRect(0, 0, canvas.width, canvas.height);
    return placed;
  }
  const xs = points.map((p) => p.x);
  const ys = points.map((p) => p.y);
  const minX = Math.min(...xs);
  const maxX = Math.max(...xs);
  const minY = Math.min(...ys);
  const maxY = Math.max(...ys);
  const pad = 12;
  const spanX = maxX - minX || 1;
  const spanY = maxY - minY || 1;
  const w = canvas.width - 2 * pad;
  const hgt = canvas.height - 2 * pad;

  ctx?.clearRect(0, 0, canvas.width, canvas.height);
  for (const point of points) {
    const px = pad + ((point.x - minX) / spanX) * w;
    const py = pad + (1 - (point.y - minY) / spanY) * hgt;
    placed.push({ px, py, point });
    if (ctx) {
      ctx.fillStyle = classColor(point.class_id);
      ctx.beginPath();
      ctx.arc(px, py, 2.5, 0, Math.PI * 2);
      ctx.fill();
    }
  }
  return placed;
}
