import type { CurvePoint } from "./types";

export interface SeriesSpec {
  key: Exclude<keyof CurvePoint, "round" | "labeled_size">;
  label: string;
  color: string;
}

export interface XY {
  x: number;
  y: number;
}

export interface ChartLayout {
  width: number;
  height: number;
  plot: { x0: number; y0: number; x1: number; y1: number };
  xTicks: { x: number; label: string }[];
  yTicks: { y: number; label: string }[];
  series: { label: string; color: string; points: XY[] }[];
}

export const DEFAULT_SERIES: SeriesSpec[] = [
  { key: "accuracy", label: "accuracy", color: "#2563eb" },
  { key: "f1_1", label: "F1 trusted", color: "#16a34a" },
  { key: "f1_0", label: "F1 untrusted", color: "#d97706" },
];

const MARGIN = { top: 16, right: 14, bottom: 30, left: 44 };

/** Pure geometry for the learning-curve chart.
 *
 * Rounds map linearly onto the plot width (a single round sits in the
 * middle); metric values use a fixed [0, 1] domain so curves from
 * different sessions are visually comparable.
 */
export function layoutCurve(
  curve: CurvePoint[],
  specs: SeriesSpec[] = DEFAULT_SERIES,
  width = 640,
  height = 280,
): ChartLayout {
  const plot = {
    x0: MARGIN.left,
    y0: MARGIN.top,
    x1: width - MARGIN.right,
    y1: height - MARGIN.bottom,
  };
  const rounds = curve.map((p) => p.round);
  const xMin = rounds.length ? Math.min(...rounds) : 0;
  const xMax = rounds.length ? Math.max(...rounds) : 1;
  const xSpan = xMax - xMin;

  const toX = (round: number): number =>
    xSpan === 0
      ? (plot.x0 + plot.x1) / 2
      : plot.x0 + ((round - xMin) / xSpan) * (plot.x1 - plot.x0);
  const toY = (value: number): number =>
    plot.y1 - value * (plot.y1 - plot.y0);

  const xTicks = rounds.map((r) => ({ x: toX(r), label: String(r) }));
  const yTicks = [0, 0.25, 0.5, 0.75, 1].map((v) => ({
    y: toY(v),
    label: v.toFixed(2),
  }));

  const series = specs.map((spec) => ({
    label: spec.label,
    color: spec.color,
    points: curve.map((p) => ({ x: toX(p.round), y: toY(p[spec.key]) })),
  }));
  return { width, height, plot, xTicks, yTicks, series };
}

/** Paint a layout onto a canvas. Display-only; no data math here. */
export function drawCurve(canvas: HTMLCanvasElement, layout: ChartLayout): void {
  const ctx = canvas.getContext("2d");
  if (!ctx) return;
  canvas.width = layout.width;
  canvas.height = layout.height;
  ctx.clearRect(0, 0, layout.width, layout.height);
  ctx.font = "11px system-ui, sans-serif";

  ctx.strokeStyle = "#d4d4d8";
  ctx.fillStyle = "#52525b";
  for (const tick of layout.yTicks) {
    ctx.beginPath();
    ctx.moveTo(layout.plot.x0, tick.y);
    ctx.lineTo(layout.plot.x1, tick.y);
    ctx.stroke();
    ctx.textAlign = "right";
    ctx.fillText(tick.label, layout.plot.x0 - 6, tick.y + 3);
  }
  ctx.textAlign = "center";
  for (const tick of layout.xTicks) {
    ctx.fillText(tick.label, tick.x, layout.plot.y1 + 16);
  }

  for (const series of layout.series) {
    ctx.strokeStyle = series.color;
    ctx.fillStyle = series.color;
    ctx.lineWidth = 2;
    ctx.beginPath();
    series.points.forEach((p, i) =>
      i === 0 ? ctx.moveTo(p.x, p.y) : ctx.lineTo(p.x, p.y),
    );
    ctx.stroke();
    for (const p of series.points) {
      ctx.beginPath();
      ctx.arc(p.x, p.y, 3, 0, Math.PI * 2);
      ctx.fill();
    }
  }

  let legendX = layout.plot.x0;
  for (const series of layout.series) {
    ctx.fillStyle = series.color;
    ctx.fillRect(legendX, 2, 10, 10);
    ctx.fillStyle = "#27272a";
    ctx.textAlign = "left";
    ctx.fillText(series.label, legendX + 14, 11);
    legendX += 14 + ctx.measureText(series.label).width + 18;
  }
}
