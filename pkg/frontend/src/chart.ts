// Pure SVG renderers. Every plotted number comes straight from an API
// payload; these functions just scale and draw.

import { colorFor } from "./colors.js";
import type { CurvePoint, ExplainResult, SeriesPayload } from "./types.js";
import { predicateLabel } from "./types.js";

const W = 960;
const H = 380;
const PAD = { left: 56, right: 16, top: 16, bottom: 42 };

function xScale(n: number): (i: number) => number {
  const span = W - PAD.left - PAD.right;
  return (i) => PAD.left + (n <= 1 ? 0 : (i / (n - 1)) * span);
}

function yScale(lo: number, hi: number): (v: number) => number {
  const span = H - PAD.top - PAD.bottom;
  const range = hi - lo || 1;
  return (v) => PAD.top + (1 - (v - lo) / range) * span;
}

function polyline(points: [number, number][], stroke: string, width: number, cls: string): string {
  const attr = points.map(([x, y]) => `${x.toFixed(1)},${y.toFixed(1)}`).join(" ");
  return `<polyline class="${cls}" fill="none" stroke="${stroke}" stroke-width="${width}" points="${attr}"/>`;
}

export function renderTrendChart(
  series: SeriesPayload,
  result: ExplainResult | null,
  hidden: Set<string> = new Set(),
): string {
  const n = series.values.length;
  const x = xScale(n);
  let lo = Math.min(...series.values);
  let hi = Math.max(...series.values);
  const segmentLines: { label: string; start: number; values: number[] }[] = [];
  const indexOf = new Map(series.timestamps.map((t, i) => [String(t), i]));
  if (result) {
    for (const seg of result.segments) {
      const start = indexOf.get(String(seg.start));
      if (start === undefined) continue;
      for (const expl of seg.explanations) {
        const label = predicateLabel(expl.predicates);
        if (hidden.has(label)) continue;
        segmentLines.push({ label, start, values: expl.series });
        lo = Math.min(lo, ...expl.series);
        hi = Math.max(hi, ...expl.series);
      }
    }
  }
  const y = yScale(lo, hi);

  const parts: string[] = [];
  parts.push(polyline(series.values.map((v, i) => [x(i), y(v)]), "#222", 2, "overall"));
  for (const line of segmentLines) {
    parts.push(
      polyline(
        line.values.map((v, j) => [x(line.start + j), y(v)]),
        colorFor(line.label),
        1.4,
        `expl ${cssSafe(line.label)}`,
      ),
    );
  }
  if (result) {
    for (const cut of result.cuts.slice(1, -1)) {
      const i = indexOf.get(String(cut));
      if (i === undefined) continue;
      parts.push(
        `<line class="cut" x1="${x(i).toFixed(1)}" y1="${PAD.top}" x2="${x(i).toFixed(1)}" ` +
          `y2="${H - PAD.bottom}" stroke="#999" stroke-dasharray="4 3"/>` +
          `<text class="cut-label" x="${x(i).toFixed(1)}" y="${H - 8}" text-anchor="middle">${cut}</text>`,
      );
    }
  }
  return `<svg viewBox="0 0 ${W} ${H}" role="img" aria-label="aggregated series">${parts.join("")}</svg>`;
}

export function renderCurvePanel(curve: CurvePoint[], chosenK: number): string {
  if (curve.length === 0) return "<svg viewBox=\"0 0 320 180\"></svg>";
  const w = 320;
  const h = 180;
  const pad = 28;
  const ks = curve.map((p) => p.k);
  const vs = curve.map((p) => p.variance);
  const kLo = Math.min(...ks);
  const kHi = Math.max(...ks);
  const vLo = Math.min(...vs);
  const vHi = Math.max(...vs);
  const px = (k: number) => pad + ((k - kLo) / (kHi - kLo || 1)) * (w - 2 * pad);
  const py = (v: number) => pad + (1 - (v - vLo) / (vHi - vLo || 1)) * (h - 2 * pad);
  const pts = curve.map((p) => `${px(p.k).toFixed(1)},${py(p.variance).toFixed(1)}`).join(" ");
  const chosen = curve.find((p) => p.k === chosenK);
  const marker = chosen
    ? `<circle class="elbow" cx="${px(chosen.k).toFixed(1)}" cy="${py(chosen.variance).toFixed(1)}" r="5" fill="#d62728"/>` +
      `<text class="elbow-label" x="${px(chosen.k).toFixed(1)}" y="${(py(chosen.variance) - 9).toFixed(1)}" text-anchor="middle">K=${chosen.k}</text>`
    : "";
  const ticks = curve
    .map(
      (p) =>
        `<text class="k-tick" x="${px(p.k).toFixed(1)}" y="${h - 8}" text-anchor="middle">${p.k}</text>`,
    )
    .join("");
  return (
    `<svg viewBox="0 0 ${w} ${h}" role="img" aria-label="K-variance curve">` +
    `<polyline fill="none" stroke="#1f77b4" stroke-width="1.5" points="${pts}"/>${marker}${ticks}</svg>`
  );
}

function cssSafe(label: string): string {
  return label.replace(/[^a-zA-Z0-9_-]+/g, "_");
}
