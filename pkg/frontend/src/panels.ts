// HTML renderers for the side panels: per-segment explanation table,
// segment selector, dataset schema listing. Pure string -> snapshot friendly.

import { colorFor } from "./colors.js";
import type { DatasetHandle, ExplainResult, SegmentOut } from "./types.js";
import { predicateLabel } from "./types.js";

function esc(text: string | number): string {
  return String(text).replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;");
}

export function renderSegmentTabs(result: ExplainResult, selected: number): string {
  const tabs = result.segments
    .map((seg, i) => {
      const cls = i === selected ? "segment-tab active" : "segment-tab";
      return `<button class="${cls}" data-segment="${i}">${esc(seg.start)} – ${esc(seg.end)}</button>`;
    })
    .join("");
  return `<nav class="segment-tabs">${tabs}</nav>`;
}

export function renderSegmentTable(segment: SegmentOut, hidden: Set<string> = new Set()): string {
  const rows = segment.explanations
    .map((expl, rank) => {
      const label = predicateLabel(expl.predicates);
      const cls = hidden.has(label) ? "expl-row dimmed" : "expl-row";
      return (
        `<tr class="${cls}" data-label="${esc(label)}">` +
        `<td>${rank + 1}</td>` +
        `<td><span class="swatch" style="background:${colorFor(label)}"></span>${esc(label)}</td>` +
        `<td class="num">${expl.gamma}</td>` +
        `<td class="effect">${expl.tau}</td>` +
        `</tr>`
      );
    })
    .join("");
  return (
    `<table class="segment-table"><thead><tr>` +
    `<th>rank</th><th>explanation</th><th>score</th><th>effect</th>` +
    `</tr></thead><tbody>${rows}</tbody></table>`
  );
}

export function renderResultSummary(result: ExplainResult): string {
  const cuts = result.cuts.map((c) => esc(c)).join(", ");
  let timing = "";
  if (result.timings_ms) {
    const phases = ["precompute", "ca", "segmentation"]
      .filter((p) => p in result.timings_ms!)
      .map((p) => `${p} ${result.timings_ms![p]} ms`)
      .join(", ");
    timing = `<span class="timings">(${phases}; total ${result.timings_ms.total} ms)</span>`;
  }
  const text = `${result.segments.length} segments; cuts at ${cuts}`;
  return `<p class="summary">${timing ? `${text} ${timing}` : text}</p>`;
}

export function renderSchemaList(handle: DatasetHandle): string {
  const rows = handle.schema
    .map(
      (a) =>
        `<tr><td>${esc(a.name)}</td><td class="kind-${a.kind}">${a.kind}</td><td>${a.value_type}</td></tr>`,
    )
    .join("");
  return (
    `<table class="schema-table"><thead><tr><th>attribute</th><th>kind</th><th>type</th></tr></thead>` +
    `<tbody>${rows}</tbody></table>` +
    `<p class="schema-meta">${handle.row_count} rows, ${handle.distinct_time_count} timestamps</p>`
  );
}
