// DOM wiring. All analytics numbers come from API payloads; this module only
// routes events, holds the view state, and re-renders.

import { ApiClient, ApiError } from "./api.js";
import { renderCurvePanel, renderTrendChart } from "./chart.js";
import { renderResultSummary, renderSchemaList, renderSegmentTable, renderSegmentTabs } from "./panels.js";
import { initialState, runExplain, validateDraft } from "./state.js";
import type { DatasetHandle, SeriesPayload } from "./types.js";
import { predicateLabel } from "./types.js";

const client = new ApiClient();
const state = initialState();
let overallSeries: SeriesPayload | null = null;

const $ = <T extends HTMLElement>(id: string): T => document.getElementById(id) as T;

async function boot(): Promise<void> {
  $("run").addEventListener("click", () => void submit());
  $("upload").addEventListener("change", () => void upload());
  $("dataset").addEventListener("change", () => void pickDataset($("dataset") as unknown as HTMLSelectElement));
  $("segment-tabs").addEventListener("click", (ev) => {
    const btn = (ev.target as HTMLElement).closest("button[data-segment]");
    if (btn) {
      state.selectedSegment = Number(btn.getAttribute("data-segment"));
      renderResult();
    }
  });
  $("segment-panel").addEventListener("click", (ev) => {
    const row = (ev.target as HTMLElement).closest("tr[data-label]");
    if (row) {
      const label = row.getAttribute("data-label")!;
      if (state.hiddenExplanations.has(label)) state.hiddenExplanations.delete(label);
      else state.hiddenExplanations.add(label);
      renderResult();
    }
  });
  await refreshDatasets();
}

async function refreshDatasets(): Promise<void> {
  state.datasets = await client.listDatasets();
  const select = $("dataset") as unknown as HTMLSelectElement;
  select.innerHTML =
    `<option value="">— pick a dataset —</option>` +
    state.datasets.map((d) => `<option value="${d.id}">${d.id}</option>`).join("");
  $("empty-state").style.display = state.datasets.length ? "none" : "block";
}

async function upload(): Promise<void> {
  const input = $("upload") as unknown as HTMLInputElement;
  const file = input.files?.[0];
  const timeAttr = ($("time-attr") as unknown as HTMLInputElement).value.trim();
  if (!file || !timeAttr) {
    banner("choose a CSV file and name its time column first");
    return;
  }
  try {
    const handle = await client.uploadDataset(file, timeAttr);
    await refreshDatasets();
    ($("dataset") as unknown as HTMLSelectElement).value = handle.id;
    await pickDataset($("dataset") as unknown as HTMLSelectElement);
  } catch (err) {
    banner(describe(err));
  }
}

async function pickDataset(select: HTMLSelectElement): Promise<void> {
  const handle = state.datasets.find((d) => d.id === select.value) ?? null;
  state.selected = handle;
  state.draft.dataset_id = handle?.id ?? "";
  state.lastResult = null;
  if (!handle) return;
  $("schema-panel").innerHTML = renderSchemaList(handle);
  buildAttributePickers(handle);
  await preview();
}

function buildAttributePickers(handle: DatasetHandle): void {
  const measures = handle.schema.filter((a) => a.kind !== "time" && a.value_type !== "text");
  const dims = handle.schema.filter((a) => a.kind === "dimension");
  ($("measure") as unknown as HTMLSelectElement).innerHTML = measures
    .map((a) => `<option>${a.name}</option>`)
    .join("");
  $("explain-by").innerHTML = dims
    .map(
      (a) =>
        `<label><input type="checkbox" class="explain-attr" value="${a.name}"> ${a.name}</label>`,
    )
    .join("");
}

async function preview(): Promise<void> {
  if (!state.selected) return;
  const measure = ($("measure") as unknown as HTMLSelectElement).value || null;
  const agg = ($("agg") as unknown as HTMLSelectElement).value;
  try {
    overallSeries = await client.series(state.selected.id, measure, agg);
    $("chart").innerHTML = renderTrendChart(overallSeries, null);
  } catch (err) {
    banner(describe(err));
  }
}

function draftFromControls(): void {
  const d = state.draft;
  d.measure = ($("measure") as unknown as HTMLSelectElement).value || null;
  d.agg = ($("agg") as unknown as HTMLSelectElement).value as typeof d.agg;
  d.explain_by = Array.from(document.querySelectorAll<HTMLInputElement>(".explain-attr:checked")).map(
    (el) => el.value,
  );
  d.m = Number(($("m") as unknown as HTMLInputElement).value);
  const kRaw = ($("k") as unknown as HTMLInputElement).value.trim();
  d.k = kRaw === "auto" || kRaw === "" ? "auto" : Number(kRaw);
  d.smooth_window = Number(($("smooth") as unknown as HTMLInputElement).value);
}

async function submit(): Promise<void> {
  if (!overallSeries) await preview();
  draftFromControls();
  const errors = validateDraft(state.draft);
  showFieldErrors(errors);
  if (Object.keys(errors).length > 0) return;
  $("run").setAttribute("disabled", "true");
  try {
    const result = await runExplain(client, state, { ...state.draft });
    if (result) renderResult();
  } catch (err) {
    banner(describe(err));
  } finally {
    $("run").removeAttribute("disabled");
  }
}

function renderResult(): void {
  const result = state.lastResult;
  if (!result || !overallSeries) return;
  $("chart").innerHTML = renderTrendChart(overallSeries, result, state.hiddenExplanations);
  $("summary").innerHTML = renderResultSummary(result);
  $("segment-tabs").innerHTML = renderSegmentTabs(result, state.selectedSegment);
  $("segment-panel").innerHTML = renderSegmentTable(
    result.segments[state.selectedSegment],
    state.hiddenExplanations,
  );
  $("curve-panel").innerHTML = renderCurvePanel(result.curve, result.k);
  const labels = new Set(
    result.segments.flatMap((s) => s.explanations.map((e) => predicateLabel(e.predicates))),
  );
  for (const hidden of [...state.hiddenExplanations]) {
    if (!labels.has(hidden)) state.hiddenExplanations.delete(hidden);
  }
}

function showFieldErrors(errors: ReturnType<typeof validateDraft>): void {
  document.querySelectorAll(".field-error").forEach((el) => (el.textContent = ""));
  for (const [field, message] of Object.entries(errors)) {
    const slot = document.querySelector(`.field-error[data-field="${field}"]`);
    if (slot) slot.textContent = message ?? "";
    else banner(`${field}: ${message}`);
  }
}

function banner(message: string | null): void {
  state.banner = message;
  const el = $("banner");
  el.textContent = message ?? "";
  el.style.display = message ? "block" : "none";
}

function describe(err: unknown): string {
  if (err instanceof ApiError) {
    return err.status === 0 ? `network failure — retry (${err.message})` : err.message;
  }
  return String(err);
}

window.addEventListener("DOMContentLoaded", () => void boot());
