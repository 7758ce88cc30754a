import type { ApiClient } from "./api.js";
import type { DatasetHandle, ExplainDraft, ExplainResult } from "./types.js";

export const VARIANCE_METRICS = [
  "tse",
  "dist1",
  "dist2",
  "allpair",
  "Stse",
  "Sdist1",
  "Sdist2",
  "Sallpair",
];

export function defaultDraft(datasetId = ""): ExplainDraft {
  return {
    dataset_id: datasetId,
    measure: null,
    agg: "sum",
    explain_by: [],
    m: 3,
    beta_max: 3,
    k: "auto",
    k_max: 20,
    smooth_window: 1,
    filter_ratio: 0.001,
    guess_verify: true,
    sketching: true,
    variance_metric: "tse",
  };
}

export type FieldErrors = Partial<Record<keyof ExplainDraft, string>>;

// Field-by-field validation before submission; a draft either serializes to
// a valid request or each offending field carries a message.
export function validateDraft(draft: ExplainDraft): FieldErrors {
  const errors: FieldErrors = {};
  if (!draft.dataset_id) errors.dataset_id = "pick a dataset";
  if (draft.explain_by.length === 0) errors.explain_by = "pick at least one attribute";
  if (draft.agg !== "count" && !draft.measure) errors.measure = "pick a measure";
  if (!Number.isInteger(draft.m) || draft.m < 1) errors.m = "m must be a positive integer";
  if (!Number.isInteger(draft.beta_max) || draft.beta_max < 1)
    errors.beta_max = "max order must be a positive integer";
  if (draft.k !== "auto" && (!Number.isInteger(draft.k) || (draft.k as number) < 1))
    errors.k = "k must be 'auto' or a positive integer";
  if (!Number.isInteger(draft.smooth_window) || draft.smooth_window < 1)
    errors.smooth_window = "window must be a positive integer";
  if (!(draft.filter_ratio >= 0 && draft.filter_ratio < 1))
    errors.filter_ratio = "ratio must be in [0, 1)";
  if (!VARIANCE_METRICS.includes(draft.variance_metric))
    errors.variance_metric = "unknown metric";
  return errors;
}

export interface ViewState {
  datasets: DatasetHandle[];
  selected: DatasetHandle | null;
  draft: ExplainDraft;
  lastResult: ExplainResult | null;
  selectedSegment: number;
  hiddenExplanations: Set<string>;
  errors: FieldErrors;
  banner: string | null;
  runSeq: number; // last-write-wins token for in-flight explains
}

export function initialState(): ViewState {
  return {
    datasets: [],
    selected: null,
    draft: defaultDraft(),
    lastResult: null,
    selectedSegment: 0,
    hiddenExplanations: new Set(),
    errors: {},
    banner: null,
    runSeq: 0,
  };
}

/**
 * Submit the draft; a newer submission supersedes a pending one
 * (last-write-wins on the view state). Returns the result only when this
 * call is still the latest.
 */
export async function runExplain(
  client: ApiClient,
  state: ViewState,
  draft: ExplainDraft,
): Promise<ExplainResult | null> {
  state.errors = validateDraft(draft);
  if (Object.keys(state.errors).length > 0) return null;
  const token = ++state.runSeq;
  const result = await client.explain(draft);
  if (token !== state.runSeq) return null; // superseded while in flight
  state.lastResult = result;
  state.selectedSegment = Math.min(state.selectedSegment, result.segments.length - 1);
  state.banner = null;
  return result;
}
