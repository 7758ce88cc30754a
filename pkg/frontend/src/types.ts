// Payload shapes of the analysis service. The UI renders these verbatim and
// never recomputes aggregates client-side.

export interface SchemaAttr {
  name: string;
  kind: "time" | "dimension" | "measure";
  value_type: string;
}

export interface DatasetHandle {
  id: string;
  schema: SchemaAttr[];
  row_count: number;
  distinct_time_count: number;
}

export interface SeriesPayload {
  timestamps: (string | number)[];
  values: number[];
}

export interface Predicate {
  attr: string;
  value: string | number;
}

export interface ExplanationOut {
  predicates: Predicate[];
  gamma: number;
  tau: "+" | "-";
  effect_sign: 1 | -1;
  series: number[];
}

export interface SegmentOut {
  start: string | number;
  end: string | number;
  explanations: ExplanationOut[];
}

export interface CurvePoint {
  k: number;
  variance: number;
}

export interface ExplainResult {
  version: number;
  k: number;
  cuts: (string | number)[];
  curve: CurvePoint[];
  segments: SegmentOut[];
  timings_ms?: Record<string, number>;
}

export interface ExplainDraft {
  dataset_id: string;
  measure: string | null;
  agg: "sum" | "count" | "avg";
  explain_by: string[];
  m: number;
  beta_max: number;
  k: number | "auto";
  k_max: number;
  smooth_window: number;
  filter_ratio: number;
  guess_verify: boolean;
  sketching: boolean;
  variance_metric: string;
}

export function predicateLabel(predicates: Predicate[]): string {
  return predicates.map((p) => `${p.attr}=${p.value}`).join(" & ");
}
