import type { DatasetHandle, ExplainDraft, ExplainResult, SeriesPayload } from "./types.js";

type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ApiError extends Error {
  constructor(public status: number, message: string) {
    super(message);
  }
}

// Thin typed client over the service API; the fetch implementation is
// injectable so tests can replay recorded payloads.
export class ApiClient {
  constructor(private fetchImpl: FetchLike = (...args) => fetch(...args), private base = "") {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    let resp: Response;
    try {
      resp = await this.fetchImpl(this.base + path, init);
    } catch (err) {
      throw new ApiError(0, `network failure: ${String(err)}`);
    }
    const body = await resp.json().catch(() => ({}));
    if (!resp.ok) {
      throw new ApiError(resp.status, (body as { detail?: string }).detail ?? resp.statusText);
    }
    return body as T;
  }

  listDatasets(): Promise<DatasetHandle[]> {
    return this.request("/api/datasets");
  }

  uploadDataset(csv: string | Blob, timeAttr: string): Promise<DatasetHandle> {
    return this.request(`/api/datasets?time_attr=${encodeURIComponent(timeAttr)}`, {
      method: "POST",
      body: csv,
    });
  }

  schema(datasetId: string): Promise<DatasetHandle> {
    return this.request(`/api/datasets/${datasetId}/schema`);
  }

  series(datasetId: string, measure: string | null, agg: string): Promise<SeriesPayload> {
    const params = new URLSearchParams({ agg });
    if (measure) params.set("measure", measure);
    return this.request(`/api/datasets/${datasetId}/series?${params}`);
  }

  explain(draft: ExplainDraft): Promise<ExplainResult> {
    return this.request("/api/explain", {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(draft),
    });
  }
}
