/** Typed client for the material preview service. */

export type MaterialType = "Homogeneous" | "Heterogeneous";

export interface MaterialSummary {
  name: string;
  material_type: MaterialType;
  default_k: number;
}

export interface MaterialVariant {
  material_type: MaterialType;
  applicable: boolean;
  allowed_k: number[];
  default_k: number;
  sample_count: number | null;
  analytic: boolean;
}

export interface MaterialDetail {
  name: string;
  variants: MaterialVariant[];
}

export interface PreviewPayload {
  material: string;
  type: MaterialType;
  k?: number;
  seed?: number;
}

export interface JobCreated {
  job_id: string;
  status_url: string;
}

export type JobStatus = "Queued" | "Running" | "Done" | "Failed";

export interface PreviewResult {
  width: number;
  height: number;
  wall_time_s: number;
  bssrdf_eval_count: number;
  k_used: number;
  peak_memory_estimate_bytes: number;
  mean_luminance: number;
  material: string;
  material_type: MaterialType;
  seed: number;
  image_url: string;
}

export interface JobState {
  id: string;
  status: JobStatus;
  progress: number;
  result: PreviewResult | null;
  error: string | null;
}

export interface TimesRow {
  material: string;
  material_type: string;
  k: number;
  wall_time_s: number;
  bssrdf_eval_count: number;
}

export interface StorageRow {
  material: string;
  material_type: string;
  k: number;
  factored_storage_bytes: number;
  raw_storage_bytes: number;
}

export interface AggregateRow {
  group: string;
  record_count: number;
  mean_wall_time_s: number;
  mean_bssrdf_eval_count: number;
  mean_factored_storage_bytes: number;
  mean_raw_storage_bytes: number;
}

export interface BenchLatest {
  times: TimesRow[];
  storage: StorageRow[];
  aggregates: AggregateRow[];
}

/** Non-2xx response; carries the status and the parsed body when present. */
export class ApiError extends Error {
  constructor(
    readonly status: number,
    message: string,
    readonly body: unknown = null,
  ) {
    super(message);
    this.name = "ApiError";
  }
}

export type FetchFn = (input: string, init?: RequestInit) => Promise<Response>;

const defaultFetch: FetchFn = (input, init) => globalThis.fetch(input, init);

export class ApiClient {
  constructor(
    readonly baseUrl: string = "",
    private readonly fetchFn: FetchFn = defaultFetch,
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const response = await this.fetchFn(this.baseUrl + path, init);
    if (!response.ok) {
      let message = `request failed with status ${response.status}`;
      let body: unknown = null;
      try {
        body = await response.json();
        const detail = (body as { detail?: unknown }).detail;
        if (typeof detail === "string") message = detail;
      } catch {
        // non-JSON error body; keep the generic message
      }
      throw new ApiError(response.status, message, body);
    }
    return (await response.json()) as T;
  }

  listMaterials(): Promise<MaterialSummary[]> {
    return this.request("/materials");
  }

  materialDetail(name: string): Promise<MaterialDetail> {
    return this.request(`/materials/${encodeURIComponent(name)}`);
  }

  submitPreview(payload: PreviewPayload): Promise<JobCreated> {
    return this.request("/jobs/preview", {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(payload),
    });
  }

  jobState(id: string): Promise<JobState> {
    return this.request(`/jobs/${encodeURIComponent(id)}`);
  }

  benchLatest(): Promise<BenchLatest> {
    return this.request("/bench/latest");
  }

  /** Absolute URL for a finished job's preview image. */
  imageUrl(result: PreviewResult): string {
    return this.baseUrl + result.image_url;
  }
}
