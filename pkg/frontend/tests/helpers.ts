/** Shared fixtures and a programmable fetch stub for the panel tests. */

import type {
  AggregateRow,
  BenchLatest,
  FetchFn,
  JobState,
  MaterialSummary,
  PreviewResult,
  StorageRow,
  TimesRow,
} from "../src/api.js";

export const MATERIALS: MaterialSummary[] = [
  { name: "Artificial Stone", material_type: "Heterogeneous", default_k: 10 },
  { name: "Artificial Stone", material_type: "Homogeneous", default_k: 1 },
  { name: "Blue Wax", material_type: "Heterogeneous", default_k: 10 },
  { name: "Blue Wax", material_type: "Homogeneous", default_k: 1 },
  { name: "Jade", material_type: "Heterogeneous", default_k: 10 },
  { name: "Jade", material_type: "Homogeneous", default_k: 1 },
  { name: "Placeholder Wax", material_type: "Homogeneous", default_k: 1 },
];

/**
 * The service's own acceptance rules, restated independently. Used as the
 * judge in fuzz tests: every payload the panel emits must pass this.
 */
export function serverAccepts(
  body: Record<string, unknown>,
  materials: readonly MaterialSummary[],
): boolean {
  const keys = Object.keys(body);
  if (keys.some((k) => !["material", "type", "k", "seed"].includes(k))) return false;
  if (typeof body.material !== "string" || typeof body.type !== "string") return false;
  if (body.type !== "Homogeneous" && body.type !== "Heterogeneous") return false;
  if ("k" in body) {
    if (body.type === "Homogeneous") return false;
    if (body.k !== 1 && body.k !== 5 && body.k !== 10) return false;
  }
  if ("seed" in body && (!Number.isInteger(body.seed) || (body.seed as number) < 0)) {
    return false;
  }
  return materials.some(
    (m) => m.name === body.material && m.material_type === body.type,
  );
}

export interface StubResponse {
  status: number;
  body: unknown;
}

export type RouteResult = StubResponse | Promise<StubResponse> | undefined;
export type RouteHandler = (url: string, init?: RequestInit) => RouteResult;

/** fetch replacement; a handler returning undefined simulates a network drop. */
export function fetchStub(handler: RouteHandler): FetchFn {
  return async (url, init) => {
    const hit = await handler(url, init);
    if (hit === undefined) throw new TypeError("network down");
    return new Response(JSON.stringify(hit.body), {
      status: hit.status,
      headers: { "content-type": "application/json" },
    });
  };
}

export function previewResult(overrides: Partial<PreviewResult> = {}): PreviewResult {
  return {
    width: 64,
    height: 48,
    wall_time_s: 0.31,
    bssrdf_eval_count: 1136640,
    k_used: 10,
    peak_memory_estimate_bytes: 433152,
    mean_luminance: 0.41,
    material: "Jade",
    material_type: "Heterogeneous",
    seed: 7,
    image_url: "/jobs/j1/image",
    ...overrides,
  };
}

export function jobState(overrides: Partial<JobState> = {}): JobState {
  return {
    id: "j1",
    status: "Queued",
    progress: 0,
    result: null,
    error: null,
    ...overrides,
  };
}

const TYPES = ["Heterogeneous", "Homogeneous"] as const;

/** 16 benchmark records: 8 materials in both variants. */
export function benchFixture(): BenchLatest {
  const names = [
    "Artificial Stone",
    "Blue Wax",
    "Chessboard 4x4",
    "Chessboard 8x8",
    "Jade",
    "Marble Close Up",
    "Veined Marble",
    "Yellow Wax",
  ];
  const times: TimesRow[] = [];
  const storage: StorageRow[] = [];
  for (const name of names) {
    for (const type of TYPES) {
      const k = type === "Heterogeneous" ? 10 : 1;
      times.push({
        material: name,
        material_type: type,
        k,
        wall_time_s: type === "Heterogeneous" ? 0.63 : 0.21,
        bssrdf_eval_count: type === "Heterogeneous" ? 16153600 : 1615360,
      });
      storage.push({
        material: name,
        material_type: type,
        k,
        factored_storage_bytes: type === "Heterogeneous" ? 15611 : 1670,
        raw_storage_bytes: 51034,
      });
    }
  }
  const aggregates: AggregateRow[] = [
    {
      group: "Heterogeneous",
      record_count: 8,
      mean_wall_time_s: 0.63,
      mean_bssrdf_eval_count: 16153600,
      mean_factored_storage_bytes: 15611.4,
      mean_raw_storage_bytes: 51033.8,
    },
    {
      group: "Homogeneous",
      record_count: 8,
      mean_wall_time_s: 0.21,
      mean_bssrdf_eval_count: 1615360,
      mean_factored_storage_bytes: 1669.8,
      mean_raw_storage_bytes: 51030.8,
    },
  ];
  return { times, storage, aggregates };
}
