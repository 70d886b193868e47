/**
 * Client-side mirror of the service's request rules.
 *
 * The form only submits payloads this module approves, so a healthy server
 * never answers a panel submission with 400, 404, or 422. Rules mirrored:
 *
 * - type must be Homogeneous or Heterogeneous          (400 otherwise)
 * - k never accompanies a Homogeneous material         (400)
 * - k must be one of {1, 5, 10} when present           (400)
 * - (material, type) must exist in the library         (404)
 * - seed, when given, is a nonnegative integer         (422)
 */

import type { MaterialSummary, MaterialType, PreviewPayload } from "./api.js";

export const ALLOWED_K: readonly number[] = [1, 5, 10];

/** Seeds are kept within signed 32-bit range; the service allows more but
 * has no use for it and giant literals invite precision bugs. */
export const MAX_SEED = 2147483647;

export interface PreviewDraft {
  material: string;
  type: string;
  /** null when the rank selector is absent (homogeneous materials) */
  k: number | null;
  /** raw text from the seed field; empty string means auto */
  seed: string;
}

export type Validation =
  | { ok: true; payload: PreviewPayload }
  | { ok: false; reason: string };

export function validateDraft(
  draft: PreviewDraft,
  materials: readonly MaterialSummary[],
): Validation {
  if (draft.type !== "Homogeneous" && draft.type !== "Heterogeneous") {
    return { ok: false, reason: `unknown material type "${draft.type}"` };
  }
  const type = draft.type as MaterialType;
  const known = materials.some(
    (m) => m.name === draft.material && m.material_type === type,
  );
  if (!known) {
    return { ok: false, reason: "pick a material from the library" };
  }

  const payload: PreviewPayload = { material: draft.material, type };

  if (type === "Homogeneous") {
    // a rank with a homogeneous material is a bug in the form, not
    // something to silently drop
    if (draft.k !== null) {
      return { ok: false, reason: "rank does not apply to homogeneous materials" };
    }
  } else {
    if (draft.k === null || !ALLOWED_K.includes(draft.k)) {
      return { ok: false, reason: `rank must be one of ${ALLOWED_K.join(", ")}` };
    }
    payload.k = draft.k;
  }

  const seedText = draft.seed.trim();
  if (seedText !== "") {
    if (!/^\d+$/.test(seedText)) {
      return { ok: false, reason: "seed must be a nonnegative integer" };
    }
    const seed = Number(seedText);
    if (!Number.isSafeInteger(seed) || seed > MAX_SEED) {
      return { ok: false, reason: `seed must be at most ${MAX_SEED}` };
    }
    payload.seed = seed;
  }

  return { ok: true, payload };
}
