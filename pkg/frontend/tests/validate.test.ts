import { describe, expect, it } from "vitest";

import { ALLOWED_K, MAX_SEED, validateDraft, type PreviewDraft } from "../src/validate.js";
import { MATERIALS, serverAccepts } from "./helpers.js";

function draft(overrides: Partial<PreviewDraft>): PreviewDraft {
  return { material: "Jade", type: "Heterogeneous", k: 10, seed: "", ...overrides };
}

describe("validateDraft", () => {
  it("accepts a heterogeneous draft with an allowed rank", () => {
    for (const k of ALLOWED_K) {
      const verdict = validateDraft(draft({ k }), MATERIALS);
      expect(verdict.ok).toBe(true);
      if (verdict.ok) {
        expect(verdict.payload).toEqual({ material: "Jade", type: "Heterogeneous", k });
      }
    }
  });

  it("omits the k key entirely for homogeneous materials", () => {
    const verdict = validateDraft(draft({ type: "Homogeneous", k: null }), MATERIALS);
    expect(verdict.ok).toBe(true);
    if (verdict.ok) {
      expect("k" in verdict.payload).toBe(false);
      expect(verdict.payload).toEqual({ material: "Jade", type: "Homogeneous" });
    }
  });

  it("refuses a rank paired with a homogeneous material, even 1", () => {
    for (const k of [1, 5, 10]) {
      expect(validateDraft(draft({ type: "Homogeneous", k }), MATERIALS).ok).toBe(false);
    }
  });

  it("refuses ranks outside the menu", () => {
    for (const k of [0, 2, 7, 11, -1, 64]) {
      expect(validateDraft(draft({ k }), MATERIALS).ok).toBe(false);
    }
  });

  it("refuses a heterogeneous draft with no rank", () => {
    expect(validateDraft(draft({ k: null }), MATERIALS).ok).toBe(false);
  });

  it("refuses unknown types and unknown materials", () => {
    expect(validateDraft(draft({ type: "Mixed" }), MATERIALS).ok).toBe(false);
    expect(validateDraft(draft({ type: "homogeneous" }), MATERIALS).ok).toBe(false);
    expect(validateDraft(draft({ material: "Vantablack" }), MATERIALS).ok).toBe(false);
    // the pair must exist, not just the name: Placeholder Wax has no
    // heterogeneous variant
    expect(
      validateDraft(draft({ material: "Placeholder Wax" }), MATERIALS).ok,
    ).toBe(false);
  });

  it("parses seeds and omits blank ones", () => {
    const withSeed = validateDraft(draft({ seed: " 42 " }), MATERIALS);
    expect(withSeed.ok).toBe(true);
    if (withSeed.ok) expect(withSeed.payload.seed).toBe(42);

    const blank = validateDraft(draft({ seed: "" }), MATERIALS);
    expect(blank.ok).toBe(true);
    if (blank.ok) expect("seed" in blank.payload).toBe(false);
  });

  it("refuses malformed seeds", () => {
    for (const seed of ["abc", "-3", "1.5", "1e5", "0x10", `${MAX_SEED + 1}`]) {
      expect(validateDraft(draft({ seed }), MATERIALS).ok).toBe(false);
    }
  });

  it("never approves a payload the server would reject (fuzz)", () => {
    // deterministic LCG so failures reproduce
    let state = 12345;
    const rand = (n: number) => {
      state = (state * 48271) % 2147483647;
      return state % n;
    };
    const pick = <T>(pool: readonly T[]): T => pool[rand(pool.length)] as T;

    const names = [...new Set(MATERIALS.map((m) => m.name)), "Vantablack", ""];
    const types = ["Heterogeneous", "Homogeneous", "Mixed", "heterogeneous", ""];
    const ks = [null, null, 1, 5, 10, 0, 2, 7, -1, 64];
    const seeds = ["", "", "0", "7", "42", "abc", "-1", "2.5", "99999999999999999999"];

    let approved = 0;
    for (let i = 0; i < 1000; i++) {
      const candidate: PreviewDraft = {
        material: pick(names),
        type: pick(types),
        k: pick(ks),
        seed: pick(seeds),
      };
      const verdict = validateDraft(candidate, MATERIALS);
      if (verdict.ok) {
        approved += 1;
        const body = JSON.parse(JSON.stringify(verdict.payload)) as Record<
          string,
          unknown
        >;
        expect(serverAccepts(body, MATERIALS)).toBe(true);
      }
    }
    // the generator must actually produce approvals for the property to mean
    // anything
    expect(approved).toBeGreaterThan(30);
  });
});
