/**
 * Interactive preview panel: material picker with a conditional rank
 * selector, job submission and polling, an immutable render history, and
 * benchmark charts.
 *
 * Plain DOM, no framework. All server traffic goes through ApiClient so
 * tests can stub the fetch function. Polling runs at a fixed 1 s cadence
 * and backs off once the connection looks unhealthy.
 */

import {
  ApiClient,
  ApiError,
  type JobState,
  type MaterialSummary,
  type PreviewResult,
} from "./api.js";
import { ALLOWED_K, validateDraft, type PreviewDraft } from "./validate.js";
import { aggregateChart, storageChart, timesChart } from "./charts.js";

export const POLL_INTERVAL_MS = 1000;
/** consecutive poll failures tolerated before slowing down and saying so */
export const BACKOFF_THRESHOLD = 5;
export const BACKOFF_MAX_MS = 30000;

export function backoffDelay(consecutiveFailures: number): number {
  if (consecutiveFailures < BACKOFF_THRESHOLD) return POLL_INTERVAL_MS;
  const doublings = consecutiveFailures - BACKOFF_THRESHOLD + 1;
  return Math.min(BACKOFF_MAX_MS, POLL_INTERVAL_MS * 2 ** doublings);
}

export interface HistoryEntry {
  readonly jobId: string;
  readonly material: string;
  readonly materialType: string;
  readonly kUsed: number;
  readonly seed: number;
  readonly evalCount: number;
  readonly wallTimeS: number;
  readonly memoryBytes: number;
  readonly imageUrl: string;
}

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  attrs: Record<string, string> = {},
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  for (const [key, value] of Object.entries(attrs)) node.setAttribute(key, value);
  if (text !== undefined) node.textContent = text;
  return node;
}

const testId = (id: string) => ({ "data-testid": id });

export class Panel {
  private materials: readonly MaterialSummary[] = [];
  private historyEntries: readonly HistoryEntry[] = [];
  private activeJobId: string | null = null;
  private pollTimer: ReturnType<typeof setTimeout> | null = null;
  private consecutiveFailures = 0;

  private readonly fieldset: HTMLFieldSetElement;
  private readonly materialSelect: HTMLSelectElement;
  private readonly kSlot: HTMLSpanElement;
  private readonly seedInput: HTMLInputElement;
  private readonly submitButton: HTMLButtonElement;
  private readonly formNote: HTMLParagraphElement;
  private readonly activeSection: HTMLElement;
  private readonly activeStatus: HTMLParagraphElement;
  private readonly progressBar: HTMLProgressElement;
  private readonly retryNotice: HTMLParagraphElement;
  private readonly historyContainer: HTMLDivElement;
  private readonly benchContainer: HTMLDivElement;
  private readonly benchNote: HTMLParagraphElement;

  constructor(
    private readonly root: HTMLElement,
    private readonly client: ApiClient,
  ) {
    const form = el("form", testId("preview-form"));
    this.fieldset = el("fieldset");
    this.materialSelect = el("select", testId("material-select")) as HTMLSelectElement;
    this.kSlot = el("span", testId("k-slot"));
    this.seedInput = el("input", {
      ...testId("seed-input"),
      type: "text",
      inputmode: "numeric",
      placeholder: "auto",
    }) as HTMLInputElement;
    this.submitButton = el(
      "button",
      { ...testId("submit"), type: "submit" },
      "Render preview",
    ) as HTMLButtonElement;
    this.formNote = el("p", { ...testId("form-note"), class: "note" });

    const materialLabel = el("label", {}, "Material ");
    materialLabel.appendChild(this.materialSelect);
    const seedLabel = el("label", {}, "Seed ");
    seedLabel.appendChild(this.seedInput);

    this.fieldset.append(materialLabel, this.kSlot, seedLabel, this.submitButton);
    form.append(this.fieldset, this.formNote);
    form.addEventListener("submit", (event) => {
      event.preventDefault();
      void this.submit();
    });
    this.materialSelect.addEventListener("change", () => {
      this.renderKSlot();
      this.revalidate();
    });
    this.seedInput.addEventListener("input", () => this.revalidate());

    this.activeSection = el("section", { ...testId("active-job"), hidden: "" });
    this.activeStatus = el("p", testId("active-status"));
    this.progressBar = el("progress", {
      ...testId("active-progress"),
      max: "1",
      value: "0",
    }) as HTMLProgressElement;
    this.activeSection.append(el("h2", {}, "Current job"), this.activeStatus, this.progressBar);

    this.retryNotice = el("p", { ...testId("retry-notice"), class: "warning", hidden: "" });

    const historySection = el("section");
    this.historyContainer = el("div", { ...testId("history"), class: "history" });
    historySection.append(el("h2", {}, "History"), this.historyContainer);

    const benchSection = el("section");
    const benchButton = el("button", { ...testId("bench-refresh"), type: "button" }, "Refresh");
    benchButton.addEventListener("click", () => void this.loadBench());
    this.benchNote = el("p", { ...testId("bench-note"), class: "note" });
    this.benchContainer = el("div", testId("bench-charts"));
    benchSection.append(el("h2", {}, "Benchmarks"), benchButton, this.benchNote, this.benchContainer);

    const composeSection = el("section");
    composeSection.append(el("h2", {}, "Preview"), form);
    root.replaceChildren(
      composeSection,
      this.activeSection,
      this.retryNotice,
      historySection,
      benchSection,
    );
  }

  /** Load the library and benchmark data; the form stays disabled on failure. */
  async init(): Promise<void> {
    this.fieldset.disabled = true;
    try {
      this.materials = await this.client.listMaterials();
    } catch {
      this.formNote.textContent = "service unreachable; reload to retry";
      return;
    }
    if (this.materials.length === 0) {
      this.formNote.textContent = "material library is empty";
      return;
    }
    this.materialSelect.replaceChildren(
      ...this.materials.map((m, index) =>
        el("option", { value: String(index) }, `${m.name} (${m.material_type})`),
      ),
    );
    this.materialSelect.value = "0";
    this.renderKSlot();
    this.fieldset.disabled = false;
    this.revalidate();
    await this.loadBench();
  }

  get history(): readonly HistoryEntry[] {
    return this.historyEntries;
  }

  private selectedMaterial(): MaterialSummary | null {
    const index = Number(this.materialSelect.value);
    return this.materials[index] ?? null;
  }

  /** The rank selector exists in the DOM only for heterogeneous materials. */
  private renderKSlot(): void {
    const material = this.selectedMaterial();
    if (material === null || material.material_type !== "Heterogeneous") {
      this.kSlot.replaceChildren();
      return;
    }
    const select = el("select", testId("k-select")) as HTMLSelectElement;
    select.replaceChildren(
      ...ALLOWED_K.map((k) => el("option", { value: String(k) }, String(k))),
    );
    select.value = String(material.default_k);
    const label = el("label", {}, "Rank K ");
    label.appendChild(select);
    this.kSlot.replaceChildren(label);
  }

  private currentDraft(): PreviewDraft | null {
    const material = this.selectedMaterial();
    if (material === null) return null;
    const kSelect = this.kSlot.querySelector<HTMLSelectElement>(
      '[data-testid="k-select"]',
    );
    return {
      material: material.name,
      type: material.material_type,
      k: kSelect === null ? null : Number(kSelect.value),
      seed: this.seedInput.value,
    };
  }

  private revalidate(): void {
    const draft = this.currentDraft();
    if (draft === null) return;
    const verdict = validateDraft(draft, this.materials);
    this.submitButton.disabled = !verdict.ok;
    this.formNote.textContent = verdict.ok ? "" : verdict.reason;
  }

  /** Validate the current form and submit a preview job. */
  async submit(): Promise<void> {
    const draft = this.currentDraft();
    if (draft === null) return;
    const verdict = validateDraft(draft, this.materials);
    if (!verdict.ok) {
      this.formNote.textContent = verdict.reason;
      return;
    }
    this.formNote.textContent = "";
    try {
      const created = await this.client.submitPreview(verdict.payload);
      this.track(created.job_id);
    } catch (error) {
      if (error instanceof ApiError && error.status === 409) {
        // same (material, type, k) already in flight; follow that job
        const body = error.body as { job_id?: unknown } | null;
        if (body && typeof body.job_id === "string") {
          this.track(body.job_id);
          return;
        }
      }
      this.formNote.textContent =
        error instanceof Error ? error.message : "submission failed";
    }
  }

  private track(jobId: string): void {
    this.cancelPoll();
    this.activeJobId = jobId;
    this.consecutiveFailures = 0;
    this.retryNotice.hidden = true;
    this.activeSection.hidden = false;
    this.activeStatus.textContent = "Queued";
    this.progressBar.value = 0;
    this.schedulePoll(POLL_INTERVAL_MS);
  }

  private cancelPoll(): void {
    if (this.pollTimer !== null) {
      clearTimeout(this.pollTimer);
      this.pollTimer = null;
    }
  }

  private schedulePoll(delay: number): void {
    this.cancelPoll();
    this.pollTimer = setTimeout(() => {
      this.pollTimer = null;
      void this.poll();
    }, delay);
  }

  private async poll(): Promise<void> {
    const jobId = this.activeJobId;
    if (jobId === null) return;
    let state: JobState;
    try {
      state = await this.client.jobState(jobId);
    } catch (error) {
      if (jobId !== this.activeJobId) return; // a newer job took over
      if (error instanceof ApiError && error.status === 404) {
        // the server lost the job (restart); polling it again is pointless
        this.activeJobId = null;
        this.activeStatus.textContent = "job lost by the server; submit again";
        return;
      }
      this.consecutiveFailures += 1;
      if (this.consecutiveFailures >= BACKOFF_THRESHOLD) {
        const delay = backoffDelay(this.consecutiveFailures);
        this.retryNotice.hidden = false;
        this.retryNotice.textContent =
          `connection trouble (${this.consecutiveFailures} failed polls); ` +
          `retrying in ${Math.round(delay / 1000)} s`;
        this.schedulePoll(delay);
      } else {
        this.schedulePoll(POLL_INTERVAL_MS);
      }
      return;
    }

    // responses for a job the user has navigated away from are stale
    if (jobId !== this.activeJobId) return;
    this.consecutiveFailures = 0;
    this.retryNotice.hidden = true;

    this.activeStatus.textContent = state.status;
    this.progressBar.value = state.progress;

    if (state.status === "Done" && state.result !== null) {
      this.activeJobId = null;
      this.activeSection.hidden = true;
      this.pushHistory(jobId, state.result);
    } else if (state.status === "Failed") {
      this.activeJobId = null;
      this.activeStatus.textContent = `Failed: ${state.error ?? "unknown error"}`;
    } else {
      this.schedulePoll(POLL_INTERVAL_MS);
    }
  }

  private pushHistory(jobId: string, result: PreviewResult): void {
    const entry: HistoryEntry = Object.freeze({
      jobId,
      material: result.material,
      materialType: result.material_type,
      kUsed: result.k_used,
      seed: result.seed,
      evalCount: result.bssrdf_eval_count,
      wallTimeS: result.wall_time_s,
      memoryBytes: result.peak_memory_estimate_bytes,
      imageUrl: this.client.imageUrl(result),
    });
    this.historyEntries = Object.freeze([entry, ...this.historyEntries]);
    this.renderHistory();
  }

  private renderHistory(): void {
    this.historyContainer.replaceChildren(
      ...this.historyEntries.map((entry) => {
        const card = el("figure", { class: "history-card" });
        const img = el("img", {
          src: entry.imageUrl,
          alt: `${entry.material} preview`,
          width: "256",
        });
        const caption = el("figcaption");
        caption.append(
          el("strong", {}, `${entry.material} (${entry.materialType})`),
          el("span", {}, `k=${entry.kUsed}, seed ${entry.seed}`),
          el("span", { class: "eval-count" }, `${entry.evalCount.toLocaleString()} evals`),
          el("span", {}, `${entry.wallTimeS.toFixed(2)} s`),
          el(
            "span",
            { class: "memory" },
            `${(entry.memoryBytes / 1024).toFixed(0)} KiB working set`,
          ),
        );
        card.append(img, caption);
        return card;
      }),
    );
  }

  async loadBench(): Promise<void> {
    let bench;
    try {
      bench = await this.client.benchLatest();
    } catch (error) {
      this.benchContainer.replaceChildren();
      this.benchNote.textContent =
        error instanceof ApiError && error.status === 404
          ? "no benchmark data yet; run the bench command against this library"
          : "could not load benchmark data";
      return;
    }
    this.benchNote.textContent = "";
    this.benchContainer.replaceChildren(
      timesChart(bench.times),
      storageChart(bench.storage),
      aggregateChart(bench.aggregates),
    );
  }
}

export async function mountPanel(root: HTMLElement, client: ApiClient): Promise<Panel> {
  const panel = new Panel(root, client);
  await panel.init();
  return panel;
}
