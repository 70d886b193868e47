/** Dependency-free horizontal SVG bar charts for the benchmark data. */

import type { AggregateRow, StorageRow, TimesRow } from "./api.js";

const SVG_NS = "http://www.w3.org/2000/svg";

export interface Bar {
  label: string;
  value: number;
}

export interface ChartOptions {
  title: string;
  testId: string;
  format: (value: number) => string;
}

const LABEL_WIDTH = 230;
const BAR_AREA = 330;
const VALUE_WIDTH = 110;
const ROW_HEIGHT = 22;
const BAR_HEIGHT = 14;
const TITLE_HEIGHT = 28;

function svgText(x: number, y: number, content: string, cls: string): SVGTextElement {
  const text = document.createElementNS(SVG_NS, "text");
  text.setAttribute("x", String(x));
  text.setAttribute("y", String(y));
  text.setAttribute("class", cls);
  text.textContent = content;
  return text;
}

export function barChart(bars: readonly Bar[], opts: ChartOptions): SVGSVGElement {
  const svg = document.createElementNS(SVG_NS, "svg");
  const width = LABEL_WIDTH + BAR_AREA + VALUE_WIDTH;
  const height = TITLE_HEIGHT + Math.max(bars.length, 1) * ROW_HEIGHT + 6;
  svg.setAttribute("viewBox", `0 0 ${width} ${height}`);
  svg.setAttribute("width", String(width));
  svg.setAttribute("class", "bar-chart");
  svg.dataset.testid = opts.testId;
  svg.setAttribute("role", "img");
  svg.setAttribute("aria-label", opts.title);

  svg.appendChild(svgText(0, 18, opts.title, "chart-title"));

  if (bars.length === 0) {
    svg.appendChild(svgText(0, TITLE_HEIGHT + 14, "no data", "chart-empty"));
    return svg;
  }

  const max = Math.max(...bars.map((b) => b.value), Number.MIN_VALUE);
  bars.forEach((bar, index) => {
    const y = TITLE_HEIGHT + index * ROW_HEIGHT;
    const barWidth = Math.max((bar.value / max) * BAR_AREA, 1);

    const label = svgText(LABEL_WIDTH - 6, y + BAR_HEIGHT, bar.label, "bar-label");
    label.setAttribute("text-anchor", "end");
    svg.appendChild(label);

    const rect = document.createElementNS(SVG_NS, "rect");
    rect.setAttribute("x", String(LABEL_WIDTH));
    rect.setAttribute("y", String(y));
    rect.setAttribute("width", String(barWidth));
    rect.setAttribute("height", String(BAR_HEIGHT));
    rect.setAttribute("class", "bar");
    rect.dataset.label = bar.label;
    rect.dataset.value = String(bar.value);
    svg.appendChild(rect);

    svg.appendChild(
      svgText(LABEL_WIDTH + barWidth + 6, y + BAR_HEIGHT, opts.format(bar.value), "bar-value"),
    );
  });
  return svg;
}

const formatSeconds = (v: number): string => `${v.toFixed(3)} s`;

const formatCount = (v: number): string =>
  v >= 1e6 ? `${(v / 1e6).toFixed(2)}M` : String(Math.round(v));

const formatBytes = (v: number): string =>
  v >= 1024 ? `${(v / 1024).toFixed(1)} KiB` : `${Math.round(v)} B`;

/** One bar per benchmark record: render wall time. */
export function timesChart(rows: readonly TimesRow[]): SVGSVGElement {
  const bars = rows.map((r) => ({
    label: `${r.material} (${r.material_type}, k=${r.k})`,
    value: r.wall_time_s,
  }));
  return barChart(bars, {
    title: "Render wall time",
    testId: "bench-times-chart",
    format: formatSeconds,
  });
}

/** One bar per benchmark record: factored archive size on disk. */
export function storageChart(rows: readonly StorageRow[]): SVGSVGElement {
  const bars = rows.map((r) => ({
    label: `${r.material} (${r.material_type}, k=${r.k})`,
    value: r.factored_storage_bytes,
  }));
  return barChart(bars, {
    title: "Factored archive size",
    testId: "bench-storage-chart",
    format: formatBytes,
  });
}

/** One bar per material class: mean evaluation count. */
export function aggregateChart(rows: readonly AggregateRow[]): SVGSVGElement {
  const bars = rows.map((r) => ({
    label: `${r.group} (n=${r.record_count})`,
    value: r.mean_bssrdf_eval_count,
  }));
  return barChart(bars, {
    title: "Mean BSSRDF evaluations per render",
    testId: "bench-aggregate-chart",
    format: formatCount,
  });
}
