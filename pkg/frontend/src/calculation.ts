/**
 * Calculation tab logic: launch pipeline jobs, poll them, and build the
 * results and comparison tables.  Table cells are the API's numbers
 * verbatim; the UI never recomputes a field or a maximum.
 */

import type { ApiClient, ComparePayload, JobStatus, MaximaRow, ResultsPayload } from "./api.js";
import { formatValue } from "./colormap.js";

const sleep = (ms: number) => new Promise<void>((resolve) => setTimeout(resolve, ms));

export async function runAndWait(
  api: ApiClient,
  caseId: string,
  stage: "segment" | "mesh" | "solve",
  variant = 0,
  pollMs = 150,
  onProgress?: (job: JobStatus) => void,
): Promise<JobStatus> {
  const { job_id } = await api.runStage(caseId, stage, variant);
  for (;;) {
    const job = await api.pollJob(job_id);
    onProgress?.(job);
    if (job.state === "done" || job.state === "failed") return job;
    await sleep(pollMs);
  }
}

export interface MaximaTableModel {
  columns: string[]; // variant labels
  rows: { tooth: string; cells: (MaximaRow | null)[] }[];
}

export function maximaTable(results: ResultsPayload): MaximaTableModel {
  const teeth = Object.keys(results.maxima).sort();
  return {
    columns: [`variant ${results.variant}`],
    rows: teeth.map((tooth) => ({ tooth, cells: [results.maxima[tooth] ?? null] })),
  };
}

export function comparisonTable(payload: ComparePayload): MaximaTableModel {
  return {
    columns: payload.variants.map((v) => `variant ${v}`),
    rows: payload.teeth.map((tooth) => ({
      tooth,
      cells: payload.variants.map((v) => payload.columns[String(v)]?.[tooth] ?? null),
    })),
  };
}

/** Render a maxima table as HTML; cell text comes from the shared value
 * formatter so the displayed numbers match the API payload exactly. */
export function renderTable(model: MaximaTableModel): string {
  const head = ["<tr><th>tooth</th>", ...model.columns.map(
    (c) => `<th colspan="2">${escapeHtml(c)}</th>`), "</tr>"].join("");
  const sub = ["<tr><th></th>", ...model.columns.map(
    () => "<th>max |u| (mm)</th><th>max von Mises (MPa)</th>"), "</tr>"].join("");
  const body = model.rows.map((row) => {
    const cells = row.cells.map((cell) =>
      cell
        ? `<td>${formatValue(cell.max_displacement)}</td><td>${formatValue(cell.max_von_mises)}</td>`
        : "<td>-</td><td>-</td>",
    );
    return `<tr><td>${escapeHtml(row.tooth)}</td>${cells.join("")}</tr>`;
  }).join("");
  return `<table class="maxima">${head}${sub}${body}</table>`;
}

export function escapeHtml(text: string): string {
  return text.replace(/[&<>"']/g, (ch) =>
    ({ "&": "&amp;", "<": "&lt;", ">": "&gt;", '"': "&quot;", "'": "&#39;" })[ch]!,
  );
}
