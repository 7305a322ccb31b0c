/**
 * Page wiring: tabs, case picker, slice canvas with marker brushing,
 * prosthesis forms, and the calculation panel.  All state changes go
 * through the API; redrawing pulls from ViewState + API payloads only.
 */

import { ApiClient, ApiError, type SlicePayload } from "./api.js";
import { BrushModel, type Stroke } from "./brush.js";
import {
  comparisonTable,
  maximaTable,
  renderTable,
  runAndWait,
  escapeHtml,
} from "./calculation.js";
import { fieldColor, formatValue, legendTicks } from "./colormap.js";
import { compositeSlice } from "./composite.js";
import {
  TABS,
  axisLength,
  hydrate,
  initialState,
  markStale,
  setOverlay,
  setSlice,
  setTab,
  setWindowLevel,
  stageState,
  type Tab,
  type ViewState,
} from "./state.js";
import { SliceViewController } from "./slice_view.js";
import { emptyVariant, fromDoc, toDoc, validateVariant, type VariantForm } from "./prosthesis.js";

const api = new ApiClient("");
let state: ViewState = initialState();
let brush: BrushModel | null = null;
let variants: VariantForm[] = [];
let currentStroke: [number, number][] | null = null;

const $ = <T extends HTMLElement>(id: string): T => {
  const el = document.getElementById(id);
  if (!el) throw new Error(`missing element #${id}`);
  return el as T;
};

function banner(message: string, isError = true): void {
  const el = $("banner");
  el.textContent = message;
  el.className = message ? (isError ? "banner error" : "banner info") : "banner hidden";
}

const sliceView = new SliceViewController(
  api,
  (payload) => drawSlice(payload),
  (message) => banner(`slice: ${message}`),
);

// ---------------------------------------------------------------------------
// rendering
// ---------------------------------------------------------------------------

function drawSlice(payload: SlicePayload): void {
  const canvas = $("slice-canvas") as HTMLCanvasElement;
  const { width, height, rgba } = compositeSlice(payload);
  canvas.width = width;
  canvas.height = height;
  const ctx = canvas.getContext("2d")!;
  const image = new ImageData(rgba, width, height);
  ctx.putImageData(image, 0, 0);
  drawMarkers(ctx, payload);
  drawLegend(payload);
}

function drawMarkers(ctx: CanvasRenderingContext2D, payload: SlicePayload): void {
  if (!brush || state.activeTab !== "Segmentation") return;
  for (const [key, id] of brush.markerVoxels()) {
    const [i, j, k] = key.split(",").map(Number) as [number, number, number];
    let a: number, b: number, slice: number;
    if (state.sliceAxis === "x") [slice, a, b] = [i, j, k];
    else if (state.sliceAxis === "y") [a, slice, b] = [i, j, k];
    else [a, b, slice] = [i, j, k];
    if (slice !== state.sliceIndex) continue;
    ctx.fillStyle = id === 1 ? "rgba(255,80,80,0.9)" : "rgba(80,140,255,0.9)";
    ctx.fillRect(a, b, 1, 1);
  }
}

function drawLegend(payload: SlicePayload): void {
  const legend = $("legend");
  if (payload.overlay?.kind === "field" && payload.overlay.range) {
    const [lo, hi] = payload.overlay.range;
    const stops = Array.from({ length: 11 }, (_, i) => {
      const [r, g, b] = fieldColor(lo + ((hi - lo) * i) / 10, lo, hi);
      return `rgb(${r},${g},${b}) ${i * 10}%`;
    });
    const ticks = legendTicks(lo, hi)
      .map((t) => `<span>${escapeHtml(t.label)}</span>`)
      .join("");
    legend.innerHTML =
      `<div class="bar" style="background: linear-gradient(to right, ${stops.join(",")})"></div>` +
      `<div class="ticks">${ticks}</div>` +
      `<div class="caption">${escapeHtml(payload.overlay.field ?? "")} (MPa or mm)</div>`;
    legend.classList.remove("hidden");
  } else if (payload.overlay?.names) {
    const entries = Object.entries(payload.overlay.names)
      .map(([, name]) => `<span class="chip">${escapeHtml(name)}</span>`)
      .join(" ");
    legend.innerHTML = entries;
    legend.classList.remove("hidden");
  } else {
    legend.classList.add("hidden");
  }
}

function refreshSlice(): void {
  sliceView.view(state);
}

function renderTabs(): void {
  const nav = $("tabs");
  nav.innerHTML = TABS.map(
    (tab) =>
      `<button data-tab="${tab}" class="${tab === state.activeTab ? "active" : ""}">${tab}</button>`,
  ).join("");
  for (const button of nav.querySelectorAll("button")) {
    button.addEventListener("click", () => {
      state = setTab(state, button.dataset.tab as Tab);
      render();
    });
  }
  for (const tab of TABS) {
    $(`tab-${tab}`).classList.toggle("hidden", tab !== state.activeTab);
  }
}

function renderStages(): void {
  const names = ["segment", "mesh", "solve"] as const;
  $("stage-states").innerHTML = names
    .map((stage) => {
      const s = stage === "segment" ? stageState(state, stage) : stageState(state, stage, "0");
      return `<span class="stage ${s}">${stage}: ${s}</span>`;
    })
    .join(" ");
}

function renderVariants(): void {
  const host = $("variant-list");
  host.innerHTML = variants
    .map((form, v) => {
      const errors = validateVariant(form);
      const errorHtml = errors.length
        ? `<div class="inline-error">${errors.map(escapeHtml).join("; ")}</div>`
        : "";
      const mobility = form.supportingTeeth
        .map((tooth) => {
          const options = [0, 1, 2, 3]
            .map(
              (d) =>
                `<option value="${d}" ${form.mobility[tooth] === d ? "selected" : ""}>${d}</option>`,
            )
            .join("");
          return `<label>${escapeHtml(tooth)} mobility <select data-v="${v}" data-tooth="${escapeHtml(tooth)}" class="mobility">${options}</select></label>`;
        })
        .join(" ");
      return `<fieldset data-variant="${v}"><legend>variant ${v}</legend>
        <label>supporting teeth <input class="teeth" data-v="${v}"
          value="${escapeHtml(form.supportingTeeth.join(","))}" placeholder="Tooth_13,Tooth_15"></label>
        <label>crown thickness mm <input class="crown" data-v="${v}" type="number" step="0.1"
          value="${form.crownThickness}"></label>
        <label>ligament thickness mm <input class="pdl" data-v="${v}" type="number" step="0.05"
          value="${form.pdlThickness}"></label>
        ${mobility}
        ${errorHtml}</fieldset>`;
    })
    .join("");

  host.querySelectorAll<HTMLInputElement>("input.teeth").forEach((input) =>
    input.addEventListener("change", () => {
      const form = variants[Number(input.dataset.v)]!;
      form.supportingTeeth = input.value.split(",").map((t) => t.trim()).filter(Boolean);
      renderVariants();
    }),
  );
  host.querySelectorAll<HTMLInputElement>("input.crown").forEach((input) =>
    input.addEventListener("change", () => {
      variants[Number(input.dataset.v)]!.crownThickness = Number(input.value);
      renderVariants();
    }),
  );
  host.querySelectorAll<HTMLInputElement>("input.pdl").forEach((input) =>
    input.addEventListener("change", () => {
      variants[Number(input.dataset.v)]!.pdlThickness = Number(input.value);
      renderVariants();
    }),
  );
  host.querySelectorAll<HTMLSelectElement>("select.mobility").forEach((select) =>
    select.addEventListener("change", () => {
      variants[Number(select.dataset.v)]!.mobility[select.dataset.tooth!] = Number(select.value);
    }),
  );
}

function render(): void {
  renderTabs();
  renderStages();
  if (state.volume) {
    const slider = $("slice-index") as HTMLInputElement;
    slider.max = String(axisLength(state.volume, state.sliceAxis) - 1);
    slider.value = String(state.sliceIndex);
    refreshSlice();
  }
}

// ---------------------------------------------------------------------------
// actions
// ---------------------------------------------------------------------------

async function reloadCase(): Promise<void> {
  if (!state.caseId) return;
  const doc = await api.getCase(state.caseId);
  state = hydrate(state, doc);
  if (doc.volume && !brush) brush = new BrushModel(doc.volume.dims);
  brush?.loadFrom(doc.segmentation.markers);
  variants = doc.prostheses.map(fromDoc);
  if (variants.length === 0) variants = [emptyVariant()];
  const threshold = doc.segmentation.params?.threshold;
  ($("threshold") as HTMLInputElement).value = threshold === undefined ? "" : String(threshold);
  render();
}

async function pushMarkers(): Promise<void> {
  if (!state.caseId || !brush) return;
  await api.setMarkers(state.caseId, brush.toDoc());
  state = markStale(state, "segment");
  sliceView.invalidate();
  render();
}

function canvasPoint(event: MouseEvent): [number, number] {
  const canvas = $("slice-canvas") as HTMLCanvasElement;
  const rect = canvas.getBoundingClientRect();
  const x = ((event.clientX - rect.left) / rect.width) * canvas.width;
  const y = ((event.clientY - rect.top) / rect.height) * canvas.height;
  return [Math.floor(x), Math.floor(y)];
}

function wireEvents(): void {
  $("create-case").addEventListener("click", async () => {
    const name = ($("case-name") as HTMLInputElement).value || "unnamed";
    const { case_id } = await api.createCase({ name });
    state = { ...initialState(), caseId: case_id };
    history.replaceState(null, "", `#${case_id}`);
    await reloadCase();
    banner(`created case ${case_id}`, false);
  });

  $("upload").addEventListener("change", async (event) => {
    const input = event.target as HTMLInputElement;
    const file = input.files?.[0];
    if (!file || !state.caseId) return;
    try {
      await api.uploadVolume(state.caseId, new Uint8Array(await file.arrayBuffer()));
      sliceView.invalidate();
      await reloadCase();
      banner(`uploaded ${file.name}`, false);
    } catch (err) {
      banner(err instanceof ApiError ? `${err.code}: ${err.message}` : String(err));
    }
  });

  ($("slice-axis") as HTMLSelectElement).addEventListener("change", (event) => {
    state = setSlice(state, (event.target as HTMLSelectElement).value as "x" | "y" | "z",
                     state.sliceIndex);
    render();
  });
  ($("slice-index") as HTMLInputElement).addEventListener("input", (event) => {
    state = setSlice(state, state.sliceAxis, Number((event.target as HTMLInputElement).value));
    render();
  });
  ($("window") as HTMLInputElement).addEventListener("change", (event) => {
    state = setWindowLevel(state, Number((event.target as HTMLInputElement).value), state.level);
    render();
  });
  ($("level") as HTMLInputElement).addEventListener("change", (event) => {
    state = setWindowLevel(state, state.window, Number((event.target as HTMLInputElement).value));
    render();
  });
  ($("overlay") as HTMLSelectElement).addEventListener("change", (event) => {
    state = setOverlay(state, (event.target as HTMLSelectElement).value as ViewState["overlay"]);
    render();
  });
  ($("brush-mode") as HTMLSelectElement).addEventListener("change", (event) => {
    state = { ...state, brushMode: (event.target as HTMLSelectElement).value as ViewState["brushMode"] };
  });

  const canvas = $("slice-canvas") as HTMLCanvasElement;
  canvas.addEventListener("mousedown", (event) => {
    if (state.activeTab !== "Segmentation") return;
    currentStroke = [canvasPoint(event)];
  });
  canvas.addEventListener("mousemove", (event) => {
    if (currentStroke) currentStroke.push(canvasPoint(event));
  });
  canvas.addEventListener("mouseup", async () => {
    if (!currentStroke || !brush) return;
    const stroke: Stroke = {
      mode: state.brushMode,
      axis: state.sliceAxis,
      index: state.sliceIndex,
      points: currentStroke,
    };
    currentStroke = null;
    brush.addStroke(stroke);
    await pushMarkers();
  });
  $("undo-stroke").addEventListener("click", async () => {
    if (brush?.undo()) await pushMarkers();
  });
  $("erase-all").addEventListener("click", async () => {
    brush?.eraseAll();
    await pushMarkers();
  });

  $("save-threshold").addEventListener("click", async () => {
    if (!state.caseId) return;
    const threshold = Number(($("threshold") as HTMLInputElement).value);
    await api.setParams(state.caseId, { threshold });
    state = markStale(state, "segment");
    sliceView.invalidate();
    render();
  });

  $("add-variant").addEventListener("click", () => {
    variants.push(emptyVariant());
    renderVariants();
  });
  $("save-variants").addEventListener("click", async () => {
    if (!state.caseId) return;
    const invalid = variants.flatMap((form, i) =>
      validateVariant(form).map((e) => `variant ${i}: ${e}`));
    if (invalid.length) {
      banner(invalid.join("; "));
      return;
    }
    await api.setProstheses(state.caseId, variants.map(toDoc));
    state = markStale(state, "mesh");
    await reloadCase();
    banner("variants saved", false);
  });

  for (const stage of ["segment", "mesh", "solve"] as const) {
    $(`run-${stage}`).addEventListener("click", async () => {
      if (!state.caseId) return;
      const variant = Number(($("active-variant") as HTMLInputElement).value) || 0;
      banner(`${stage} running...`, false);
      try {
        const job = await runAndWait(api, state.caseId, stage, variant, 300, (j) => {
          $("job-state").textContent = `${stage}: ${j.state} (${Math.round(j.progress * 100)}%)`;
        });
        if (job.state === "failed") {
          banner(`${stage} failed: ${job.error}`);
        } else {
          banner(`${stage} done`, false);
          sliceView.invalidate();
          await reloadCase();
        }
      } catch (err) {
        banner(err instanceof ApiError ? `${err.code}: ${err.message}` : String(err));
      }
    });
  }

  $("show-results").addEventListener("click", async () => {
    if (!state.caseId) return;
    const variant = Number(($("active-variant") as HTMLInputElement).value) || 0;
    try {
      const results = await api.getResults(state.caseId, variant);
      $("results-table").innerHTML = renderTable(maximaTable(results));
      const solver = results.report.solver;
      $("solver-report").textContent =
        `solver: ${solver.iterations} iterations, residual ${formatValue(solver.relative_residual)}, ` +
        `converged=${solver.converged}`;
    } catch (err) {
      banner(err instanceof ApiError ? `${err.code}: ${err.message}` : String(err));
    }
  });

  $("compare-variants").addEventListener("click", async () => {
    if (!state.caseId) return;
    const picks = (($("compare-ids") as HTMLInputElement).value || "0")
      .split(",").map((v) => Number(v.trim()));
    try {
      const payload = await api.compare(state.caseId, picks);
      $("results-table").innerHTML = renderTable(comparisonTable(payload));
      state = { ...state, selectedVariants: picks };
    } catch (err) {
      banner(err instanceof ApiError ? `${err.code}: ${err.message}` : String(err));
    }
  });
}

async function start(): Promise<void> {
  wireEvents();
  const fromHash = location.hash.replace(/^#/, "");
  if (fromHash) {
    state = { ...state, caseId: fromHash };
    try {
      await reloadCase();
    } catch {
      banner(`case ${fromHash} not found`);
      state = initialState();
    }
  }
  render();
}

void start();
