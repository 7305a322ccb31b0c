/**
 * Typed client for the case-service JSON API.
 *
 * Every number the UI displays comes out of these responses untouched; the
 * client only decodes the base64 slice payloads into typed arrays.
 */

export interface VolumeSummary {
  dims: [number, number, number];
  spacing: [number, number, number];
  origin: [number, number, number];
  intensity_range: [number, number];
}

export interface CaseDoc {
  case_id: string;
  metadata: { name: string; notes: string };
  revision: number;
  volume: VolumeSummary | null;
  segmentation: {
    params: { threshold: number; connectivity: number; flood_surface: string } | null;
    markers: MarkersDoc | null;
    cuts: unknown | null;
  };
  prostheses: ProsthesisDoc[];
  materials: unknown | null;
  stages: Record<string, Record<string, { state: string }>>;
}

export interface MarkersDoc {
  markers: { voxel: [number, number, number]; id: number }[];
  names: Record<string, string>;
}

export interface ProsthesisDoc {
  supporting_teeth: string[];
  crown_thickness: number;
  pontic_gaps: number[] | null;
  mobility: Record<string, number>;
  pdl_thickness: Record<string, number>;
}

export interface SliceOverlay {
  kind: string;
  data: string;
  names?: Record<string, string>;
  field?: string;
  range?: [number, number];
}

export interface SlicePayload {
  axis: string;
  index: number;
  shape: [number, number]; // [width, height]
  window: number;
  level: number;
  gray: string;
  overlay: SliceOverlay | null;
}

export interface JobStatus {
  job_id: string;
  case_id: string;
  stage: string;
  variant: number;
  state: "queued" | "running" | "done" | "failed";
  progress: number;
  error: string | null;
}

export interface MaximaRow {
  max_displacement: number;
  max_von_mises: number;
}

export interface ResultsPayload {
  variant: number;
  maxima: Record<string, MaximaRow>;
  report: {
    solver: { iterations: number; relative_residual: number; converged: boolean };
    field_ranges: Record<string, [number, number]>;
    totals: Record<string, unknown>;
    warnings: string[];
  };
  fields: string[];
}

export interface ComparePayload {
  variants: number[];
  teeth: string[];
  columns: Record<string, Record<string, MaximaRow>>;
}

export class ApiError extends Error {
  constructor(
    public status: number,
    public code: string,
    message: string,
  ) {
    super(message);
  }
}

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class ApiClient {
  constructor(
    private base: string,
    private fetcher: FetchLike = (url, init) => fetch(url, init),
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const response = await this.fetcher(this.base + path, init);
    if (!response.ok) {
      let code = `HTTP_${response.status}`;
      let message = response.statusText;
      try {
        const body = (await response.json()) as { code?: string; message?: string };
        code = body.code ?? code;
        message = body.message ?? message;
      } catch {
        // non-JSON error body; keep the status text
      }
      throw new ApiError(response.status, code, message);
    }
    return (await response.json()) as T;
  }

  private json<T>(path: string, method: string, body: unknown): Promise<T> {
    return this.request<T>(path, {
      method,
      headers: { "content-type": "application/json" },
      body: JSON.stringify(body),
    });
  }

  createCase(metadata: { name: string; notes?: string }): Promise<{ case_id: string }> {
    return this.json("/cases", "POST", metadata);
  }

  listCases(): Promise<{ cases: { case_id: string; metadata: { name: string } }[] }> {
    return this.request("/cases");
  }

  getCase(caseId: string): Promise<CaseDoc> {
    return this.request(`/cases/${caseId}`);
  }

  uploadVolume(caseId: string, bytes: Uint8Array): Promise<{ volume: VolumeSummary }> {
    return this.request(`/cases/${caseId}/volume`, {
      method: "POST",
      headers: { "content-type": "application/octet-stream" },
      body: bytes as unknown as BodyInit,
    });
  }

  setParams(caseId: string, params: { threshold: number }): Promise<{ revision: number }> {
    return this.json(`/cases/${caseId}/segmentation/params`, "PUT", params);
  }

  setMarkers(caseId: string, markers: MarkersDoc): Promise<{ revision: number }> {
    return this.json(`/cases/${caseId}/segmentation/markers`, "PUT", markers);
  }

  setCuts(caseId: string, cuts: unknown): Promise<{ revision: number }> {
    return this.json(`/cases/${caseId}/segmentation/cuts`, "PUT", cuts);
  }

  setProstheses(caseId: string, variants: ProsthesisDoc[]): Promise<{ revision: number }> {
    return this.json(`/cases/${caseId}/prostheses`, "PUT", { variants });
  }

  setMaterials(caseId: string, materials: unknown): Promise<{ revision: number }> {
    return this.json(`/cases/${caseId}/materials`, "PUT", materials);
  }

  getSlice(
    caseId: string,
    query: {
      axis: string;
      index: number;
      window: number;
      level: number;
      overlay?: string;
      variant?: number;
      field?: string;
    },
  ): Promise<SlicePayload> {
    const params = new URLSearchParams({
      axis: query.axis,
      index: String(query.index),
      window: String(query.window),
      level: String(query.level),
      overlay: query.overlay ?? "none",
    });
    if (query.variant !== undefined) params.set("variant", String(query.variant));
    if (query.field !== undefined) params.set("field", query.field);
    return this.request(`/cases/${caseId}/slice?${params}`);
  }

  runStage(caseId: string, stage: string, variant = 0): Promise<{ job_id: string }> {
    return this.request(`/cases/${caseId}/run/${stage}?variant=${variant}`, { method: "POST" });
  }

  pollJob(jobId: string): Promise<JobStatus> {
    return this.request(`/jobs/${jobId}`);
  }

  getResults(caseId: string, variant: number): Promise<ResultsPayload> {
    return this.request(`/cases/${caseId}/variants/${variant}/results`);
  }

  compare(caseId: string, variants: number[]): Promise<ComparePayload> {
    return this.request(`/cases/${caseId}/compare?variants=${variants.join(",")}`);
  }
}

/** Decode the base64 row-major arrays carried by slice payloads. */
export function decodeBase64(data: string): Uint8Array {
  if (typeof atob === "function") {
    const text = atob(data);
    const out = new Uint8Array(text.length);
    for (let i = 0; i < text.length; i++) out[i] = text.charCodeAt(i);
    return out;
  }
  // node without atob (the test runner); Buffer is not in the DOM lib
  const nodeBuffer = (globalThis as { Buffer?: { from(s: string, e: string): Uint8Array } }).Buffer;
  if (!nodeBuffer) throw new Error("no base64 decoder available");
  return new Uint8Array(nodeBuffer.from(data, "base64"));
}

export function grayPixels(payload: SlicePayload): Uint8Array {
  return decodeBase64(payload.gray);
}

export function labelPixels(overlay: SliceOverlay): Int32Array {
  const bytes = decodeBase64(overlay.data);
  return new Int32Array(bytes.buffer, bytes.byteOffset, bytes.byteLength / 4);
}

export function fieldPixels(overlay: SliceOverlay): Float32Array {
  const bytes = decodeBase64(overlay.data);
  return new Float32Array(bytes.buffer, bytes.byteOffset, bytes.byteLength / 4);
}
