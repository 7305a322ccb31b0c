/**
 * Slice fetch controller: debounces slider movement and never asks the
 * server twice for the same view, so dragging through a stack issues one
 * request per settled index.  Rendering is read-only; toggling overlays or
 * scrubbing never mutates case state.
 */

import type { ApiClient, SlicePayload } from "./api.js";
import type { ViewState } from "./state.js";

export type SliceListener = (payload: SlicePayload) => void;
export type ErrorListener = (message: string) => void;

export class SliceViewController {
  private cache = new Map<string, SlicePayload>();
  private timer: ReturnType<typeof setTimeout> | null = null;
  private pendingKey: string | null = null;
  requestLog: string[] = [];

  constructor(
    private api: ApiClient,
    private onSlice: SliceListener,
    private onError: ErrorListener,
    private debounceMs = 120,
  ) {}

  private keyOf(state: ViewState): string {
    return [
      state.caseId, state.sliceAxis, state.sliceIndex, state.window,
      state.level, state.overlay, state.field, state.selectedVariants[0] ?? 0,
    ].join("|");
  }

  /** Schedule a fetch for the current view; rapid calls collapse into the
   * last one, repeated views come from the cache without a request. */
  view(state: ViewState): void {
    if (!state.caseId || !state.volume) return;
    const key = this.keyOf(state);
    const cached = this.cache.get(key);
    if (cached) {
      this.onSlice(cached);
      return;
    }
    this.pendingKey = key;
    if (this.timer !== null) clearTimeout(this.timer);
    this.timer = setTimeout(() => void this.fetchNow(state, key), this.debounceMs);
  }

  private async fetchNow(state: ViewState, key: string): Promise<void> {
    this.timer = null;
    if (key !== this.pendingKey) return;
    try {
      const payload = await this.api.getSlice(state.caseId!, {
        axis: state.sliceAxis,
        index: state.sliceIndex,
        window: state.window,
        level: state.level,
        overlay: state.overlay,
        variant: state.selectedVariants[0] ?? 0,
        field: state.field,
      });
      this.cache.set(key, payload);
      this.requestLog.push(key);
      if (key === this.pendingKey) this.onSlice(payload);
    } catch (err) {
      this.onError(err instanceof Error ? err.message : String(err));
    }
  }

  /** Drop cached slices (after any case mutation that changes them). */
  invalidate(): void {
    this.cache.clear();
  }
}
