/** Explorer controller: orchestrates API calls, state and transitions.
 *
 * All layout geometry comes from the service; in-flight relayout requests
 * are cancelled by newer user input (latest wins), and after a transition
 * settles the displayed document is exactly the last server response.
 */

import { ApiClient, RelayoutBody } from "./api.js";
import { reduce } from "./state.js";
import { DEBOUNCE_MS } from "./slider.js";
import { TRANSITION_MS, transitionFrame } from "./transitions.js";
import type {
  FilterRange,
  GroupSpec,
  HoverTarget,
  LayoutDoc,
  ViewState,
} from "./types.js";
import { initialViewState } from "./types.js";

export type FrameDriver = (durationMs: number, onFrame: (t: number) => void) => Promise<void>;

/** The engine schema this UI build understands; anything else is refused. */
export const SUPPORTED_SCHEMA = "1.0";

export const assertSchema = (doc: LayoutDoc): void => {
  if (doc.schemaVersion !== SUPPORTED_SCHEMA) {
    throw new Error(
      `unsupported layout schemaVersion ${doc.schemaVersion} (need ${SUPPORTED_SCHEMA})`,
    );
  }
};

/** requestAnimationFrame driver for the browser. */
export const rafDriver: FrameDriver = (durationMs, onFrame) =>
  new Promise((resolve) => {
    const start = performance.now();
    const tick = (now: number) => {
      const t = Math.min(1, (now - start) / durationMs);
      onFrame(t);
      if (t < 1) requestAnimationFrame(tick);
      else resolve();
    };
    requestAnimationFrame(tick);
  });

/** Instant driver: a few interpolation frames, then the final one. */
export const immediateDriver: FrameDriver = async (_duration, onFrame) => {
  for (const t of [0.25, 0.5, 0.75, 1]) onFrame(t);
};

export class Explorer {
  state: ViewState;
  displayed: LayoutDoc | null = null;

  private debounceTimer: ReturnType<typeof setTimeout> | null = null;
  private debounceResolve: (() => void) | null = null;
  private inflight: AbortController | null = null;
  private seq = 0;

  constructor(
    private readonly api: ApiClient,
    datasetId: string,
    private readonly onChange: (state: ViewState, displayed: LayoutDoc | null) => void = () => {},
    private readonly driver: FrameDriver = rafDriver,
    kind = "maptrix",
  ) {
    this.state = initialViewState(datasetId, kind);
  }

  private emit() {
    this.onChange(this.state, this.displayed);
  }

  async init(): Promise<void> {
    const layout = await this.api.getLayout(this.state.datasetId, this.state.kind);
    assertSchema(layout);
    this.state = reduce(this.state, {
      type: "layoutArrived",
      layout,
      seq: 0,
      version: 0,
    });
    this.displayed = layout;
    this.emit();
  }

  hover(target: HoverTarget): void {
    this.state = reduce(this.state, { type: "hover", target });
    this.emit();
  }

  clickPersist(target: HoverTarget): void {
    this.state = reduce(this.state, { type: "clickPersist", target });
    this.emit();
  }

  clearPersisted(): void {
    this.state = reduce(this.state, { type: "clearPersisted" });
    this.emit();
  }

  /** Debounced range filter; resolves when the layout has settled. */
  rangeFilter(range: FilterRange | null, fullDomain: boolean): Promise<void> {
    const seq = ++this.seq;
    this.state = reduce(this.state, { type: "setFilter", range, seq });
    this.emit();
    if (this.debounceTimer) {
      clearTimeout(this.debounceTimer);
      this.debounceResolve?.(); // the superseded call settles immediately
    }
    return new Promise((resolve) => {
      this.debounceResolve = resolve;
      this.debounceTimer = setTimeout(async () => {
        this.debounceTimer = null;
        this.debounceResolve = null;
        const body: RelayoutBody = {};
        if (range && !fullDomain) body.filter = [range.lo, range.hi];
        if (this.state.pendingGroups.length) body.groups = this.state.pendingGroups;
        await this.requestRelayout(body, seq);
        resolve();
      }, DEBOUNCE_MS);
    });
  }

  /** Aggregate a set of disjoint groups into a detail view. */
  async regionSelect(groups: GroupSpec[]): Promise<void> {
    const seq = ++this.seq;
    this.state = reduce(this.state, { type: "regionSelect", groups, seq });
    this.emit();
    if (this.state.message) return; // rejected client-side (overlap / empty)
    const body: RelayoutBody = { groups };
    if (this.state.filter) body.filter = [this.state.filter.lo, this.state.filter.hi];
    await this.requestRelayout(body, seq);
  }

  private async requestRelayout(body: RelayoutBody, seq: number): Promise<void> {
    this.inflight?.abort();
    const controller = new AbortController();
    this.inflight = controller;
    let layout: LayoutDoc;
    let version: number;
    try {
      const res = await this.api.relayout(
        this.state.datasetId,
        body,
        this.state.kind,
        controller.signal,
      );
      assertSchema(res.layout);
      layout = res.layout;
      version = res.stateVersion;
    } catch (err) {
      if (!controller.signal.aborted) {
        this.state = reduce(this.state, { type: "error", message: String(err) });
        this.emit();
      }
      return;
    }
    if (seq < this.seq) return; // a newer request superseded this response
    const previous = this.displayed;
    this.state = reduce(this.state, { type: "layoutArrived", layout, seq, version });
    if (previous) {
      await this.driver(TRANSITION_MS, (t) => {
        this.displayed = transitionFrame(previous, layout, t);
        this.emit();
      });
    }
    this.displayed = layout; // settled: exactly the server document
    this.emit();
  }
}
