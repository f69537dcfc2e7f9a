/** Dual-handle range filter on the colour key, with debounce bookkeeping.
 *
 * The widget state is pure; main.ts binds it to pointer events.  Dragging
 * updates the local range immediately and schedules a debounced relayout
 * request; only the newest scheduled request may fire.
 */

import type { FilterRange } from "./types.js";

export const DEBOUNCE_MS = 150;

export interface SliderState {
  domain: FilterRange; // magnitude domain of the colour scale
  range: FilterRange; // current handle positions
  dragging: "lo" | "hi" | null;
  scheduled: number; // token of the newest debounced request
}

export const sliderInit = (domain: FilterRange): SliderState => ({
  domain,
  range: { ...domain },
  dragging: null,
  scheduled: 0,
});

export const clampRange = (s: SliderState, range: FilterRange): FilterRange => {
  const lo = Math.max(s.domain.lo, Math.min(range.lo, range.hi));
  const hi = Math.min(s.domain.hi, Math.max(range.lo, range.hi));
  return { lo, hi };
};

export const beginDrag = (s: SliderState, which: "lo" | "hi"): SliderState => ({
  ...s,
  dragging: which,
});

export const dragTo = (s: SliderState, value: number): SliderState => {
  if (!s.dragging) return s;
  const range =
    s.dragging === "lo"
      ? clampRange(s, { lo: value, hi: s.range.hi })
      : clampRange(s, { lo: s.range.lo, hi: value });
  return { ...s, range };
};

export const endDrag = (s: SliderState): SliderState => ({ ...s, dragging: null });

/** Schedule a request; returns the token that must still be current to fire. */
export const schedule = (s: SliderState): [SliderState, number] => {
  const token = s.scheduled + 1;
  return [{ ...s, scheduled: token }, token];
};

export const isFullRange = (s: SliderState): boolean =>
  s.range.lo <= s.domain.lo && s.range.hi >= s.domain.hi;

/** Handle position as a fraction of the colour-key width. */
export const fraction = (s: SliderState, value: number): number => {
  const span = s.domain.hi - s.domain.lo;
  if (span <= 0) return 1;
  return Math.max(0, Math.min(1, (value - s.domain.lo) / span));
};
