/** ViewState reducer: every UI event is a pure state transition. */

import { hoverJoin } from "./highlight.js";
import type {
  FilterRange,
  GroupSpec,
  HoverTarget,
  LayoutDoc,
  ViewState,
} from "./types.js";

export type Action =
  | { type: "hover"; target: HoverTarget }
  | { type: "clickPersist"; target: HoverTarget }
  | { type: "clearPersisted" }
  | { type: "setFilter"; range: FilterRange | null; seq: number }
  | { type: "regionSelect"; groups: GroupSpec[]; seq: number }
  | { type: "layoutArrived"; layout: LayoutDoc; seq: number; version: number }
  | { type: "error"; message: string };

export const reduce = (state: ViewState, action: Action): ViewState => {
  switch (action.type) {
    case "hover":
      return { ...state, hover: action.target };
    case "clickPersist": {
      const ids = hoverJoin(state.layout, action.target);
      if (ids.length === 0) return state;
      const persisted = new Set(state.persisted);
      // Toggle: if every joined id is already persisted, remove the set.
      const allIn = ids.every((id) => persisted.has(id));
      for (const id of ids) {
        if (allIn) persisted.delete(id);
        else persisted.add(id);
      }
      return { ...state, persisted: [...persisted].sort() };
    }
    case "clearPersisted":
      return { ...state, persisted: [] };
    case "setFilter":
      return { ...state, filter: action.range, requestSeq: action.seq, message: null };
    case "regionSelect": {
      const flat = action.groups.flatMap((g) => g.members);
      if (new Set(flat).size !== flat.length) {
        return { ...state, message: "groups overlap: pick disjoint regions" };
      }
      if (action.groups.some((g) => g.members.length === 0)) {
        return { ...state, message: "empty group selection" };
      }
      return {
        ...state,
        pendingGroups: action.groups,
        requestSeq: action.seq,
        message: null,
      };
    }
    case "layoutArrived": {
      // Latest-wins: discard stale responses.
      if (action.seq < state.appliedSeq) return state;
      return {
        ...state,
        layout: action.layout,
        layoutVersion: action.version,
        appliedSeq: action.seq,
        // Persisted ids that no longer exist are dropped.
        persisted: state.persisted.filter((id) =>
          action.layout.scenes.some((s) => s.primitives.some((p) => p.id === id)),
        ),
      };
    }
    case "error":
      return { ...state, message: action.message };
  }
};

/** Ids to emphasize right now: persisted set plus the transient hover join. */
export const activeHighlights = (state: ViewState): string[] => {
  const ids = new Set(state.persisted);
  for (const id of hoverJoin(state.layout, state.hover)) ids.add(id);
  return [...ids].sort();
};
