/** Layout document schema shared with the engine (schemaVersion 1.0). */

export interface Canvas {
  width: number;
  height: number;
}

export interface Primitive {
  type: string;
  id?: string;
  points?: number[][];
  closed?: boolean;
  stroke?: string | null;
  fill?: string | null;
  strokeWidth?: number;
  cx?: number;
  cy?: number;
  r?: number;
  x?: number;
  y?: number;
  text?: string;
  fontSize?: number;
  anchor?: string;
  value?: number;
  t?: number;
  width?: number;
  side?: string;
  band?: number;
  orientation?: string;
  row?: number;
  col?: number;
  opacity?: number;
  total?: number;
  gradient?: { from: string; to: string };
}

export interface Scene {
  id: string;
  primitives: Primitive[];
}

export interface LayoutDoc {
  schemaVersion: string;
  kind: string;
  canvas: Canvas;
  scenes: Scene[];
  ordering?: string[];
  colourScale?: { name: string; domain: [number, number] };
  cellSize?: number;
  regionCount?: number;
  separators?: number[];
}

export type HoverTarget =
  | { kind: "region"; id: string }
  | { kind: "cell"; origin: string; dest: string }
  | { kind: "leader"; id: string }
  | { kind: "label"; id: string }
  | null;

export interface FilterRange {
  lo: number;
  hi: number;
}

export interface GroupSpec {
  label: string;
  members: string[];
}

/** Rendering is a pure function of this state. */
export interface ViewState {
  datasetId: string;
  kind: string;
  layout: LayoutDoc | null;
  layoutVersion: number;
  hover: HoverTarget;
  persisted: string[]; // persisted highlight element ids (sorted, unique)
  filter: FilterRange | null;
  pendingGroups: GroupSpec[];
  message: string | null;
  requestSeq: number; // latest relayout request issued
  appliedSeq: number; // request whose response is displayed
}

export const initialViewState = (datasetId: string, kind = "maptrix"): ViewState => ({
  datasetId,
  kind,
  layout: null,
  layoutVersion: 0,
  hover: null,
  persisted: [],
  filter: null,
  pendingGroups: [],
  message: null,
  requestSeq: 0,
  appliedSeq: 0,
});
