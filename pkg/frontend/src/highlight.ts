/** Client-side highlight joins computed purely from element ids.
 *
 * The UI never computes geometry: it joins ids of elements already present
 * in the layout document (leaders, stripes via row/col cells, map regions).
 */

import type { HoverTarget, LayoutDoc } from "./types.js";

export const allElementIds = (doc: LayoutDoc): Set<string> => {
  const ids = new Set<string>();
  for (const scene of doc.scenes) {
    for (const p of scene.primitives) {
      if (p.id) ids.add(p.id);
    }
  }
  return ids;
};

const regionJoin = (doc: LayoutDoc, rid: string): string[] => {
  const known = allElementIds(doc);
  const out: string[] = [];
  for (const candidate of [
    `leader:origin:${rid}`,
    `leader:dest:${rid}`,
    `region:origin:${rid}`,
    `region:dest:${rid}`,
    `rowlabel:${rid}`,
    `collabel:${rid}`,
    `maplabel:origin:${rid}`,
    `maplabel:dest:${rid}`,
  ]) {
    if (known.has(candidate)) out.push(candidate);
  }
  for (const id of known) {
    if (id.startsWith(`cell:${rid}:`)) out.push(id); // row stripe
    else if (id.startsWith("cell:") && id.endsWith(`:${rid}`)) out.push(id); // column stripe
  }
  return out.sort();
};

const cellJoin = (doc: LayoutDoc, origin: string, dest: string): string[] => {
  const known = allElementIds(doc);
  const out: string[] = [];
  const cell = `cell:${origin}:${dest}`;
  if (known.has(cell)) out.push(cell);
  for (const candidate of [`leader:origin:${origin}`, `leader:dest:${dest}`]) {
    if (known.has(candidate)) out.push(candidate);
  }
  return out.sort();
};

/** Element ids emphasized for a hover (or persisted-click) target. */
export const hoverJoin = (doc: LayoutDoc | null, target: HoverTarget): string[] => {
  if (!doc || !target) return [];
  switch (target.kind) {
    case "region":
      return regionJoin(doc, target.id);
    case "cell":
      return cellJoin(doc, target.origin, target.dest);
    case "leader": {
      // leader:<side>:<rid> highlights like its region
      const rid = target.id.split(":").pop() ?? "";
      return regionJoin(doc, rid);
    }
    case "label": {
      const rid = target.id.split(":").pop() ?? "";
      return regionJoin(doc, rid);
    }
  }
};

/** Parse a DOM element id back into a hover target. */
export const targetFromElementId = (id: string): HoverTarget => {
  if (id.startsWith("cell:")) {
    const [, origin, dest] = id.split(":");
    return { kind: "cell", origin, dest };
  }
  if (id.startsWith("leader:")) return { kind: "leader", id };
  if (id.startsWith("region:") || id.startsWith("total:")) {
    const rid = id.split(":").pop() ?? "";
    return { kind: "region", id: rid };
  }
  if (id.startsWith("rowlabel:") || id.startsWith("collabel:") || id.startsWith("maplabel:")) {
    return { kind: "label", id };
  }
  return null;
};
