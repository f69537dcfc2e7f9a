/** Animated re-layout: interpolate primitives by id between two documents.
 *
 * Elements present in both layouts move linearly over the transition;
 * entering/exiting elements fade.  The final frame (t = 1) is exactly the
 * new document, so the settled display always equals the server layout.
 */

import type { LayoutDoc, Primitive, Scene } from "./types.js";

export const TRANSITION_MS = 400;

const lerp = (a: number, b: number, t: number): number => a + (b - a) * t;

const lerpPoints = (a: number[][], b: number[][], t: number): number[][] => {
  if (a.length !== b.length) return t < 1 ? a : b; // shape changed: snap at end
  return a.map((pt, i) => [lerp(pt[0], b[i][0], t), lerp(pt[1], b[i][1], t)]);
};

const byId = (doc: LayoutDoc): Map<string, Primitive> => {
  const m = new Map<string, Primitive>();
  for (const scene of doc.scenes) {
    for (const p of scene.primitives) if (p.id) m.set(p.id, p);
  }
  return m;
};

const interpolatePrimitive = (from: Primitive | undefined, to: Primitive, t: number): Primitive => {
  if (!from) return { ...to, opacity: (to.opacity ?? 1) * t }; // enter: fade in
  const out: Primitive = { ...to };
  if (from.points && to.points) out.points = lerpPoints(from.points, to.points, t);
  for (const key of ["cx", "cy", "r", "x", "y", "width", "strokeWidth"] as const) {
    const a = from[key];
    const b = to[key];
    if (typeof a === "number" && typeof b === "number") (out as any)[key] = lerp(a, b, t);
  }
  return out;
};

/** Frame at progress t in [0, 1]; t = 1 returns the new layout exactly. */
export const transitionFrame = (oldDoc: LayoutDoc, newDoc: LayoutDoc, t: number): LayoutDoc => {
  if (t >= 1) return newDoc;
  const old = byId(oldDoc);
  const scenes: Scene[] = newDoc.scenes.map((scene) => ({
    id: scene.id,
    primitives: scene.primitives.map((p) =>
      p.id ? interpolatePrimitive(old.get(p.id), p, t) : p,
    ),
  }));
  // Exiting elements fade out in place.
  const incoming = new Set<string>();
  for (const scene of newDoc.scenes)
    for (const p of scene.primitives) if (p.id) incoming.add(p.id);
  const exiting: Primitive[] = [];
  for (const scene of oldDoc.scenes) {
    for (const p of scene.primitives) {
      if (p.id && !incoming.has(p.id)) {
        exiting.push({ ...p, opacity: (p.opacity ?? 1) * (1 - t) });
      }
    }
  }
  if (exiting.length) scenes.push({ id: "exiting", primitives: exiting });
  return { ...newDoc, scenes };
};
