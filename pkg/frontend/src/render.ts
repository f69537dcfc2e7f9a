/** Pure rendering: ViewState -> SVG node descriptors.
 *
 * Geometry is copied verbatim from the layout document (single source of
 * truth); this module only maps primitives to SVG vocabulary and attaches
 * highlight classes.
 */

import { activeHighlights } from "./state.js";
import type { LayoutDoc, Primitive, ViewState } from "./types.js";

export interface Node {
  tag: string;
  attrs: Record<string, string>;
  children: Node[];
  text?: string;
}

const fmt = (v: number): string => v.toFixed(3);

const pathD = (points: number[][], closed: boolean): string => {
  const cmds = [`M ${fmt(points[0][0])} ${fmt(points[0][1])}`];
  for (const [x, y] of points.slice(1)) cmds.push(`L ${fmt(x)} ${fmt(y)}`);
  if (closed) cmds.push("Z");
  return cmds.join(" ");
};

const halfCircleD = (cx: number, cy: number, r: number, side: string): string => {
  const sweep = side === "left" ? "0" : "1";
  return `M ${fmt(cx)} ${fmt(cy - r)} A ${fmt(r)} ${fmt(r)} 0 0 ${sweep} ${fmt(cx)} ${fmt(cy + r)} Z`;
};

const primitiveNode = (p: Primitive, highlighted: boolean): Node | null => {
  const cls: Record<string, string> = highlighted ? { class: "hl" } : {};
  const id: Record<string, string> = p.id ? { id: p.id } : {};
  switch (p.type) {
    case "path":
      return {
        tag: "path",
        attrs: {
          ...id,
          d: pathD(p.points!, p.closed ?? false),
          fill: p.fill ?? "none",
          ...(p.stroke ? { stroke: p.stroke, "stroke-width": fmt(p.strokeWidth ?? 1) } : {}),
          ...cls,
        },
        children: [],
      };
    case "cell":
      return {
        tag: "path",
        attrs: { ...id, d: pathD(p.points!, true), fill: p.fill ?? "#fff", ...cls },
        children: [],
      };
    case "leader":
      return {
        tag: "path",
        attrs: {
          ...id,
          d: pathD(p.points!, false),
          fill: "none",
          stroke: p.stroke ?? "#333",
          "stroke-width": fmt(p.strokeWidth ?? 1),
          ...cls,
        },
        children: [],
      };
    case "segment":
      return {
        tag: "path",
        attrs: {
          ...id,
          d: pathD(p.points!, false),
          fill: "none",
          stroke: p.gradient?.from ?? "#08306b",
          "stroke-width": fmt(p.width ?? 1),
          "stroke-linecap": "round",
          ...cls,
        },
        children: [],
      };
    case "circle":
      return {
        tag: "circle",
        attrs: {
          ...id,
          cx: fmt(p.cx!),
          cy: fmt(p.cy!),
          r: fmt(p.r!),
          fill: p.fill ?? "#000",
          ...(p.opacity !== undefined ? { "fill-opacity": fmt(p.opacity) } : {}),
          ...cls,
        },
        children: [],
      };
    case "halfcircle":
      return {
        tag: "path",
        attrs: {
          ...id,
          d: halfCircleD(p.cx!, p.cy!, p.r!, p.side ?? "left"),
          fill: p.fill ?? "#000",
          ...cls,
        },
        children: [],
      };
    case "label":
      return {
        tag: "text",
        attrs: {
          ...id,
          x: fmt(p.x!),
          y: fmt(p.y!),
          "font-size": fmt(p.fontSize ?? 10),
          "font-family": "sans-serif",
          fill: p.fill ?? "#000",
          "text-anchor": p.anchor ?? "start",
          ...cls,
        },
        children: [],
        text: p.text ?? "",
      };
    default:
      return null;
  }
};

export const renderModel = (state: ViewState): Node => {
  const doc = state.layout;
  if (!doc) {
    return { tag: "svg", attrs: { width: "0", height: "0" }, children: [] };
  }
  const highlighted = new Set(activeHighlights(state));
  const groups: Node[] = [];
  for (const scene of doc.scenes) {
    const children: Node[] = [];
    for (const p of scene.primitives) {
      const node = primitiveNode(p, p.id !== undefined && highlighted.has(p.id));
      if (node) children.push(node);
    }
    groups.push({ tag: "g", attrs: { id: scene.id }, children });
  }
  return {
    tag: "svg",
    attrs: {
      xmlns: "http://www.w3.org/2000/svg",
      width: fmt(doc.canvas.width),
      height: fmt(doc.canvas.height),
      viewBox: `0 0 ${fmt(doc.canvas.width)} ${fmt(doc.canvas.height)}`,
    },
    children: groups,
  };
};

/** Geometry of every rendered primitive, keyed by id, straight from the doc. */
export const displayedGeometry = (doc: LayoutDoc): Map<string, unknown> => {
  const out = new Map<string, unknown>();
  for (const scene of doc.scenes) {
    for (const p of scene.primitives) {
      if (!p.id) continue;
      if (p.points) out.set(p.id, p.points);
      else if (p.cx !== undefined) out.set(p.id, [p.cx, p.cy, p.r]);
      else if (p.x !== undefined) out.set(p.id, [p.x, p.y]);
    }
  }
  return out;
};
