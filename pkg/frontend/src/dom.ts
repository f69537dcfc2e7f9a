/** Materialize render-model nodes into live SVG DOM. */

import type { Node } from "./render.js";

const SVG_NS = "http://www.w3.org/2000/svg";

export const materialize = (node: Node, doc: Document): SVGElement => {
  const el = doc.createElementNS(SVG_NS, node.tag) as SVGElement;
  for (const [k, v] of Object.entries(node.attrs)) el.setAttribute(k, v);
  if (node.text !== undefined) el.textContent = node.text;
  for (const child of node.children) el.appendChild(materialize(child, doc));
  return el;
};

export const replaceChildrenWith = (host: Element, node: Node): void => {
  const fresh = materialize(node, host.ownerDocument);
  host.replaceChildren(fresh);
};
