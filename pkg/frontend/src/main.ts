/** Browser entry: wires the explorer to the page.
 *
 * Configuration comes from ./config.json ({"apiBaseUrl": "...",
 * "datasetId": "au"}); everything else is derived from server layouts.
 */

import { ApiClient } from "./api.js";
import { Explorer, rafDriver } from "./controller.js";
import { replaceChildrenWith } from "./dom.js";
import { targetFromElementId } from "./highlight.js";
import { renderModel } from "./render.js";
import {
  SliderState,
  beginDrag,
  dragTo,
  endDrag,
  isFullRange,
  sliderInit,
} from "./slider.js";
import type { ViewState } from "./types.js";

interface UiConfig {
  apiBaseUrl: string;
  datasetId: string;
}

const qs = <T extends Element>(sel: string): T => {
  const el = document.querySelector<T>(sel);
  if (!el) throw new Error(`missing element ${sel}`);
  return el;
};

async function boot(): Promise<void> {
  const config: UiConfig = await (await fetch("./config.json")).json();
  const api = new ApiClient({ baseUrl: config.apiBaseUrl });
  const host = qs<HTMLDivElement>("#view");
  const message = qs<HTMLDivElement>("#message");
  const sliderLo = qs<HTMLInputElement>("#range-lo");
  const sliderHi = qs<HTMLInputElement>("#range-hi");
  const rangeLabel = qs<HTMLSpanElement>("#range-label");
  const clearBtn = qs<HTMLButtonElement>("#clear");
  const groupBtn = qs<HTMLButtonElement>("#aggregate");

  let slider: SliderState | null = null;
  let lasso: string[] = [];
  const groupsPicked: string[][] = [];

  const explorer = new Explorer(
    api,
    config.datasetId,
    (state: ViewState, displayed) => {
      if (displayed) {
        replaceChildrenWith(host, renderModel({ ...state, layout: displayed }));
      }
      message.textContent = state.message ?? "";
    },
    rafDriver,
  );
  await explorer.init();

  const domain = explorer.state.layout?.colourScale?.domain ?? [0, 1];
  slider = sliderInit({ lo: domain[0], hi: domain[1] });
  for (const el of [sliderLo, sliderHi]) {
    el.min = String(domain[0]);
    el.max = String(domain[1]);
    el.step = "any";
  }
  sliderLo.value = String(domain[0]);
  sliderHi.value = String(domain[1]);

  const pushFilter = () => {
    if (!slider) return;
    rangeLabel.textContent = `${slider.range.lo.toFixed(0)} - ${slider.range.hi.toFixed(0)}`;
    void explorer.rangeFilter(slider.range, isFullRange(slider));
  };

  sliderLo.addEventListener("input", () => {
    slider = dragTo(beginDrag(slider!, "lo"), Number(sliderLo.value));
    slider = endDrag(slider);
    pushFilter();
  });
  sliderHi.addEventListener("input", () => {
    slider = dragTo(beginDrag(slider!, "hi"), Number(sliderHi.value));
    slider = endDrag(slider);
    pushFilter();
  });

  host.addEventListener("mousemove", (ev) => {
    const id = (ev.target as Element | null)?.getAttribute?.("id");
    explorer.hover(id ? targetFromElementId(id) : null);
  });
  host.addEventListener("mouseleave", () => explorer.hover(null));
  host.addEventListener("click", (ev) => {
    const id = (ev.target as Element | null)?.getAttribute?.("id");
    if (!id) return;
    if (ev.shiftKey) {
      // Shift-click accumulates a group selection for aggregation.
      const target = targetFromElementId(id);
      if (target?.kind === "region" && !lasso.includes(target.id)) {
        lasso.push(target.id);
        message.textContent = `group: ${lasso.join(", ")}`;
      }
      return;
    }
    explorer.clickPersist(targetFromElementId(id));
  });

  clearBtn.addEventListener("click", () => {
    explorer.clearPersisted();
    lasso = [];
    groupsPicked.length = 0;
  });

  groupBtn.addEventListener("click", () => {
    if (lasso.length === 0) return; // empty selection disabled
    groupsPicked.push([...lasso]);
    lasso = [];
    void explorer.regionSelect(
      groupsPicked.map((members, i) => ({ label: `G${i + 1}`, members })),
    );
  });

}

boot().catch((err) => {
  document.body.textContent = `failed to start: ${err}`;
});
