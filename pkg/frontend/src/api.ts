/** Client for the odflow service. These are the only endpoints the UI calls. */

import type { GroupSpec, LayoutDoc } from "./types.js";

export interface ApiConfig {
  baseUrl: string;
}

export interface RelayoutBody {
  filter?: [number, number];
  groups?: GroupSpec[];
  selections?: string[];
}

export class ApiClient {
  constructor(private readonly config: ApiConfig) {}

  private url(path: string): string {
    return this.config.baseUrl.replace(/\/$/, "") + path;
  }

  async getLayout(
    datasetId: string,
    kind = "maptrix",
    signal?: AbortSignal,
  ): Promise<LayoutDoc> {
    const res = await fetch(this.url(`/datasets/${datasetId}/layout?kind=${kind}`), {
      signal,
    });
    if (!res.ok) throw new Error(`layout failed: ${res.status}`);
    return (await res.json()) as LayoutDoc;
  }

  async relayout(
    datasetId: string,
    body: RelayoutBody,
    kind = "maptrix",
    signal?: AbortSignal,
  ): Promise<{ layout: LayoutDoc; stateVersion: number }> {
    const res = await fetch(this.url(`/datasets/${datasetId}/relayout?kind=${kind}`), {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(body),
      signal,
    });
    if (!res.ok) {
      const err = await res.json().catch(() => ({}));
      throw new Error(
        `relayout failed: ${res.status} ${(err as any)?.error?.type ?? ""}`,
      );
    }
    return {
      layout: (await res.json()) as LayoutDoc,
      stateVersion: Number(res.headers.get("X-State-Version") ?? "0"),
    };
  }

  async getState(datasetId: string): Promise<unknown> {
    const res = await fetch(this.url(`/datasets/${datasetId}/state`));
    if (!res.ok) throw new Error(`state failed: ${res.status}`);
    return res.json();
  }
}
