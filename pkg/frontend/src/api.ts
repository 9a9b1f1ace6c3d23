/** Thin typed client over the recommender service JSON API. */

import type { SessionView, WhatIfResponse } from "./model.js";

async function request<T>(
  path: string,
  init?: RequestInit,
): Promise<T> {
  const resp = await fetch(path, {
    headers: { "Content-Type": "application/json" },
    ...init,
  });
  if (!resp.ok) {
    let detail = resp.statusText;
    try {
      const body = await resp.json();
      if (body.detail) detail = String(body.detail);
    } catch {
      // non-JSON error body; keep the status text
    }
    throw new Error(`${resp.status}: ${detail}`);
  }
  return (await resp.json()) as T;
}

export function createTrial(payload: Record<string, unknown>): Promise<SessionView> {
  return request("/trials", { method: "POST", body: JSON.stringify(payload) });
}

export function getTrial(id: string): Promise<SessionView> {
  return request(`/trials/${id}`);
}

export function postCohort(id: string, dltCount: number): Promise<SessionView> {
  return request(`/trials/${id}/cohorts`, {
    method: "POST",
    body: JSON.stringify({ dlt_count: dltCount }),
  });
}

export function getWhatIf(id: string): Promise<WhatIfResponse> {
  return request(`/trials/${id}/whatif`);
}
