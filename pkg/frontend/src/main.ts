/** DOM wiring: setup wizard, cohort entry, display refresh.
 *
 * At most one mutation is in flight at a time; the display is always
 * re-rendered from a fresh server response (no optimistic updates).
 */

import { createTrial, getTrial, getWhatIf, postCohort } from "./api.js";
import type { SessionView, SetupForm, WhatIfResponse } from "./model.js";
import { entryEnabled, renderHtml, setupPayload } from "./view.js";

let currentId: string | null = null;
let busy = false;

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

function showError(message: string): void {
  el("error").textContent = message;
}

async function refresh(view?: SessionView): Promise<void> {
  if (!currentId) return;
  try {
    const v = view ?? (await getTrial(currentId));
    let whatif: WhatIfResponse | null = null;
    if (v.status === "active" && v.k_max > 0) {
      whatif = await getWhatIf(currentId);
    }
    el("display").innerHTML = renderHtml(v, whatif);
    const input = el<HTMLInputElement>("dlt-count");
    const button = el<HTMLButtonElement>("record");
    input.disabled = !entryEnabled(v);
    button.disabled = !entryEnabled(v);
    input.max = String(v.params.cohort_size);
    el("setup").style.display = "none";
    el("conduct").style.display = "";
    window.location.hash = v.id;
    showError("");
  } catch (err) {
    showError(err instanceof Error ? err.message : String(err));
  }
}

async function onCreate(): Promise<void> {
  if (busy) return;
  busy = true;
  try {
    const policyRaw = el<HTMLSelectElement>("policy").value;
    const form: SetupForm = {
      family: el<HTMLSelectElement>("family").value as SetupForm["family"],
      policy: policyRaw === "baseline" ? null : policyRaw,
      phi: parseFloat(el<HTMLInputElement>("phi").value),
      K: parseInt(el<HTMLInputElement>("doses").value, 10),
      N: parseInt(el<HTMLInputElement>("sample-size").value, 10),
      cohortSize: parseInt(el<HTMLInputElement>("cohort-size").value, 10),
    };
    const view = await createTrial(setupPayload(form));
    currentId = view.id;
    await refresh(view);
  } catch (err) {
    showError(err instanceof Error ? err.message : String(err));
  } finally {
    busy = false;
  }
}

async function onRecord(): Promise<void> {
  if (busy || !currentId) return;
  busy = true;
  try {
    const dlt = parseInt(el<HTMLInputElement>("dlt-count").value, 10);
    const view = await postCohort(currentId, dlt);
    await refresh(view);
  } catch (err) {
    showError(err instanceof Error ? err.message : String(err));
  } finally {
    busy = false;
  }
}

export function init(): void {
  el("create").addEventListener("click", () => void onCreate());
  el("record").addEventListener("click", () => void onRecord());
  const fromHash = window.location.hash.replace(/^#/, "");
  if (fromHash) {
    currentId = fromHash;
    void refresh();
  }
}

if (typeof document !== "undefined") {
  document.addEventListener("DOMContentLoaded", init);
}
