/** Pure view-model functions: service JSON in, display structures out.
 *
 * Everything here is deterministic in its inputs, so a full page reload
 * (re-fetch view, re-render) reproduces the identical display. No trial
 * logic lives on the client; boundaries, recommendations, and what-if
 * projections all come from the server.
 */

import type {
  Recommendation,
  SessionView,
  SetupForm,
  WhatIfResponse,
} from "./model.js";

/** Body for POST /trials from the setup wizard. */
export function setupPayload(form: SetupForm): Record<string, unknown> {
  if (!(form.phi > 0 && form.phi < 1)) {
    throw new Error(`phi must be in (0, 1), got ${form.phi}`);
  }
  if (form.N % form.cohortSize !== 0) {
    throw new Error("N must be a multiple of the cohort size");
  }
  return {
    family: form.family,
    policy: form.policy,
    phi: form.phi,
    K: form.K,
    N: form.N,
    cohort_size: form.cohortSize,
  };
}

export interface LadderRow {
  level: number;
  n: number;
  m: number;
  pHatText: string;
  barFraction: number; // p_hat clamped to [0,1], 0 when no data
  eliminated: boolean;
  isCurrent: boolean;
  isRecommended: boolean;
}

export function ladderRows(view: SessionView): LadderRow[] {
  const recommended =
    view.recommendation.action === "treat" ? view.recommendation.next_dose : null;
  return view.doses.map((d) => ({
    level: d.level,
    n: d.n,
    m: d.m,
    pHatText: d.p_hat === null ? "–" : d.p_hat.toFixed(3),
    barFraction: d.p_hat === null ? 0 : Math.min(Math.max(d.p_hat, 0), 1),
    eliminated: d.eliminated,
    isCurrent: d.level === view.current_dose && view.k_max > 0,
    isRecommended: d.level === recommended,
  }));
}

export interface OverlayLine {
  value: number;
  label: string;
}

/** Vertical reference lines for the dose-ladder bars. */
export function overlayLines(view: SessionView): OverlayLine[] {
  if (view.design.family === "boin") {
    const b = view.design.boundaries;
    return [
      { value: b.lambda_e, label: `λe = ${b.lambda_e.toFixed(4)}` },
      { value: b.lambda_d, label: `λd = ${b.lambda_d.toFixed(4)}` },
    ];
  }
  const p = view.design.partition;
  return [
    { value: p.target_lo, label: `target key ${p.target_lo.toFixed(2)}` },
    { value: p.target_hi, label: `target key ${p.target_hi.toFixed(2)}` },
  ];
}

export interface Banner {
  kind: "stop" | "complete" | null;
  text: string;
}

export function banner(view: SessionView): Banner {
  if (view.status === "stopped_toxicity") {
    return {
      kind: "stop",
      text: "Trial stopped: dose 1 over-toxic. No MTD is selected.",
    };
  }
  if (view.status === "completed") {
    const mtd = view.recommendation.mtd;
    return {
      kind: "complete",
      text:
        mtd == null
          ? "Trial completed. No MTD could be selected."
          : `Trial completed. Selected MTD: dose ${mtd}.`,
    };
  }
  return { kind: null, text: "" };
}

/** Cohort entry must be disabled unless the trial is active. */
export function entryEnabled(view: SessionView): boolean {
  return view.status === "active";
}

export function recommendationText(rec: Recommendation): string {
  if (rec.action === "treat") return `Recommended next dose: ${rec.next_dose}`;
  if (rec.action === "stop") return "Recommendation: stop the trial";
  return "Trial complete";
}

export function rationaleText(rec: Recommendation): string {
  const r = rec.rationale;
  if (r.rule === "start") return String(r.detail ?? "");
  if (r.rule === "baseline") return `baseline decision: ${r.decision} (p̂ = ${r.p_hat})`;
  if (r.rule === "bandit") {
    const vals = (r.values as number[] | undefined)
      ?.map((v) => v.toFixed(3))
      .join(", ");
    return `bandit branch: ${r.branch}; p* = [${vals ?? ""}]`;
  }
  return String(r.detail ?? r.rule);
}

export interface WhatIfRow {
  dlt: number;
  outcomeText: string;
  eliminatedText: string;
  mtdText: string;
}

export function whatifRows(resp: WhatIfResponse): WhatIfRow[] {
  return Object.keys(resp.projections)
    .map((k) => parseInt(k, 10))
    .sort((a, b) => a - b)
    .map((dlt) => {
      const p = resp.projections[String(dlt)];
      return {
        dlt,
        outcomeText: recommendationText(p.recommendation),
        eliminatedText:
          p.eliminated.length === 0 ? "none" : p.eliminated.join(", "),
        mtdText: p.mtd_preview == null ? "none" : `dose ${p.mtd_preview}`,
      };
    });
}

/** Render the whole display as one HTML string (pure; used by main.ts). */
export function renderHtml(view: SessionView, whatif: WhatIfResponse | null): string {
  const b = banner(view);
  const rows = ladderRows(view)
    .map(
      (r) => `<tr class="${r.eliminated ? "eliminated" : ""}${r.isRecommended ? " recommended" : ""}">
<td>${r.level}${r.isCurrent ? " ◀" : ""}</td><td>${r.n}</td><td>${r.m}</td><td>${r.pHatText}</td>
<td><div class="bar" style="width:${(r.barFraction * 100).toFixed(1)}%"></div></td>
<td>${r.eliminated ? "eliminated" : ""}</td></tr>`,
    )
    .join("\n");
  const overlays = overlayLines(view)
    .map((o) => `<span class="overlay">${o.label}</span>`)
    .join(" ");
  const wi =
    whatif === null
      ? ""
      : `<h3>What-if: pending cohort at dose ${whatif.pending_dose}</h3><table>
<tr><th>DLTs</th><th>then</th><th>eliminated</th><th>MTD preview</th></tr>` +
        whatifRows(whatif)
          .map(
            (r) =>
              `<tr><td>${r.dlt}</td><td>${r.outcomeText}</td><td>${r.eliminatedText}</td><td>${r.mtdText}</td></tr>`,
          )
          .join("\n") +
        "</table>";
  return `
${b.kind ? `<div class="banner ${b.kind}">${b.text}</div>` : ""}
<p class="recommendation">${recommendationText(view.recommendation)}</p>
<p class="rationale">${rationaleText(view.recommendation)}</p>
<p class="meta">patients ${view.total_patients}/${view.params.N} — ${view.params.family}${view.params.policy ? "-" + view.params.policy : ""} φ=${view.params.phi}</p>
<p class="overlays">${overlays}</p>
<table class="ladder">
<tr><th>dose</th><th>n</th><th>DLTs</th><th>p̂</th><th></th><th></th></tr>
${rows}
</table>
${wi}`;
}
