import { describe, expect, it } from "vitest";

import type { SessionView, WhatIfResponse } from "../src/model.js";
import {
  banner,
  entryEnabled,
  ladderRows,
  overlayLines,
  renderHtml,
  setupPayload,
  whatifRows,
} from "../src/view.js";

function freshView(overrides: Partial<SessionView> = {}): SessionView {
  return {
    id: "abc123",
    params: {
      phi: 0.3,
      K: 6,
      N: 36,
      cohort_size: 3,
      family: "boin",
      policy: null,
    },
    status: "active",
    current_dose: 1,
    k_max: 0,
    total_patients: 0,
    doses: Array.from({ length: 6 }, (_, i) => ({
      level: i + 1,
      n: 0,
      m: 0,
      p_hat: null,
      eliminated: false,
    })),
    history: [],
    recommendation: {
      action: "treat",
      next_dose: 1,
      rationale: { rule: "start", detail: "first cohort is treated at the lowest dose" },
    },
    design: {
      family: "boin",
      boundaries: { lambda_e: 0.23649068523646805, lambda_d: 0.35851946464092954 },
      partition: {
        target_lo: 0.25,
        target_hi: 0.35,
        keys: [
          [0.05, 0.15],
          [0.15, 0.25],
          [0.25, 0.35],
          [0.35, 0.45],
        ],
      },
    },
    ...overrides,
  };
}

describe("setup wizard payload", () => {
  it("maps the form onto the create-trial body", () => {
    expect(
      setupPayload({
        family: "boin",
        policy: "ts-eps:0.05",
        phi: 0.3,
        K: 6,
        N: 36,
        cohortSize: 3,
      }),
    ).toEqual({
      family: "boin",
      policy: "ts-eps:0.05",
      phi: 0.3,
      K: 6,
      N: 36,
      cohort_size: 3,
    });
  });

  it("passes null policy through for the baseline rule", () => {
    const body = setupPayload({
      family: "keyboard",
      policy: null,
      phi: 0.3,
      K: 6,
      N: 36,
      cohortSize: 3,
    });
    expect(body.policy).toBeNull();
    expect(body.family).toBe("keyboard");
  });

  it("rejects invalid configurations before hitting the server", () => {
    expect(() =>
      setupPayload({ family: "boin", policy: null, phi: 1.3, K: 6, N: 36, cohortSize: 3 }),
    ).toThrow(/phi/);
    expect(() =>
      setupPayload({ family: "boin", policy: null, phi: 0.3, K: 6, N: 35, cohortSize: 3 }),
    ).toThrow(/multiple/);
  });
});

describe("stop banner after 3/3 DLTs at dose 1", () => {
  const stopped = freshView({
    status: "stopped_toxicity",
    k_max: 1,
    total_patients: 3,
    doses: [
      { level: 1, n: 3, m: 3, p_hat: 1.0, eliminated: true },
      ...Array.from({ length: 5 }, (_, i) => ({
        level: i + 2,
        n: 0,
        m: 0,
        p_hat: null,
        eliminated: true,
      })),
    ],
    history: [{ cohort_index: 0, dose: 1, dlt_count: 3 }],
    recommendation: {
      action: "stop",
      rationale: { rule: "safety", detail: "the lowest dose is over-toxic" },
    },
  });

  it("renders the stop banner", () => {
    const b = banner(stopped);
    expect(b.kind).toBe("stop");
    expect(b.text).toMatch(/stopped/i);
    expect(b.text).toMatch(/over-toxic/i);
  });

  it("disables cohort entry", () => {
    expect(entryEnabled(stopped)).toBe(false);
    expect(entryEnabled(freshView())).toBe(true);
  });

  it("marks every dose eliminated in the ladder", () => {
    expect(ladderRows(stopped).every((r) => r.eliminated)).toBe(true);
  });
});

describe("boundary overlay", () => {
  it("shows 0.2365 and 0.3585 for a BOIN phi=0.3 session", () => {
    const lines = overlayLines(freshView());
    expect(lines).toHaveLength(2);
    expect(lines[0].value).toBeCloseTo(0.2365, 4);
    expect(lines[1].value).toBeCloseTo(0.3585, 4);
    expect(lines[0].label).toContain("0.2365");
    expect(lines[1].label).toContain("0.3585");
  });

  it("shows the target key for a keyboard session", () => {
    const view = freshView();
    view.design = { ...view.design, family: "keyboard" };
    const lines = overlayLines(view);
    expect(lines.map((l) => l.value)).toEqual([0.25, 0.35]);
  });
});

describe("ladder and what-if rows", () => {
  it("derives the ladder purely from the doses array", () => {
    const view = freshView({
      k_max: 2,
      current_dose: 2,
      total_patients: 6,
      doses: [
        { level: 1, n: 3, m: 0, p_hat: 0, eliminated: false },
        { level: 2, n: 3, m: 1, p_hat: 1 / 3, eliminated: false },
        { level: 3, n: 0, m: 0, p_hat: null, eliminated: false },
        { level: 4, n: 0, m: 0, p_hat: null, eliminated: false },
        { level: 5, n: 0, m: 0, p_hat: null, eliminated: false },
        { level: 6, n: 0, m: 0, p_hat: null, eliminated: false },
      ],
      recommendation: {
        action: "treat",
        next_dose: 2,
        rationale: { rule: "baseline", decision: "retain", p_hat: 0.333333 },
      },
    });
    const rows = ladderRows(view);
    expect(rows[1].pHatText).toBe("0.333");
    expect(rows[1].isCurrent).toBe(true);
    expect(rows[1].isRecommended).toBe(true);
    expect(rows[2].pHatText).toBe("–");
    expect(rows[2].barFraction).toBe(0);
  });

  it("orders what-if rows by DLT count with server-provided outcomes", () => {
    const resp: WhatIfResponse = {
      pending_dose: 2,
      projections: {
        "3": {
          recommendation: { action: "treat", next_dose: 1, rationale: { rule: "baseline" } },
          eliminated: [2, 3, 4, 5, 6],
          mtd_preview: 1,
        },
        "0": {
          recommendation: { action: "treat", next_dose: 3, rationale: { rule: "baseline" } },
          eliminated: [],
          mtd_preview: 2,
        },
      },
    };
    const rows = whatifRows(resp);
    expect(rows.map((r) => r.dlt)).toEqual([0, 3]);
    expect(rows[0].outcomeText).toContain("dose: 3");
    expect(rows[1].eliminatedText).toBe("2, 3, 4, 5, 6");
    expect(rows[1].mtdText).toBe("dose 1");
  });
});

describe("reload reproducibility", () => {
  it("renders byte-identical HTML from identical server state", () => {
    const view = freshView();
    const whatif: WhatIfResponse = {
      pending_dose: 1,
      projections: {
        "0": {
          recommendation: { action: "treat", next_dose: 2, rationale: { rule: "baseline" } },
          eliminated: [],
          mtd_preview: null,
        },
      },
    };
    const first = renderHtml(view, whatif);
    const again = renderHtml(
      JSON.parse(JSON.stringify(view)),
      JSON.parse(JSON.stringify(whatif)),
    );
    expect(again).toBe(first);
    expect(first).toContain("Recommended next dose: 1");
  });
});
