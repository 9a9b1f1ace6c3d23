/** Client-side mirrors of the service's JSON shapes. */

export interface DoseRow {
  level: number;
  n: number;
  m: number;
  p_hat: number | null;
  eliminated: boolean;
}

export interface Rationale {
  rule: string;
  [key: string]: unknown;
}

export interface Recommendation {
  action: "treat" | "stop" | "complete";
  next_dose?: number;
  mtd?: number | null;
  rationale: Rationale;
}

export interface DesignInfo {
  family: "boin" | "keyboard";
  boundaries: { lambda_e: number; lambda_d: number };
  partition: { target_lo: number; target_hi: number; keys: [number, number][] };
}

export interface SessionView {
  id: string;
  params: {
    phi: number;
    K: number;
    N: number;
    cohort_size: number;
    family: string;
    policy: string | null;
    [key: string]: unknown;
  };
  status: "active" | "completed" | "stopped_toxicity";
  current_dose: number;
  k_max: number;
  total_patients: number;
  doses: DoseRow[];
  history: { cohort_index: number; dose: number; dlt_count: number }[];
  recommendation: Recommendation;
  design: DesignInfo;
}

export interface WhatIfProjection {
  recommendation: Recommendation;
  eliminated: number[];
  mtd_preview: number | null;
}

export interface WhatIfResponse {
  pending_dose: number;
  projections: Record<string, WhatIfProjection>;
}

export interface SetupForm {
  family: "boin" | "keyboard";
  policy: string | null; // null | "ts" | "ts-eps:<eps>" | "greedy" | "median"
  phi: number;
  K: number;
  N: number;
  cohortSize: number;
}
