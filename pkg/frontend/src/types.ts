/** Payload shapes of the dagcheck HTTP API, mirrored field for field. */

export interface ClaimDoc {
  x: string;
  y: string;
  conditioning: string[];
}

export interface HypothesisSetDoc {
  dag_fingerprint: string;
  claims: ClaimDoc[];
  latent_only_pairs: [string, string][];
}

export interface TestResultDoc {
  claim: ClaimDoc;
  method: "distance_covariance" | "kernel_conditional";
  statistic: number;
  p_value: number;
  alpha: number;
  decision: "reject_independence" | "fail_to_reject";
  seed: number;
  permutations: number;
  degenerate: boolean;
}

export interface EvaluationSummary {
  passed: number;
  failed: number;
  degenerate: number;
}

export interface EvaluationDoc {
  dag_fingerprint: string;
  results: TestResultDoc[];
  summary: EvaluationSummary;
}

export interface EditDoc {
  kind: "add_edge" | "remove_edge" | "reverse_edge";
  from: string;
  to: string;
}

export interface ProposalDoc {
  edit: EditDoc;
  mechanism: "collider_to_chain" | "chain_to_collider" | "add_direct_edge" | "reverse_edge";
  rationale: string;
  followup_claims: ClaimDoc[];
  followup_results: TestResultDoc[];
}

export interface DiagnosisDoc {
  dag_fingerprint: string;
  failed_claim: ClaimDoc | null;
  connecting_paths?: string[];
  candidates: ProposalDoc[];
}

export interface SessionInfo {
  id: string;
  dag_fingerprint: string;
  dag: string;
  has_dataset: boolean;
}

export interface AdjustmentDoc {
  dag_fingerprint: string;
  exposure: string;
  outcome: string;
  admissible: boolean;
  sets: string[][];
}

export interface ReportDoc {
  dag_fingerprint: string;
  narrative: string;
  session: unknown;
}

export interface ApiErrorDetail {
  code: string;
  reason?: string;
  expected?: string;
  actual?: string;
}

export function claimText(claim: ClaimDoc): string {
  const base = `${claim.x} _||_ ${claim.y}`;
  return claim.conditioning.length ? `${base} | ${claim.conditioning.join(", ")}` : base;
}
