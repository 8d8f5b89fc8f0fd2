/**
 * Panel view-models: implications list, live-updating results table, and
 * proposal cards for steering refinement. All pure state machines — the
 * DOM layer renders them, the API layer feeds them, and every displayed
 * number originates from a server response.
 */

import { claimText } from "./types.js";
import type {
  ClaimDoc,
  DiagnosisDoc,
  EvaluationSummary,
  HypothesisSetDoc,
  ProposalDoc,
  TestResultDoc,
} from "./types.js";

export interface ImplicationRow {
  index: number;
  text: string;
  claim: ClaimDoc;
}

export class ImplicationsPanel {
  fingerprint = "";
  rows: ImplicationRow[] = [];
  untestable: string[] = [];

  refresh(doc: HypothesisSetDoc): void {
    this.fingerprint = doc.dag_fingerprint;
    this.rows = doc.claims.map((claim, i) => ({ index: i + 1, text: claimText(claim), claim }));
    this.untestable = doc.latent_only_pairs.map(
      ([x, y]) => `(${x}, ${y}): separable only through latent variables`,
    );
  }

  /** The panel's JSON document, byte-identical to the server response it
   * mirrors (single source of truth). */
  exportJson(doc: HypothesisSetDoc): string {
    return JSON.stringify(doc, null, 2) + "\n";
  }
}

export type Badge = "pass" | "fail" | "degenerate" | "pending";

export interface ResultRow {
  text: string;
  badge: Badge;
  pValue: number | null;
  method: string | null;
}

export class ResultsPanel {
  alpha = 0.05;
  rows = new Map<string, ResultRow>();
  summary: EvaluationSummary | null = null;
  running = false;

  /** Seed pending rows from the implications list before the stream starts. */
  begin(claims: ClaimDoc[], alpha: number): void {
    this.alpha = alpha;
    this.running = true;
    this.summary = null;
    this.rows = new Map(
      claims.map((claim) => [
        claimText(claim),
        { text: claimText(claim), badge: "pending" as Badge, pValue: null, method: null },
      ]),
    );
  }

  /** One per-claim line from the evaluation stream. */
  accept(result: TestResultDoc): void {
    const key = claimText(result.claim);
    const badge: Badge = result.degenerate
      ? "degenerate"
      : result.decision === "reject_independence" ? "fail" : "pass";
    this.rows.set(key, { text: key, badge, pValue: result.p_value, method: result.method });
  }

  finish(summary: EvaluationSummary): void {
    this.summary = summary;
    this.running = false;
  }

  get pendingCount(): number {
    return [...this.rows.values()].filter((r) => r.badge === "pending").length;
  }

  get failedRows(): ResultRow[] {
    return [...this.rows.values()].filter((r) => r.badge === "fail");
  }

  banner(): string {
    if (this.running) return `evaluating... ${this.pendingCount} claims pending`;
    if (!this.summary) return "no evaluation yet";
    const { passed, failed, degenerate } = this.summary;
    return failed === 0
      ? `consistent: ${passed} passed, ${degenerate} degenerate`
      : `${failed} failed, ${passed} passed, ${degenerate} degenerate`;
  }
}

export interface ProposalCard {
  index: number;
  title: string;
  mechanismLabel: string;
  rationale: string;
  followups: { text: string; pValue: number; decision: string }[];
  confirmed: boolean;
}

const MECHANISM_LABELS: Record<ProposalDoc["mechanism"], string> = {
  collider_to_chain: "collider → chain",
  chain_to_collider: "chain → collider",
  add_direct_edge: "add edge",
  reverse_edge: "reverse edge",
};

const EDIT_VERBS = { add_edge: "add", remove_edge: "remove", reverse_edge: "reverse" } as const;

export class ProposalDeck {
  fingerprint = "";
  failedClaim: string | null = null;
  cards: ProposalCard[] = [];
  private accepted: number | null = null;

  refresh(doc: DiagnosisDoc): void {
    this.fingerprint = doc.dag_fingerprint;
    this.failedClaim = doc.failed_claim ? claimText(doc.failed_claim) : null;
    this.accepted = null;
    this.cards = doc.candidates.map((candidate, index) => ({
      index,
      title: `${EDIT_VERBS[candidate.edit.kind]} ${candidate.edit.from} -> ${candidate.edit.to}`,
      mechanismLabel: MECHANISM_LABELS[candidate.mechanism],
      rationale: candidate.rationale,
      followups: candidate.followup_results.map((r) => ({
        text: claimText(r.claim),
        pValue: r.p_value,
        decision: r.decision,
      })),
      confirmed:
        candidate.followup_results.length > 0 &&
        candidate.followup_results.every((r) => r.decision === "fail_to_reject"),
    }));
  }

  /** Exactly one accept per refinement step. */
  accept(index: number): ProposalCard {
    if (this.accepted !== null) {
      throw new Error("a proposal was already accepted for this step");
    }
    const card = this.cards.find((c) => c.index === index);
    if (!card) throw new Error(`no proposal ${index}`);
    this.accepted = index;
    return card;
  }

  declineAll(): void {
    this.cards = [];
    this.failedClaim = null;
    this.accepted = null;
  }

  get acceptedIndex(): number | null {
    return this.accepted;
  }
}
