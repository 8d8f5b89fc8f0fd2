/**
 * Typed client for the dagcheck HTTP API.
 *
 * The UI never computes statistics or d-separation itself; every number it
 * shows flows through this module. `fetch` is injectable so tests can
 * replay recorded responses without a server.
 */

import type {
  AdjustmentDoc,
  ApiErrorDetail,
  DiagnosisDoc,
  EditDoc,
  EvaluationDoc,
  EvaluationSummary,
  HypothesisSetDoc,
  ReportDoc,
  SessionInfo,
  TestResultDoc,
} from "./types.js";

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class ApiError extends Error {
  readonly status: number;
  readonly detail: ApiErrorDetail;

  constructor(status: number, detail: ApiErrorDetail) {
    super(`${status}: ${detail.code}${detail.reason ? ` (${detail.reason})` : ""}`);
    this.status = status;
    this.detail = detail;
  }

  get stale(): boolean {
    return this.status === 409;
  }
}

export interface EvaluateOptions {
  alpha?: number;
  permutations?: number;
  seed?: number;
  expectedFingerprint?: string;
}

export interface EvaluationStream {
  /** resolves once the stream is fully consumed */
  done: Promise<EvaluationSummary>;
}

export class DagcheckClient {
  private readonly base: string;
  private readonly fetchImpl: FetchLike;

  constructor(base: string, fetchImpl?: FetchLike) {
    this.base = base.replace(/\/$/, "");
    this.fetchImpl = fetchImpl ?? ((url, init) => fetch(url, init));
  }

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const response = await this.fetchImpl(this.base + path, init);
    if (!response.ok) {
      const body = await response.json().catch(() => ({ detail: { code: "unknown" } }));
      throw new ApiError(response.status, (body as { detail: ApiErrorDetail }).detail);
    }
    return (await response.json()) as T;
  }

  private json(payload: unknown): RequestInit {
    return {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(payload),
    };
  }

  async createSession(dagText?: string): Promise<{ id: string; dag_fingerprint: string }> {
    return this.request("/sessions", this.json(dagText ? { text: dagText } : {}));
  }

  async getSession(id: string): Promise<SessionInfo> {
    return this.request(`/sessions/${id}`);
  }

  async getDagText(id: string): Promise<string> {
    const response = await this.fetchImpl(`${this.base}/sessions/${id}/dag`);
    if (!response.ok) {
      throw new ApiError(response.status, { code: "unknown_session" });
    }
    return response.text();
  }

  async putDag(id: string, text: string, expectedFingerprint?: string): Promise<string> {
    const body = await this.request<{ dag_fingerprint: string }>(`/sessions/${id}/dag`, {
      ...this.json({ text, expected_fingerprint: expectedFingerprint ?? null }),
      method: "PUT",
    });
    return body.dag_fingerprint;
  }

  async postEdit(id: string, edit: EditDoc, expectedFingerprint: string): Promise<string> {
    const body = await this.request<{ dag_fingerprint: string }>(
      `/sessions/${id}/edits`,
      this.json({ ...edit, expected_fingerprint: expectedFingerprint }),
    );
    return body.dag_fingerprint;
  }

  async getImplications(id: string): Promise<HypothesisSetDoc> {
    return this.request(`/sessions/${id}/implications`);
  }

  async getAdjustmentSets(id: string): Promise<AdjustmentDoc> {
    return this.request(`/sessions/${id}/adjustment-sets`);
  }

  async uploadDataset(id: string, csv: string): Promise<{ rows: number; columns: string[] }> {
    return this.request(`/sessions/${id}/dataset`, this.json({ csv }));
  }

  /**
   * Run an evaluation, invoking `onResult` as each per-claim line of the
   * NDJSON stream arrives so the panel can fill in live.
   */
  async evaluate(
    id: string,
    options: EvaluateOptions,
    onResult: (result: TestResultDoc) => void,
  ): Promise<EvaluationSummary> {
    const response = await this.fetchImpl(
      `${this.base}/sessions/${id}/evaluate`,
      this.json({
        alpha: options.alpha ?? 0.05,
        permutations: options.permutations ?? 999,
        seed: options.seed ?? 0,
        expected_fingerprint: options.expectedFingerprint ?? null,
      }),
    );
    if (!response.ok) {
      const body = await response.json().catch(() => ({ detail: { code: "unknown" } }));
      throw new ApiError(response.status, (body as { detail: ApiErrorDetail }).detail);
    }
    let summary: EvaluationSummary | null = null;
    for await (const line of ndjsonLines(response)) {
      const record = JSON.parse(line) as Record<string, unknown>;
      if ("summary" in record) {
        summary = record.summary as EvaluationSummary;
      } else if ("claim" in record) {
        onResult(record as unknown as TestResultDoc);
      }
      // the header line (dag_fingerprint + claim count) needs no handling
    }
    if (!summary) {
      throw new ApiError(502, { code: "truncated_stream" });
    }
    return summary;
  }

  async getResults(id: string): Promise<EvaluationDoc> {
    return this.request(`/sessions/${id}/results`);
  }

  async getProposals(id: string): Promise<DiagnosisDoc> {
    return this.request(`/sessions/${id}/proposals`);
  }

  async chooseProposal(id: string, index: number, expectedFingerprint: string): Promise<string> {
    const body = await this.request<{ dag_fingerprint: string }>(
      `/sessions/${id}/proposals/choice`,
      this.json({ index, expected_fingerprint: expectedFingerprint }),
    );
    return body.dag_fingerprint;
  }

  async getReport(id: string): Promise<ReportDoc> {
    return this.request(`/sessions/${id}/report`);
  }
}

/** Split a streaming (or buffered) response body into NDJSON lines. */
export async function* ndjsonLines(response: Response): AsyncGenerator<string> {
  if (response.body && typeof response.body.getReader === "function") {
    const reader = response.body.getReader();
    const decoder = new TextDecoder();
    let buffer = "";
    for (;;) {
      const { done, value } = await reader.read();
      if (done) break;
      buffer += decoder.decode(value, { stream: true });
      let index;
      while ((index = buffer.indexOf("\n")) >= 0) {
        const line = buffer.slice(0, index).trim();
        buffer = buffer.slice(index + 1);
        if (line) yield line;
      }
    }
    const rest = buffer.trim();
    if (rest) yield rest;
  } else {
    for (const line of (await response.text()).split("\n")) {
      const trimmed = line.trim();
      if (trimmed) yield trimmed;
    }
  }
}
