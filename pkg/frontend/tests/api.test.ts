import { readFileSync } from "node:fs";
import { join } from "node:path";
import { describe, expect, it } from "vitest";

import { ApiError, DagcheckClient, ndjsonLines } from "../src/api.js";
import type { TestResultDoc } from "../src/types.js";

const fixture = (name: string) =>
  readFileSync(join(__dirname, "..", "fixtures", name), "utf-8");

/** Fake fetch replaying recorded responses keyed by "METHOD path". */
function fakeFetch(routes: Record<string, { status?: number; body: string }>) {
  const calls: string[] = [];
  const impl = async (url: string, init?: RequestInit): Promise<Response> => {
    const key = `${init?.method ?? "GET"} ${url}`;
    calls.push(key);
    const route = routes[key];
    if (!route) {
      return new Response(JSON.stringify({ detail: { code: "unknown_session" } }), { status: 404 });
    }
    return new Response(route.body, {
      status: route.status ?? 200,
      headers: { "content-type": "application/json" },
    });
  };
  return { impl, calls };
}

describe("DagcheckClient", () => {
  it("fetches implications as the server document", async () => {
    const body = fixture("implications_data_validated.json");
    const { impl } = fakeFetch({ "GET /sessions/s1/implications": { body } });
    const client = new DagcheckClient("", impl);
    const doc = await client.getImplications("s1");
    expect(doc.claims).toHaveLength(4);
    expect(doc.dag_fingerprint).toMatch(/^[0-9a-f]{64}$/);
    expect(doc.latent_only_pairs).toEqual([["CommitFrequency", "Communication"]]);
  });

  it("streams evaluation results one claim at a time", async () => {
    const { impl } = fakeFetch({
      "POST /sessions/s1/evaluate": { body: fixture("evaluate_stream.ndjson") },
    });
    const client = new DagcheckClient("", impl);
    const seen: TestResultDoc[] = [];
    const summary = await client.evaluate("s1", { seed: 4 }, (r) => seen.push(r));
    expect(seen).toHaveLength(10);
    expect(summary.failed + summary.passed + summary.degenerate).toBe(10);
    expect(summary.failed).toBeGreaterThan(0);
  });

  it("raises a stale-marked ApiError on 409", async () => {
    const { impl } = fakeFetch({
      "POST /sessions/s1/proposals/choice": {
        status: 409,
        body: JSON.stringify({ detail: { code: "stale_fingerprint" } }),
      },
    });
    const client = new DagcheckClient("", impl);
    await expect(client.chooseProposal("s1", 0, "old")).rejects.toSatisfy(
      (error: unknown) => error instanceof ApiError && error.stale,
    );
  });

  it("surfaces structured error details", async () => {
    const { impl } = fakeFetch({
      "POST /sessions/s1/evaluate": {
        status: 400,
        body: JSON.stringify({ detail: { code: "no_dataset", reason: "upload first" } }),
      },
    });
    const client = new DagcheckClient("", impl);
    try {
      await client.evaluate("s1", {}, () => undefined);
      expect.unreachable();
    } catch (error) {
      expect(error).toBeInstanceOf(ApiError);
      expect((error as ApiError).detail.code).toBe("no_dataset");
    }
  });

  it("applies edits with compare-and-set fingerprints", async () => {
    const { impl, calls } = fakeFetch({
      "POST /sessions/s1/edits": { body: JSON.stringify({ dag_fingerprint: "f2" }) },
    });
    const client = new DagcheckClient("", impl);
    const fingerprint = await client.postEdit(
      "s1", { kind: "add_edge", from: "A", to: "B" }, "f1");
    expect(fingerprint).toBe("f2");
    expect(calls).toEqual(["POST /sessions/s1/edits"]);
  });
});

describe("ndjsonLines", () => {
  it("splits buffered bodies into trimmed lines", async () => {
    const response = new Response('{"a": 1}\n\n{"b": 2}\n');
    const lines: string[] = [];
    for await (const line of ndjsonLines(response)) lines.push(line);
    expect(lines).toEqual(['{"a": 1}', '{"b": 2}']);
  });
});
