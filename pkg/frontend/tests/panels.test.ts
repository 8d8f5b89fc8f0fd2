import { readFileSync } from "node:fs";
import { join } from "node:path";
import { describe, expect, it } from "vitest";

import { ImplicationsPanel, ProposalDeck, ResultsPanel } from "../src/panels.js";
import type { DiagnosisDoc, HypothesisSetDoc, TestResultDoc } from "../src/types.js";

const fixturePath = (name: string) => join(__dirname, "..", "fixtures", name);
const fixture = (name: string) => readFileSync(fixturePath(name), "utf-8");

const hypothesisSet = JSON.parse(fixture("implications_data_validated.json")) as HypothesisSetDoc;
const diagnosis = JSON.parse(fixture("proposals.json")) as DiagnosisDoc;
const streamLines = fixture("evaluate_stream.ndjson").trim().split("\n").map((l) => JSON.parse(l));

describe("ImplicationsPanel", () => {
  it("renders one row per claim plus untestable pairs", () => {
    const panel = new ImplicationsPanel();
    panel.refresh(hypothesisSet);
    expect(panel.rows.map((r) => r.text)).toEqual([
      "Age _||_ MergeConflicts | CI, CommitFrequency",
      "BugReport _||_ MergeConflicts | CI, CommitFrequency",
      "Communication _||_ MergeConflicts | CI, CommitFrequency",
      "MergeConflicts _||_ TestsVolume | CI, CommitFrequency",
    ]);
    expect(panel.untestable).toHaveLength(1);
  });

  it("exports the panel document byte-identical to the CLI output", () => {
    // criterion: the displayed document and the command-line document are
    // the same bytes for the same graph
    const panel = new ImplicationsPanel();
    panel.refresh(hypothesisSet);
    expect(panel.exportJson(hypothesisSet)).toBe(fixture("implications_cli_data_validated.txt"));
  });
});

describe("ResultsPanel", () => {
  const results = streamLines.filter((l) => "claim" in l) as TestResultDoc[];
  const summary = streamLines[streamLines.length - 1].summary;

  it("fills in rows as the stream arrives", () => {
    const panel = new ResultsPanel();
    panel.begin(results.map((r) => r.claim), 0.05);
    expect(panel.pendingCount).toBe(results.length);
    panel.accept(results[0]);
    expect(panel.pendingCount).toBe(results.length - 1);
    results.slice(1).forEach((r) => panel.accept(r));
    expect(panel.pendingCount).toBe(0);
    panel.finish(summary);
    expect(panel.banner()).toContain("failed");
  });

  it("badges rejections as failures at alpha", () => {
    const panel = new ResultsPanel();
    panel.begin(results.map((r) => r.claim), 0.05);
    results.forEach((r) => panel.accept(r));
    const failed = panel.failedRows.map((r) => r.text);
    const expected = results
      .filter((r) => r.decision === "reject_independence")
      .map((r) => `${r.claim.x} _||_ ${r.claim.y} | ${r.claim.conditioning.join(", ")}`);
    expect(failed).toEqual(expected);
  });

  it("is deterministic for a replayed stream", () => {
    const run = () => {
      const panel = new ResultsPanel();
      panel.begin(results.map((r) => r.claim), 0.05);
      results.forEach((r) => panel.accept(r));
      panel.finish(summary);
      return JSON.stringify([...panel.rows.values()]) + panel.banner();
    };
    expect(run()).toBe(run());
  });
});

describe("ProposalDeck", () => {
  it("builds one card per candidate with followup results", () => {
    const deck = new ProposalDeck();
    deck.refresh(diagnosis);
    expect(deck.cards).toHaveLength(diagnosis.candidates.length);
    expect(deck.failedClaim).toBeTruthy();
    for (const [i, card] of deck.cards.entries()) {
      expect(card.followups).toHaveLength(diagnosis.candidates[i].followup_results.length);
    }
  });

  it("allows exactly one accept per refinement step", () => {
    const deck = new ProposalDeck();
    deck.refresh(diagnosis);
    deck.accept(0);
    expect(deck.acceptedIndex).toBe(0);
    expect(() => deck.accept(1)).toThrow(/already accepted/);
    deck.refresh(diagnosis); // next step: accepting again is fine
    expect(() => deck.accept(1)).not.toThrow();
  });

  it("declining all clears the deck", () => {
    const deck = new ProposalDeck();
    deck.refresh(diagnosis);
    deck.declineAll();
    expect(deck.cards).toHaveLength(0);
    expect(deck.acceptedIndex).toBeNull();
  });

  it("marks candidates confirmed only when every followup passes", () => {
    const deck = new ProposalDeck();
    deck.refresh(diagnosis);
    for (const [i, card] of deck.cards.entries()) {
      const followups = diagnosis.candidates[i].followup_results;
      const expected = followups.length > 0 &&
        followups.every((r) => r.decision === "fail_to_reject");
      expect(card.confirmed).toBe(expected);
    }
  });
});
