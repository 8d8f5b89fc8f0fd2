import { readFileSync } from "node:fs";
import { join } from "node:path";
import { describe, expect, it } from "vitest";

import { CanvasGraph, layeredLayout } from "../src/canvas.js";
import { parseDagText } from "../src/dagtext.js";

const fixture = (name: string) =>
  readFileSync(join(__dirname, "..", "fixtures", name), "utf-8");

const literature = fixture("dag_literature.txt");

describe("CanvasGraph", () => {
  it("round-trips the server document through the canvas", () => {
    // criterion: export of the canvas graph equals the server's serialized DAG
    const graph = new CanvasGraph(literature, "fp");
    expect(graph.exportText()).toBe(literature);
  });

  it("keeps positions out of the exported document", () => {
    const graph = new CanvasGraph(literature, "fp");
    graph.moveNode("Age", 500, 500);
    expect(graph.exportText()).toBe(literature);
  });

  it("shows kind and role badges", () => {
    const graph = new CanvasGraph(literature, "fp");
    const byName = new Map(graph.nodes().map((n) => [n.name, n]));
    expect(byName.get("IssueType")?.kind).toBe("latent");
    expect(byName.get("CI")?.role).toBe("exposure");
    expect(byName.get("BugReport")?.role).toBe("outcome");
    expect(byName.get("Age")?.role).toBeNull();
  });

  it("stages an edit optimistically and reverts on refusal", () => {
    const graph = new CanvasGraph(literature, "fp");
    const before = graph.exportText();
    const staged = graph.stageEdit({ kind: "add_edge", from: "Age", to: "CommitFrequency" });
    expect(graph.exportText()).not.toBe(before);
    expect(graph.edges().some((e) => e.staged)).toBe(true);
    staged.revert();
    expect(graph.exportText()).toBe(before);
    expect(graph.hasStagedEdit).toBe(false);
  });

  it("commits a staged edit and adopts the new fingerprint", () => {
    const graph = new CanvasGraph(literature, "fp");
    graph.stageEdit({ kind: "add_edge", from: "Age", to: "CommitFrequency" });
    graph.commitStaged("fp2");
    expect(graph.fingerprint).toBe("fp2");
    expect(graph.exportText()).toContain("Age -> CommitFrequency");
  });

  it("allows only one staged edit at a time", () => {
    const graph = new CanvasGraph(literature, "fp");
    graph.stageEdit({ kind: "add_edge", from: "Age", to: "CommitFrequency" });
    expect(() =>
      graph.stageEdit({ kind: "add_edge", from: "Age", to: "TestsVolume" }),
    ).toThrow(/already staged/);
  });

  it("rejects contradictory local edits with a reason", () => {
    const graph = new CanvasGraph(literature, "fp");
    expect(() => graph.stageEdit({ kind: "add_edge", from: "CI", to: "Age" }))
      .toThrow(/already present/);
    expect(() => graph.stageEdit({ kind: "remove_edge", from: "Age", to: "TestsVolume" }))
      .toThrow(/no edge/);
  });

  it("marking a node latent drops its role mark", () => {
    const graph = new CanvasGraph(literature, "fp");
    graph.markLatent("CI");
    expect(graph.exportText()).toContain("latent CI");
    expect(graph.exportText()).not.toContain("exposure CI");
  });

  it("syncs from the server, preserving surviving positions", () => {
    const graph = new CanvasGraph(literature, "fp");
    graph.moveNode("Age", 321, 123);
    graph.syncFromServer(fixture("dag_after_choice.txt"), "fp2");
    const age = graph.nodes().find((n) => n.name === "Age")!;
    expect([age.x, age.y]).toEqual([321, 123]);
    expect(graph.fingerprint).toBe("fp2");
    expect(graph.exportText()).toBe(fixture("dag_after_choice.txt"));
  });
});

describe("layeredLayout", () => {
  it("is deterministic and places every node", () => {
    const model = parseDagText(literature);
    const a = layeredLayout(model);
    const b = layeredLayout(model);
    expect([...a.entries()]).toEqual([...b.entries()]);
    expect(a.size).toBe(model.variables.size);
  });

  it("never stacks two nodes on the same point", () => {
    const layout = layeredLayout(parseDagText(literature));
    const points = [...layout.values()].map((p) => `${p.x},${p.y}`);
    expect(new Set(points).size).toBe(points.length);
  });
});
