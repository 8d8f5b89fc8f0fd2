/**
 * Canvas graph model: the client-side picture of the server DAG.
 *
 * Node positions are presentation state, kept out of the DAG document on
 * purpose. Edits made on the canvas are staged locally and only become
 * real when submitted through the API; a rejected submission reverts the
 * staged change with the server's reason.
 */

import { DagModel, parseDagText, serializeDagText } from "./dagtext.js";
import type { EditDoc } from "./types.js";

export interface CanvasNode {
  name: string;
  kind: "observed" | "latent";
  role: "exposure" | "outcome" | null;
  x: number;
  y: number;
}

export interface CanvasEdge {
  from: string;
  to: string;
  staged: boolean;
}

export interface StagedEdit {
  edit: EditDoc;
  revert(): void;
}

export class CanvasGraph {
  fingerprint: string;
  private model: DagModel;
  private positions: Map<string, { x: number; y: number }>;
  selection: string | null = null;
  private staged: StagedEdit | null = null;

  constructor(dagText: string, fingerprint: string,
              positions?: Map<string, { x: number; y: number }>) {
    this.model = parseDagText(dagText);
    this.fingerprint = fingerprint;
    this.positions = positions ?? layeredLayout(this.model);
  }

  /** Mirror a fresh server document, keeping positions for surviving nodes. */
  syncFromServer(dagText: string, fingerprint: string): void {
    const kept = this.positions;
    this.model = parseDagText(dagText);
    this.fingerprint = fingerprint;
    this.staged = null;
    const fresh = layeredLayout(this.model);
    this.positions = new Map(
      [...this.model.variables.keys()].map((name) => [name, kept.get(name) ?? fresh.get(name)!]),
    );
  }

  nodes(): CanvasNode[] {
    return [...this.model.variables.entries()].map(([name, kind]) => ({
      name,
      kind,
      role: this.model.exposure === name ? "exposure"
        : this.model.outcome === name ? "outcome" : null,
      ...this.positions.get(name)!,
    }));
  }

  edges(): CanvasEdge[] {
    const stagedEdit = this.staged?.edit;
    return this.model.edges.map(([from, to]) => ({
      from,
      to,
      staged: stagedEdit !== undefined && stagedEdit.from === from && stagedEdit.to === to,
    }));
  }

  moveNode(name: string, x: number, y: number): void {
    if (!this.model.variables.has(name)) throw new Error(`unknown node ${name}`);
    this.positions.set(name, { x, y });
  }

  /** The canonical document; equals the server's serialization. */
  exportText(): string {
    return serializeDagText(this.model);
  }

  get hasStagedEdit(): boolean {
    return this.staged !== null;
  }

  /**
   * Stage one structural edit locally. Returns the staged handle whose
   * `revert` undoes the optimistic change (used when the server refuses).
   */
  stageEdit(edit: EditDoc): StagedEdit {
    if (this.staged) throw new Error("an edit is already staged; submit or revert it first");
    const before = {
      edges: this.model.edges.map((e) => [...e] as [string, string]),
      variables: new Map(this.model.variables),
    };
    applyEditLocally(this.model, edit);
    const handle: StagedEdit = {
      edit,
      revert: () => {
        this.model.edges = before.edges;
        this.model.variables = before.variables;
        this.staged = null;
      },
    };
    this.staged = handle;
    return handle;
  }

  /** Server accepted the staged edit: adopt the new fingerprint. */
  commitStaged(newFingerprint: string): void {
    if (!this.staged) throw new Error("nothing staged");
    this.staged = null;
    this.fingerprint = newFingerprint;
  }

  addNode(name: string, kind: "observed" | "latent" = "observed"): void {
    if (this.model.variables.has(name)) throw new Error(`node ${name} already exists`);
    this.model.variables.set(name, kind);
    const ys = [...this.positions.values()].map((p) => p.y);
    this.positions.set(name, { x: 40, y: (ys.length ? Math.max(...ys) : 0) + 80 });
  }

  markLatent(name: string): void {
    if (!this.model.variables.has(name)) throw new Error(`unknown node ${name}`);
    this.model.variables.set(name, "latent");
    if (this.model.exposure === name) this.model.exposure = null;
    if (this.model.outcome === name) this.model.outcome = null;
  }
}

function applyEditLocally(model: DagModel, edit: EditDoc): void {
  const has = (a: string, b: string) => model.edges.some(([x, y]) => x === a && y === b);
  for (const endpoint of [edit.from, edit.to]) {
    if (!model.variables.has(endpoint)) {
      model.variables.set(endpoint, "observed");
    }
  }
  if (edit.kind === "add_edge") {
    if (has(edit.from, edit.to) || has(edit.to, edit.from)) {
      throw new Error(`edge between ${edit.from} and ${edit.to} already present`);
    }
    model.edges.push([edit.from, edit.to]);
  } else if (edit.kind === "remove_edge") {
    if (!has(edit.from, edit.to)) throw new Error(`no edge ${edit.from} -> ${edit.to}`);
    model.edges = model.edges.filter(([x, y]) => !(x === edit.from && y === edit.to));
  } else {
    if (!has(edit.from, edit.to)) throw new Error(`no edge ${edit.from} -> ${edit.to}`);
    model.edges = model.edges.filter(([x, y]) => !(x === edit.from && y === edit.to));
    model.edges.push([edit.to, edit.from]);
  }
}

/** Simple deterministic layered layout along the topological depth. */
export function layeredLayout(model: DagModel): Map<string, { x: number; y: number }> {
  const depth = new Map<string, number>();
  const parents = new Map<string, string[]>();
  for (const [src, dst] of model.edges) {
    parents.get(dst)?.push(src) ?? parents.set(dst, [src]);
  }
  const names = [...model.variables.keys()].sort();
  const resolve = (name: string, trail: Set<string>): number => {
    if (depth.has(name)) return depth.get(name)!;
    if (trail.has(name)) return 0; // cyclic input: give up gracefully
    trail.add(name);
    const ps = parents.get(name) ?? [];
    const d = ps.length ? Math.max(...ps.map((p) => resolve(p, trail))) + 1 : 0;
    depth.set(name, d);
    return d;
  };
  names.forEach((n) => resolve(n, new Set()));
  const perLayer = new Map<number, number>();
  const out = new Map<string, { x: number; y: number }>();
  for (const name of names) {
    const layer = depth.get(name)!;
    const slot = perLayer.get(layer) ?? 0;
    perLayer.set(layer, slot + 1);
    out.set(name, { x: 60 + slot * 170, y: 60 + layer * 110 });
  }
  return out;
}
