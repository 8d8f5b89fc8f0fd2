/**
 * DOM wiring for the workbench page: a canvas on the left, implications /
 * results / proposals panels on the right, and a journal drawer. This is
 * the only module that touches `document`; everything it renders comes
 * from the view-models in panels.ts and canvas.ts.
 */

import { ApiError, DagcheckClient } from "./api.js";
import { CanvasGraph } from "./canvas.js";
import { ImplicationsPanel, ProposalDeck, ResultsPanel } from "./panels.js";
import type { EditDoc } from "./types.js";

interface Elements {
  canvas: SVGSVGElement;
  implications: HTMLElement;
  results: HTMLElement;
  proposals: HTMLElement;
  journal: HTMLElement;
  banner: HTMLElement;
  status: HTMLElement;
}

export class Workbench {
  private readonly client: DagcheckClient;
  private readonly el: Elements;
  private sessionId = "";
  private graph: CanvasGraph | null = null;
  readonly implications = new ImplicationsPanel();
  readonly results = new ResultsPanel();
  readonly proposals = new ProposalDeck();

  constructor(client: DagcheckClient, elements: Elements) {
    this.client = client;
    this.el = elements;
  }

  async open(dagText: string): Promise<void> {
    const created = await this.client.createSession(dagText);
    this.sessionId = created.id;
    const text = await this.client.getDagText(this.sessionId);
    this.graph = new CanvasGraph(text, created.dag_fingerprint);
    await this.refreshImplications();
    this.renderCanvas();
  }

  private async refreshImplications(): Promise<void> {
    const doc = await this.client.getImplications(this.sessionId);
    this.implications.refresh(doc);
    this.renderImplications();
  }

  /** Stage an edge edit optimistically, submit, revert on refusal. */
  async submitEdit(edit: EditDoc): Promise<void> {
    if (!this.graph) return;
    const staged = this.graph.stageEdit(edit);
    this.renderCanvas();
    try {
      const fingerprint = await this.client.postEdit(this.sessionId, edit, this.graph.fingerprint);
      this.graph.commitStaged(fingerprint);
      await this.refreshImplications();
    } catch (error) {
      staged.revert();
      if (error instanceof ApiError && error.stale) {
        this.note("the graph changed elsewhere; reloading");
        await this.reloadGraph();
      } else if (error instanceof ApiError) {
        this.note(`edit refused: ${error.detail.reason ?? error.detail.code}`);
      } else {
        throw error;
      }
    }
    this.renderCanvas();
  }

  private async reloadGraph(): Promise<void> {
    const info = await this.client.getSession(this.sessionId);
    this.graph?.syncFromServer(info.dag, info.dag_fingerprint);
    await this.refreshImplications();
    this.renderCanvas();
  }

  async uploadDatasetCsv(csv: string): Promise<void> {
    const uploaded = await this.client.uploadDataset(this.sessionId, csv);
    this.note(`dataset: ${uploaded.rows} rows (${uploaded.columns.join(", ")})`);
  }

  async runEvaluation(alpha: number, seed: number): Promise<void> {
    if (!this.graph) return;
    this.results.begin(this.implications.rows.map((r) => r.claim), alpha);
    this.renderResults();
    try {
      const summary = await this.client.evaluate(
        this.sessionId,
        { alpha, seed, expectedFingerprint: this.graph.fingerprint },
        (result) => {
          this.results.accept(result);
          this.renderResults();
        },
      );
      this.results.finish(summary);
    } catch (error) {
      this.results.finish({ passed: 0, failed: 0, degenerate: 0 });
      if (error instanceof ApiError) {
        this.note(error.detail.reason ?? error.detail.code);
      } else {
        throw error;
      }
    }
    this.renderResults();
    if (this.results.summary && this.results.summary.failed > 0) {
      const diagnosis = await this.client.getProposals(this.sessionId);
      this.proposals.refresh(diagnosis);
      this.renderProposals();
    }
  }

  async acceptProposal(index: number): Promise<void> {
    if (!this.graph) return;
    this.proposals.accept(index);
    try {
      const fingerprint = await this.client.chooseProposal(
        this.sessionId, index, this.proposals.fingerprint);
      this.graph.syncFromServer(await this.client.getDagText(this.sessionId), fingerprint);
      await this.refreshImplications();
      this.renderCanvas();
      await this.appendJournal();
    } catch (error) {
      if (error instanceof ApiError && error.stale) {
        this.note("proposals were computed against a stale graph; re-evaluate");
        this.proposals.declineAll();
        this.renderProposals();
      } else {
        throw error;
      }
    }
  }

  private async appendJournal(): Promise<void> {
    const report = await this.client.getReport(this.sessionId);
    this.el.journal.textContent = report.narrative;
  }

  private note(text: string): void {
    this.el.status.textContent = text;
  }

  // -- rendering ---------------------------------------------------------

  private renderCanvas(): void {
    if (!this.graph) return;
    const svg = this.el.canvas;
    while (svg.firstChild) svg.removeChild(svg.firstChild);
    const ns = "http://www.w3.org/2000/svg";
    const byName = new Map(this.graph.nodes().map((n) => [n.name, n]));
    for (const edge of this.graph.edges()) {
      const a = byName.get(edge.from)!;
      const b = byName.get(edge.to)!;
      const line = document.createElementNS(ns, "line");
      line.setAttribute("x1", String(a.x));
      line.setAttribute("y1", String(a.y));
      line.setAttribute("x2", String(b.x));
      line.setAttribute("y2", String(b.y));
      line.setAttribute("class", edge.staged ? "edge staged" : "edge");
      line.setAttribute("marker-end", "url(#arrow)");
      svg.appendChild(line);
    }
    for (const node of this.graph.nodes()) {
      const group = document.createElementNS(ns, "g");
      group.setAttribute("transform", `translate(${node.x},${node.y})`);
      const circle = document.createElementNS(ns, "circle");
      circle.setAttribute("r", "26");
      circle.setAttribute("class",
        `node ${node.kind}${node.role ? " " + node.role : ""}`);
      const label = document.createElementNS(ns, "text");
      label.textContent = node.name;
      label.setAttribute("text-anchor", "middle");
      label.setAttribute("dy", "42");
      group.appendChild(circle);
      group.appendChild(label);
      svg.appendChild(group);
    }
  }

  private renderImplications(): void {
    const rows = this.implications.rows
      .map((r) => `<li>${r.text}</li>`)
      .join("");
    const untestable = this.implications.untestable
      .map((t) => `<li class="untestable">${t}</li>`)
      .join("");
    this.el.implications.innerHTML = `<ol>${rows}</ol><ul>${untestable}</ul>`;
  }

  private renderResults(): void {
    this.el.banner.textContent = this.results.banner();
    const rows = [...this.results.rows.values()]
      .map((r) => {
        const p = r.pValue === null ? "" : ` p=${r.pValue.toPrecision(3)}`;
        return `<li class="badge-${r.badge}">${r.text}${p}</li>`;
      })
      .join("");
    this.el.results.innerHTML = `<ul>${rows}</ul>`;
  }

  private renderProposals(): void {
    const cards = this.proposals.cards
      .map((card) => {
        const followups = card.followups
          .map((f) => `<li>${f.text}: p=${f.pValue.toPrecision(3)} (${f.decision})</li>`)
          .join("");
        return `<section class="card${card.confirmed ? " confirmed" : ""}" data-index="${card.index}">
          <h4>${card.title}</h4>
          <p>${card.mechanismLabel} — ${card.rationale}</p>
          <ul>${followups}</ul>
          <button data-accept="${card.index}">accept</button>
        </section>`;
      })
      .join("");
    const heading = this.proposals.failedClaim
      ? `<h3>failed: ${this.proposals.failedClaim}</h3>` : "";
    this.el.proposals.innerHTML = heading + cards;
    this.el.proposals.querySelectorAll("button[data-accept]").forEach((button) => {
      button.addEventListener("click", () => {
        void this.acceptProposal(Number((button as HTMLButtonElement).dataset.accept));
      });
    });
  }
}

/** Entry point used by index.html. */
export function mount(base: string): Workbench {
  const get = (id: string) => {
    const node = document.getElementById(id);
    if (!node) throw new Error(`missing #${id}`);
    return node;
  };
  return new Workbench(new DagcheckClient(base), {
    canvas: get("canvas") as unknown as SVGSVGElement,
    implications: get("implications"),
    results: get("results"),
    proposals: get("proposals"),
    journal: get("journal"),
    banner: get("banner"),
    status: get("status"),
  });
}
