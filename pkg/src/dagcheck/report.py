"""Plain-text and JSON rendering of claims, test results, and refinement
sessions.

Renderers take the dict form produced by the domain objects' `to_dict`
methods, so the CLI and the HTTP service share one code path and emit
byte-identical documents for the same inputs.
"""

from __future__ import annotations

import json
from typing import Mapping, Sequence

__all__ = [
    "claim_text",
    "render_json",
    "render_results_table",
    "render_hypotheses_table",
    "render_session_narrative",
]


def render_json(payload) -> str:
    return json.dumps(payload, indent=2) + "\n"


def claim_text(claim: Mapping) -> str:
    base = f"{claim['x']} _||_ {claim['y']}"
    if claim.get("conditioning"):
        base += " | " + ", ".join(claim["conditioning"])
    return base


def _decision_text(result: Mapping) -> str:
    word = "reject" if result["decision"] == "reject_independence" else "fail to reject"
    if result.get("degenerate"):
        word += " (degenerate)"
    return word


def render_results_table(results: Sequence[Mapping], alpha: float) -> str:
    """Numbered hypothesis/p-value table; stars mark rejections."""
    header = f"{'#':>3}  {'Causal hypothesis':<64} {'p-value':>12}  decision"
    lines = [header, "-" * len(header)]
    for i, result in enumerate(results, start=1):
        star = "*" if result["p_value"] < alpha else " "
        lines.append(
            f"{i:>3}  {claim_text(result['claim']):<64} "
            f"{result['p_value']:>11.6g}{star}  {_decision_text(result)}"
        )
    if not results:
        lines.append("(no testable implications)")
    lines.append(f"* p < {alpha:g}")
    return "\n".join(lines) + "\n"


def render_hypotheses_table(hypothesis_set: Mapping) -> str:
    lines = [f"Testable implications of DAG {hypothesis_set['dag_fingerprint'][:12]}:"]
    for i, claim in enumerate(hypothesis_set["claims"], start=1):
        lines.append(f"{i:>3}. {claim_text(claim)}")
    if not hypothesis_set["claims"]:
        lines.append("(none)")
    for pair in hypothesis_set.get("latent_only_pairs", []):
        lines.append(f"  untestable ({pair[0]}, {pair[1]}): separable only through latent variables")
    return "\n".join(lines) + "\n"


def _render_applied(applied: Mapping, decider: str) -> list[str]:
    edit = applied["edit"]
    verb = {"add_edge": "add", "remove_edge": "remove", "reverse_edge": "reverse"}[edit["kind"]]
    lines = [
        f"  applied ({decider}, {applied['mechanism']}): "
        f"{verb} {edit['from']} -> {edit['to']}"
    ]
    for result in applied.get("followup_results", []):
        lines.append(
            f"    follow-up {claim_text(result['claim'])}: "
            f"p = {result['p_value']:.6g}, {_decision_text(result)}"
        )
    if applied.get("rationale"):
        lines.append(f"    rationale: {applied['rationale']}")
    return lines


def render_session_narrative(session: Mapping) -> str:
    """Per-step walkthrough of a refinement session dict."""
    steps = session.get("steps", [])
    edits = sum(1 for s in steps if s.get("applied"))
    lines = [
        f"Refinement session: status {session['status']} "
        f"after {edits} edit(s) over {len(steps)} evaluation(s)."
    ]
    for number, step in enumerate(steps, start=1):
        summary = step["evaluation"]["summary"]
        lines.append(
            f"Step {number} (graph {step['dag_fingerprint'][:12]}): "
            f"{summary['passed']} passed, {summary['failed']} failed, "
            f"{summary['degenerate']} degenerate."
        )
        failures = [r for r in step["evaluation"]["results"] if r["decision"] == "reject_independence"]
        if failures:
            first = failures[0]
            lines.append(
                f"  first failure: {claim_text(first['claim'])} "
                f"({first['method']}, p = {first['p_value']:.6g})"
            )
        if step.get("applied"):
            lines.extend(_render_applied(step["applied"], step.get("decider") or "auto"))
        elif failures and session["status"] == "aborted":
            lines.append("  no proposal accepted; session aborted.")
    if session.get("undetermined_edges"):
        names = ", ".join(f"{e['from']} -> {e['to']}" for e in session["undetermined_edges"])
        lines.append(f"Orientations not pinned by any tested claim: {names}.")
    return "\n".join(lines) + "\n"
