"""Guess-and-test refinement: diagnose failed implications, propose
single-edge structural edits, test the follow-up claims each edit entails,
and iterate until graph and data agree.

A failed claim "x independent of y given Z" means the data shows a
dependence the graph says should not exist. Three explanations are
entertained, in order:

* a collider on an x-y path is really a mediator (reorient one of its
  incoming edges); confirmed if the claim holds once the collider joins
  the conditioning set,
* a conditioned mediator/fork on an x-y path is really a collider
  (reorient its outgoing edge); confirmed if the claim holds without it,
* the variables are directly related (add an edge, oriented along the
  current topological order) — the fallback when nothing else survives.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Literal, Optional

from .dsep import Path, enumerate_paths, is_d_separated, path_status
from .graph import CausalDag, CycleError, DagEdit, Edge, GraphError, UnknownVariableError
from .implications import IndependenceClaim
from .stats import DatasetTable, EvaluationReport, TestCache, TestConfig, TestResult, derive_seed, evaluate_dag
from dataclasses import replace as _replace

__all__ = [
    "Mechanism",
    "EditProposal",
    "FailureDiagnosis",
    "RefinementStep",
    "RefinementSession",
    "apply_edit",
    "diagnose_failure",
    "refine",
]

Mechanism = Literal["collider_to_chain", "chain_to_collider", "add_direct_edge", "reverse_edge"]
_MECHANISM_ORDER = {"collider_to_chain": 0, "chain_to_collider": 1, "add_direct_edge": 2, "reverse_edge": 3}


@dataclass(frozen=True)
class EditProposal:
    edit: DagEdit
    mechanism: Mechanism
    followup_claims: tuple[IndependenceClaim, ...]
    rationale: str
    followup_results: tuple[TestResult, ...] = ()

    @property
    def confirmed(self) -> bool:
        """All follow-up tests ran and none rejected independence."""
        return bool(self.followup_results) and all(
            r.decision == "fail_to_reject" for r in self.followup_results
        )

    def to_dict(self) -> dict:
        return {
            "edit": {"kind": self.edit.kind, "from": self.edit.src, "to": self.edit.dst},
            "mechanism": self.mechanism,
            "rationale": self.rationale,
            "followup_claims": [c.to_dict() for c in self.followup_claims],
            "followup_results": [r.to_dict() for r in self.followup_results],
        }


@dataclass(frozen=True)
class FailureDiagnosis:
    failed_claim: IndependenceClaim
    connecting_paths: tuple[Path, ...]
    candidates: tuple[EditProposal, ...]

    def to_dict(self) -> dict:
        return {
            "failed_claim": self.failed_claim.to_dict(),
            "connecting_paths": [str(p) for p in self.connecting_paths],
            "candidates": [c.to_dict() for c in self.candidates],
        }


def apply_edit(dag: CausalDag, edit: DagEdit) -> CausalDag:
    """Apply a single structural edit, failing atomically.

    Raises UnknownVariableError for undeclared endpoints, CycleError when
    the edit would close a directed cycle, and GraphError for duplicate
    additions or removals of absent edges.
    """
    for name in (edit.src, edit.dst):
        if name not in dag:
            raise UnknownVariableError(name)
    if edit.src == edit.dst:
        raise GraphError("edit endpoints must differ")
    edges = list(dag.edges)
    if edit.kind == "add_edge":
        if dag.has_edge(edit.src, edit.dst):
            raise GraphError(f"edge {edit.src} -> {edit.dst} already present")
        if dag.has_edge(edit.dst, edit.src):
            raise GraphError(f"reverse edge {edit.dst} -> {edit.src} already present")
        edges.append(Edge(edit.src, edit.dst))
    elif edit.kind == "remove_edge":
        if not dag.has_edge(edit.src, edit.dst):
            raise GraphError(f"no edge {edit.src} -> {edit.dst} to remove")
        edges.remove(Edge(edit.src, edit.dst))
    elif edit.kind == "reverse_edge":
        if not dag.has_edge(edit.src, edit.dst):
            raise GraphError(f"no edge {edit.src} -> {edit.dst} to reverse")
        edges.remove(Edge(edit.src, edit.dst))
        edges.append(Edge(edit.dst, edit.src))
    else:
        raise GraphError(f"unknown edit kind {edit.kind!r}")
    new = dag.replace_edges(edges)
    new.topological_order()  # raises CycleError before the edit escapes
    return new


def _still_implied(dag: CausalDag, claim: IndependenceClaim) -> bool:
    if dag.adjacent(claim.x, claim.y):
        return False
    return is_d_separated(dag, {claim.x}, {claim.y}, set(claim.conditioning))


def _try_edit(dag: CausalDag, edit: DagEdit, claim: IndependenceClaim) -> bool:
    """A candidate is sound only if it yields a DAG and genuinely explains
    the observed dependence (the failed claim stops being implied)."""
    try:
        edited = apply_edit(dag, edit)
    except (CycleError, GraphError):
        return False
    return not _still_implied(edited, claim)


def diagnose_failure(
    dag: CausalDag,
    failed: IndependenceClaim,
    dataset: DatasetTable,
    config: TestConfig,
    cache: Optional[TestCache] = None,
) -> FailureDiagnosis:
    """Candidate edits for one rejected claim, each with the follow-up
    tests that would confirm it, ordered by mechanism then edge."""
    x, y = failed.x, failed.y
    if dag.adjacent(x, y):
        raise GraphError(f"claim {failed} is not implied: {x!r} and {y!r} are adjacent")
    if not _still_implied(dag, failed):
        raise GraphError(f"claim {failed} is not implied by the graph")
    cache = cache if cache is not None else TestCache()
    z = frozenset(failed.conditioning)
    observed = set(dag.observed)

    proposals: dict[tuple[Mechanism, DagEdit], tuple[IndependenceClaim, str, Path]] = {}
    paths_used: list[Path] = []

    for p in enumerate_paths(dag, x, y):
        inner = p.nodes[1:-1]
        if not inner:
            continue
        colliders = [
            v for i, v in enumerate(inner, start=1)
            if p.directions[i - 1] == "forward" and p.directions[i] == "backward"
        ]
        status = path_status(dag, p, z)
        unopened = [c for c in colliders if c in status.blocking_nodes]
        conditioned = [b for b in status.blocking_nodes if b not in colliders]

        if len(unopened) == 1 and not conditioned:
            # blocked only at one collider: a reorientation there opens it
            c = unopened[0]
            if c not in observed:
                continue
            followup = IndependenceClaim(x, y, z | {c})
            i = p.nodes.index(c)
            for other in (p.nodes[i - 1], p.nodes[i + 1]):
                edit = DagEdit("reverse_edge", other, c,
                               rationale=f"treat {c} as a mediator rather than a collider on {p}")
                key = ("collider_to_chain", edit)
                if key not in proposals and _try_edit(dag, edit, failed):
                    proposals[key] = (
                        followup,
                        f"path {p} is blocked only at the collider {c}; if {c} mediates, "
                        f"conditioning on it should restore the independence",
                        p,
                    )
        elif len(conditioned) == 1 and not unopened:
            # blocked only by one conditioned mediator/fork: as a collider,
            # conditioning on it would have opened this very path
            m = conditioned[0]
            followup = IndependenceClaim(x, y, z - {m})
            i = p.nodes.index(m)
            for j, other in ((i - 1, p.nodes[i - 1]), (i, p.nodes[i + 1])):
                if p.directions[j] == ("backward" if j == i - 1 else "forward"):
                    edit = DagEdit("reverse_edge", m, other,
                                   rationale=f"treat {m} as a collider rather than a mediator on {p}")
                    key = ("chain_to_collider", edit)
                    if key not in proposals and _try_edit(dag, edit, failed):
                        proposals[key] = (
                            followup,
                            f"path {p} is blocked only because {m} is conditioned on; if {m} "
                            f"collides, the variables should be independent without it",
                            p,
                        )

    order = dag.topological_order()
    src, dst = (x, y) if order.index(x) < order.index(y) else (y, x)
    direct = DagEdit("add_edge", src, dst, rationale="persistent dependence not explained by reorientation")

    candidates: list[EditProposal] = []
    for (mechanism, edit), (followup, why, path) in proposals.items():
        followups = (followup,) if set(followup.conditioning) <= observed else ()
        candidates.append(EditProposal(edit, mechanism, followups, why))
        paths_used.append(path)
    candidates.append(EditProposal(
        direct, "add_direct_edge", (),
        f"no tested structure explains the dependence; relate {src} and {dst} directly",
    ))
    candidates.sort(key=lambda c: (_MECHANISM_ORDER[c.mechanism], c.edit.src, c.edit.dst))

    tested = tuple(
        _replace(c, followup_results=tuple(
            cache.get_or_run(dataset, fc, _replace(config, rng_seed=derive_seed(config.rng_seed, fc)))
            for fc in c.followup_claims
        ))
        for c in candidates
    )
    unique_paths = sorted(set(paths_used), key=lambda p: p.nodes)
    return FailureDiagnosis(failed, tuple(unique_paths), tested)


@dataclass(frozen=True)
class RefinementStep:
    dag_fingerprint: str
    evaluation: EvaluationReport
    applied: Optional[EditProposal]
    decider: Optional[Literal["auto", "human"]]

    def to_dict(self) -> dict:
        return {
            "dag_fingerprint": self.dag_fingerprint,
            "evaluation": self.evaluation.to_dict(),
            "applied": self.applied.to_dict() if self.applied else None,
            "decider": self.decider,
        }


@dataclass(frozen=True)
class RefinementSession:
    initial_dag: CausalDag
    final_dag: CausalDag
    steps: tuple[RefinementStep, ...]
    status: Literal["consistent", "exhausted", "aborted"]
    undetermined_edges: tuple[Edge, ...] = ()

    def edits(self) -> tuple[DagEdit, ...]:
        return tuple(s.applied.edit for s in self.steps if s.applied is not None)

    def replay(self) -> CausalDag:
        dag = self.initial_dag
        for edit in self.edits():
            dag = apply_edit(dag, edit)
        return dag

    def to_dict(self) -> dict:
        from .graph import serialize_dag

        return {
            "status": self.status,
            "initial_dag": serialize_dag(self.initial_dag),
            "final_dag": serialize_dag(self.final_dag),
            "steps": [s.to_dict() for s in self.steps],
            "undetermined_edges": [{"from": e.src, "to": e.dst} for e in self.undetermined_edges],
        }


def _covered_edges(dag: CausalDag) -> tuple[Edge, ...]:
    """Edges whose reversal yields a Markov-equivalent graph: no implied
    claim distinguishes the two orientations."""
    out = []
    for e in dag.edges:
        if dag.parents(e.dst) - {e.src} == dag.parents(e.src):
            out.append(e)
    return tuple(out)


DecisionCallback = Callable[[FailureDiagnosis], Optional[EditProposal]]


def refine(
    dag: CausalDag,
    dataset: DatasetTable,
    config: TestConfig,
    policy: Literal["automatic", "interactive"] = "automatic",
    decision_callback: Optional[DecisionCallback] = None,
    max_iterations: int = 25,
    cache: Optional[TestCache] = None,
) -> RefinementSession:
    """Iterate evaluate -> diagnose -> edit until every implication passes.

    Automatic policy takes the first candidate whose follow-up claims all
    pass, falling back to the direct edge; interactive policy defers each
    choice to `decision_callback` (returning None aborts). Journaled,
    deterministic for fixed inputs, and capped at `max_iterations` edits.
    """
    if policy == "interactive" and decision_callback is None:
        raise GraphError("interactive refinement needs a decision callback")
    cache = cache if cache is not None else TestCache()
    current = dag
    steps: list[RefinementStep] = []
    status: str = "exhausted"

    for iteration in range(max_iterations + 1):
        report = evaluate_dag(dataset, current, config, cache)
        if report.failed == 0:
            steps.append(RefinementStep(current.fingerprint, report, None, None))
            status = "consistent"
            break
        if iteration == max_iterations:
            steps.append(RefinementStep(current.fingerprint, report, None, None))
            status = "exhausted"
            break
        failed_claim = report.failures()[0].claim
        diagnosis = diagnose_failure(current, failed_claim, dataset, config, cache)
        if policy == "automatic":
            chosen = next((c for c in diagnosis.candidates if c.followup_claims and c.confirmed), None)
            if chosen is None:
                chosen = next(c for c in diagnosis.candidates if c.mechanism == "add_direct_edge")
            decider: Literal["auto", "human"] = "auto"
        else:
            picked = decision_callback(diagnosis)
            if picked is None:
                steps.append(RefinementStep(current.fingerprint, report, None, "human"))
                status = "aborted"
                break
            chosen = picked
            decider = "human"
        steps.append(RefinementStep(current.fingerprint, report, chosen, decider))
        current = apply_edit(current, chosen.edit)

    return RefinementSession(
        initial_dag=dag,
        final_dag=current,
        steps=tuple(steps),
        status=status,  # type: ignore[arg-type]
        undetermined_edges=_covered_edges(current),
    )
