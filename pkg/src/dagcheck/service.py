"""JSON-over-HTTP API exposing the pipeline for scripts and the workbench UI.

Sessions hold a DAG, optionally a dataset, and a journal of evaluations and
applied edits. Every response carries the dag_fingerprint it was computed
against; mutations are compare-and-set on that fingerprint, so a client
editing a stale graph gets 409 instead of clobbering newer state. Session
journals persist as JSON files under a state root and are replayed on
startup.
"""

from __future__ import annotations

import io
import json
import threading
import uuid
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterator, Optional

from fastapi import FastAPI, HTTPException
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import PlainTextResponse, StreamingResponse
from pydantic import BaseModel, Field

from .graph import CausalDag, DagEdit, GraphError, parse_dag, serialize_dag
from .implications import implied_independencies
from .dsep import minimal_adjustment_sets
from .refine import FailureDiagnosis, apply_edit, diagnose_failure
from .report import render_session_narrative
from .stats import DatasetTable, StatsError, TestCache, TestConfig, evaluate_dag

__all__ = ["create_app"]


class DagDocument(BaseModel):
    text: str
    expected_fingerprint: Optional[str] = None


class EditRequest(BaseModel):
    kind: str
    from_: str = Field(alias="from")
    to: str
    rationale: str = ""
    expected_fingerprint: Optional[str] = None

    model_config = {"populate_by_name": True}


class DatasetUpload(BaseModel):
    csv: str


class EvaluateRequest(BaseModel):
    alpha: float = 0.05
    permutations: int = 999
    seed: int = 0
    expected_fingerprint: Optional[str] = None


class ChoiceRequest(BaseModel):
    index: int
    expected_fingerprint: str


@dataclass
class Session:
    id: str
    dag: CausalDag
    dataset: Optional[DatasetTable] = None
    journal: list[dict] = field(default_factory=list)
    evaluations: dict[tuple[str, str, str], dict] = field(default_factory=dict)
    last_evaluation: Optional[dict] = None
    last_config: Optional[TestConfig] = None
    pending: Optional[FailureDiagnosis] = None
    pending_fingerprint: Optional[str] = None
    cache: TestCache = field(default_factory=TestCache)
    lock: threading.Lock = field(default_factory=threading.Lock)


def _config_from(req: EvaluateRequest) -> TestConfig:
    return TestConfig(alpha=req.alpha, permutations=req.permutations, rng_seed=req.seed)


def create_app(state_root: Path) -> FastAPI:
    state_root = Path(state_root)
    state_root.mkdir(parents=True, exist_ok=True)
    app = FastAPI(title="dagcheck", version="0.1.0")
    # the workbench page is served statically, often from another origin
    app.add_middleware(
        CORSMiddleware, allow_origins=["*"], allow_methods=["*"], allow_headers=["*"],
    )
    sessions: dict[str, Session] = {}

    # -- persistence -------------------------------------------------------

    def _persist(session: Session) -> None:
        payload = {
            "id": session.id,
            "dag": serialize_dag(session.dag),
            "dataset_csv": session.dataset.to_csv() if session.dataset is not None else None,
            "journal": session.journal,
        }
        path = state_root / f"{session.id}.json"
        tmp = path.with_suffix(".json.tmp")
        tmp.write_text(json.dumps(payload, indent=2), "utf-8")
        tmp.replace(path)

    def _restore() -> None:
        for path in sorted(state_root.glob("*.json")):
            payload = json.loads(path.read_text("utf-8"))
            session = Session(id=payload["id"], dag=parse_dag(payload["dag"]))
            if payload.get("dataset_csv"):
                session.dataset = DatasetTable.from_csv(io.StringIO(payload["dataset_csv"]))
            session.journal = payload.get("journal", [])
            sessions[session.id] = session

    _restore()

    def _get(session_id: str) -> Session:
        if session_id not in sessions:
            raise HTTPException(404, detail={"code": "unknown_session", "id": session_id})
        return sessions[session_id]

    def _check_fingerprint(session: Session, expected: Optional[str]) -> None:
        if expected is not None and expected != session.dag.fingerprint:
            raise HTTPException(409, detail={
                "code": "stale_fingerprint",
                "expected": expected,
                "actual": session.dag.fingerprint,
            })

    def _parse(text: str) -> CausalDag:
        try:
            return parse_dag(text)
        except GraphError as exc:
            raise HTTPException(400, detail={"code": "invalid_dag", "reason": str(exc)})

    # -- sessions ----------------------------------------------------------

    @app.post("/sessions", status_code=201)
    def create_session(doc: Optional[DagDocument] = None):
        dag = _parse(doc.text) if doc is not None and doc.text else CausalDag()
        session = Session(id=uuid.uuid4().hex[:12], dag=dag)
        sessions[session.id] = session
        session.journal.append({"event": "created", "dag": serialize_dag(dag)})
        _persist(session)
        return {"id": session.id, "dag_fingerprint": dag.fingerprint}

    @app.get("/sessions")
    def list_sessions():
        return {
            "sessions": [
                {"id": s.id, "dag_fingerprint": s.dag.fingerprint, "has_dataset": s.dataset is not None}
                for s in sessions.values()
            ]
        }

    @app.get("/sessions/{session_id}")
    def get_session(session_id: str):
        s = _get(session_id)
        return {
            "id": s.id,
            "dag_fingerprint": s.dag.fingerprint,
            "dag": serialize_dag(s.dag),
            "has_dataset": s.dataset is not None,
            "journal_length": len(s.journal),
        }

    @app.get("/sessions/{session_id}/dag", response_class=PlainTextResponse)
    def get_dag(session_id: str):
        return serialize_dag(_get(session_id).dag)

    @app.put("/sessions/{session_id}/dag")
    def put_dag(session_id: str, doc: DagDocument):
        s = _get(session_id)
        with s.lock:
            _check_fingerprint(s, doc.expected_fingerprint)
            dag = _parse(doc.text)
            s.dag = dag
            s.pending = None
            s.journal.append({"event": "dag_replaced", "dag": serialize_dag(dag)})
            _persist(s)
        return {"dag_fingerprint": dag.fingerprint}

    @app.post("/sessions/{session_id}/edits")
    def post_edit(session_id: str, req: EditRequest):
        s = _get(session_id)
        with s.lock:
            _check_fingerprint(s, req.expected_fingerprint)
            edit = DagEdit(req.kind, req.from_, req.to, req.rationale)  # type: ignore[arg-type]
            try:
                s.dag = apply_edit(s.dag, edit)
            except GraphError as exc:
                raise HTTPException(400, detail={"code": "invalid_edit", "reason": str(exc)})
            s.pending = None
            s.journal.append({
                "event": "edit",
                "edit": {"kind": edit.kind, "from": edit.src, "to": edit.dst},
                "decider": "human",
            })
            _persist(s)
        return {"dag_fingerprint": s.dag.fingerprint}

    # -- analysis ----------------------------------------------------------

    @app.get("/sessions/{session_id}/implications")
    def get_implications(session_id: str):
        s = _get(session_id)
        return implied_independencies(s.dag).to_dict()

    @app.get("/sessions/{session_id}/adjustment-sets")
    def get_adjustment_sets(session_id: str):
        s = _get(session_id)
        if s.dag.exposure is None or s.dag.outcome is None:
            raise HTTPException(400, detail={"code": "no_marks",
                                             "reason": "the DAG carries no exposure/outcome marks"})
        search = minimal_adjustment_sets(s.dag, s.dag.exposure, s.dag.outcome)
        return {
            "dag_fingerprint": s.dag.fingerprint,
            "exposure": s.dag.exposure,
            "outcome": s.dag.outcome,
            "admissible": search.admissible,
            "sets": [sorted(z) for z in search.sets],
        }

    @app.post("/sessions/{session_id}/dataset")
    def post_dataset(session_id: str, upload: DatasetUpload):
        s = _get(session_id)
        with s.lock:
            try:
                s.dataset = DatasetTable.from_csv(io.StringIO(upload.csv))
            except StatsError as exc:
                raise HTTPException(400, detail={"code": "invalid_dataset", "reason": str(exc)})
            s.journal.append({"event": "dataset", "digest": s.dataset.digest,
                              "rows": s.dataset.row_count})
            _persist(s)
        return {
            "rows": s.dataset.row_count,
            "columns": list(s.dataset.columns),
            "dropped_rows": s.dataset.dropped_rows,
            "digest": s.dataset.digest,
        }

    @app.post("/sessions/{session_id}/evaluate")
    def post_evaluate(session_id: str, req: EvaluateRequest):
        s = _get(session_id)
        with s.lock:
            _check_fingerprint(s, req.expected_fingerprint)
            if s.dataset is None:
                raise HTTPException(400, detail={"code": "no_dataset",
                                                 "reason": "upload a dataset before evaluating"})
            config = _config_from(req)
            key = (s.dag.fingerprint, s.dataset.digest, config.digest)
            if key in s.evaluations:
                doc = s.evaluations[key]
            else:
                try:
                    report = evaluate_dag(s.dataset, s.dag, config, s.cache)
                except StatsError as exc:
                    raise HTTPException(400, detail={"code": "evaluation_failed", "reason": str(exc)})
                doc = report.to_dict()
                s.evaluations[key] = doc
                s.journal.append({"event": "evaluation", "dag_fingerprint": s.dag.fingerprint,
                                  "config": {"alpha": config.alpha, "permutations": config.permutations,
                                             "seed": config.rng_seed},
                                  "report": doc})
                _persist(s)
            s.last_evaluation = doc
            s.last_config = config
            s.pending = None
            s.pending_fingerprint = None

        def stream() -> Iterator[str]:
            yield json.dumps({"dag_fingerprint": doc["dag_fingerprint"],
                              "claims": len(doc["results"])}) + "\n"
            for result in doc["results"]:
                yield json.dumps(result) + "\n"
            yield json.dumps({"summary": doc["summary"]}) + "\n"

        return StreamingResponse(stream(), media_type="application/x-ndjson")

    @app.get("/sessions/{session_id}/results")
    def get_results(session_id: str):
        s = _get(session_id)
        if s.last_evaluation is None:
            raise HTTPException(404, detail={"code": "no_evaluation"})
        return s.last_evaluation

    # -- refinement --------------------------------------------------------

    @app.get("/sessions/{session_id}/proposals")
    def get_proposals(session_id: str):
        s = _get(session_id)
        with s.lock:
            if s.last_evaluation is None or s.last_config is None:
                raise HTTPException(400, detail={"code": "no_evaluation",
                                                 "reason": "run an evaluation first"})
            if s.last_evaluation["dag_fingerprint"] != s.dag.fingerprint:
                raise HTTPException(409, detail={"code": "stale_evaluation",
                                                 "reason": "the graph changed since the last evaluation"})
            failures = [r for r in s.last_evaluation["results"]
                        if r["decision"] == "reject_independence"]
            if not failures:
                return {"dag_fingerprint": s.dag.fingerprint, "failed_claim": None, "candidates": []}
            if s.pending is None or s.pending_fingerprint != s.dag.fingerprint:
                from .implications import IndependenceClaim

                claim = IndependenceClaim.from_dict(failures[0]["claim"])
                s.pending = diagnose_failure(s.dag, claim, s.dataset, s.last_config, s.cache)
                s.pending_fingerprint = s.dag.fingerprint
            doc = s.pending.to_dict()
            doc["dag_fingerprint"] = s.dag.fingerprint
            return doc

    @app.post("/sessions/{session_id}/proposals/choice")
    def post_choice(session_id: str, req: ChoiceRequest):
        s = _get(session_id)
        with s.lock:
            _check_fingerprint(s, req.expected_fingerprint)
            if s.pending is None or s.pending_fingerprint != s.dag.fingerprint:
                raise HTTPException(409, detail={"code": "no_pending_proposals",
                                                 "reason": "diagnosis was not computed for this graph"})
            if not 0 <= req.index < len(s.pending.candidates):
                raise HTTPException(400, detail={"code": "bad_choice_index"})
            proposal = s.pending.candidates[req.index]
            try:
                s.dag = apply_edit(s.dag, proposal.edit)
            except GraphError as exc:
                raise HTTPException(400, detail={"code": "invalid_edit", "reason": str(exc)})
            s.journal.append({"event": "choice", "applied": proposal.to_dict(), "decider": "human",
                              "dag_fingerprint": s.dag.fingerprint})
            s.pending = None
            s.pending_fingerprint = None
            _persist(s)
        return {"dag_fingerprint": s.dag.fingerprint}

    @app.get("/sessions/{session_id}/report")
    def get_report(session_id: str):
        s = _get(session_id)
        session_doc = journal_to_session_dict(s.journal, serialize_dag(s.dag))
        return {
            "dag_fingerprint": s.dag.fingerprint,
            "narrative": render_session_narrative(session_doc),
            "session": session_doc,
        }

    return app


def journal_to_session_dict(journal: list[dict], final_dag_text: str) -> dict:
    """Reshape a service journal into the session dict the narrative
    renderer consumes; the CLI renders its sessions through the same
    function, which is what keeps the two surfaces byte-identical."""
    steps: list[dict] = []
    evaluation: Optional[dict] = None
    fingerprint: Optional[str] = None
    initial = None
    for event in journal:
        kind = event.get("event")
        if kind == "created" and initial is None:
            initial = event.get("dag")
        elif kind == "evaluation":
            if evaluation is not None:
                steps.append({"dag_fingerprint": fingerprint, "evaluation": evaluation,
                              "applied": None, "decider": None})
            evaluation = event["report"]
            fingerprint = event["dag_fingerprint"]
        elif kind == "choice" and evaluation is not None:
            steps.append({"dag_fingerprint": fingerprint, "evaluation": evaluation,
                          "applied": event["applied"], "decider": event.get("decider", "human")})
            evaluation = None
            fingerprint = None
    if evaluation is not None:
        steps.append({"dag_fingerprint": fingerprint, "evaluation": evaluation,
                      "applied": None, "decider": None})
    if not steps:
        status = "new"
    elif steps[-1]["applied"] is None and steps[-1]["evaluation"]["summary"]["failed"] == 0:
        status = "consistent"
    else:
        status = "in_progress"
    return {
        "status": status,
        "initial_dag": initial or final_dag_text,
        "final_dag": final_dag_text,
        "steps": steps,
        "undetermined_edges": [],
    }
