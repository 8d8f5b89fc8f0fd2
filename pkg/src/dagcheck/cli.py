"""Command-line entry points for the whole pipeline.

Exit codes: 0 on success, 1 when validation or consistency fails, 2 for
usage errors. Diagnostics go to stderr; documents go to stdout.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from .dsep import minimal_adjustment_sets
from .graph import GraphError, parse_dag, serialize_dag, validate_dag
from .implications import implied_independencies
from .refine import refine
from .report import (
    render_hypotheses_table,
    render_json,
    render_results_table,
    render_session_narrative,
)
from .repometrics import (
    MetricsError,
    build_dataset,
    classify_bugs,
    compute_release_metrics,
    detect_merge_conflicts,
    load_event_log,
)
from .stats import DatasetTable, StatsError, TestConfig, evaluate_dag

STATE_ROOT_ENV = "DAGCHECK_STATE_ROOT"


def _read(path: str, parser: argparse.ArgumentParser) -> str:
    try:
        return Path(path).read_text("utf-8")
    except OSError as exc:
        parser.error(f"cannot read {path}: {exc.strerror}")
        raise AssertionError  # parser.error exits


def _config(args: argparse.Namespace) -> TestConfig:
    return TestConfig(alpha=args.alpha, permutations=args.permutations, rng_seed=args.seed)


def _add_test_flags(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--alpha", type=float, default=0.05)
    sub.add_argument("--permutations", type=int, default=999)
    sub.add_argument("--seed", type=int, default=0)
    sub.add_argument("--format", choices=("json", "table"), default="table")


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="dagcheck",
        description="Causal-DAG workbench: validate graphs, derive testable "
        "independence claims, test them against data, and refine the graph.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check a DAG file's structural invariants")
    p.add_argument("dagfile")

    p = sub.add_parser("implications", help="emit the DAG's testable implications")
    p.add_argument("dagfile")
    p.add_argument("--format", choices=("json", "table"), default="json")

    p = sub.add_parser("adjust", help="minimal backdoor adjustment sets for the marked exposure/outcome")
    p.add_argument("dagfile")
    p.add_argument("--exposure", help="override the DAG's exposure mark")
    p.add_argument("--outcome", help="override the DAG's outcome mark")
    p.add_argument("--format", choices=("json", "table"), default="table")

    p = sub.add_parser("test", help="test every implication against a dataset CSV")
    p.add_argument("dagfile")
    p.add_argument("dataset")
    _add_test_flags(p)

    p = sub.add_parser("refine", help="iteratively edit the DAG until the data upholds it")
    p.add_argument("dagfile")
    p.add_argument("dataset")
    _add_test_flags(p)
    p.add_argument("--interactive", action="store_true")
    p.add_argument("--max-iterations", type=int, default=25)
    p.add_argument("--emit-dag", metavar="PATH", help="write the final DAG here")

    p = sub.add_parser("ingest", help="convert repository JSONL bundles to a dataset CSV")
    p.add_argument("bundles", nargs="+", metavar="BUNDLE.jsonl")
    p.add_argument("--out", required=True, metavar="CSV")
    p.add_argument("--bug-label", action="append", default=None,
                   help="issue label marking bugs (repeatable; default: bug)")
    p.add_argument("--no-label-fallback", action="store_true",
                   help="disable the bug/fix text fallback for unlabeled issues")

    p = sub.add_parser("serve", help="start the HTTP API")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8750)
    p.add_argument("--state-root", default=None,
                   help=f"session journal directory (default ${STATE_ROOT_ENV} or ./dagcheck-state)")

    args = parser.parse_args(argv)
    try:
        return _dispatch(args, parser)
    except (GraphError, StatsError, MetricsError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def _dispatch(args: argparse.Namespace, parser: argparse.ArgumentParser) -> int:
    if args.command == "validate":
        return _cmd_validate(args, parser)
    if args.command == "implications":
        return _cmd_implications(args, parser)
    if args.command == "adjust":
        return _cmd_adjust(args, parser)
    if args.command == "test":
        return _cmd_test(args, parser)
    if args.command == "refine":
        return _cmd_refine(args, parser)
    if args.command == "ingest":
        return _cmd_ingest(args, parser)
    if args.command == "serve":
        return _cmd_serve(args)
    raise AssertionError(args.command)


def _cmd_validate(args, parser) -> int:
    text = _read(args.dagfile, parser)
    try:
        dag = parse_dag(text)
    except GraphError as exc:
        print(f"invalid: {exc}", file=sys.stderr)
        return 1
    violations = validate_dag(dag)
    if violations:
        for v in violations:
            print(str(v), file=sys.stderr)
        return 1
    print(f"valid: {len(dag.variables)} variables, {len(dag.edges)} edges, "
          f"fingerprint {dag.fingerprint[:12]}")
    return 0


def _cmd_implications(args, parser) -> int:
    dag = parse_dag(_read(args.dagfile, parser))
    hs = implied_independencies(dag)
    doc = hs.to_dict()
    sys.stdout.write(render_json(doc) if args.format == "json" else render_hypotheses_table(doc))
    return 0


def _cmd_adjust(args, parser) -> int:
    dag = parse_dag(_read(args.dagfile, parser))
    exposure = args.exposure or dag.exposure
    outcome = args.outcome or dag.outcome
    if exposure is None or outcome is None:
        parser.error("the DAG has no exposure/outcome marks; pass --exposure and --outcome")
    search = minimal_adjustment_sets(dag, exposure, outcome)
    doc = {
        "exposure": exposure,
        "outcome": outcome,
        "admissible": search.admissible,
        "sets": [sorted(s) for s in search.sets],
    }
    if args.format == "json":
        sys.stdout.write(render_json(doc))
    elif not search.admissible:
        print(f"no admissible adjustment set for {exposure} -> {outcome}")
    else:
        for s in search.sets:
            print("{" + ", ".join(sorted(s)) + "}" if s else "{} (no adjustment needed)")
    return 0 if search.admissible else 1


def _cmd_test(args, parser) -> int:
    dag = parse_dag(_read(args.dagfile, parser))
    dataset = DatasetTable.from_csv(args.dataset)
    report = evaluate_dag(dataset, dag, _config(args))
    doc = report.to_dict()
    if args.format == "json":
        sys.stdout.write(render_json(doc))
    else:
        sys.stdout.write(render_results_table(doc["results"], args.alpha))
        summary = doc["summary"]
        print(f"passed {summary['passed']}, failed {summary['failed']}, "
              f"degenerate {summary['degenerate']}")
    return 0 if report.consistent else 1


def _interactive_callback(diagnosis):
    print(f"\nFailed claim: {diagnosis.failed_claim}", file=sys.stderr)
    for i, cand in enumerate(diagnosis.candidates, start=1):
        print(f"  [{i}] {cand.mechanism}: {cand.edit}", file=sys.stderr)
        for r in cand.followup_results:
            print(f"       follow-up {r.claim}: p = {r.p_value:.6g}, {r.decision}", file=sys.stderr)
    while True:
        answer = input("choose a proposal number, or 'q' to stop: ").strip()
        if answer.lower() in ("q", "quit", ""):
            return None
        if answer.isdigit() and 1 <= int(answer) <= len(diagnosis.candidates):
            return diagnosis.candidates[int(answer) - 1]
        print("not a valid choice", file=sys.stderr)


def _cmd_refine(args, parser) -> int:
    dag = parse_dag(_read(args.dagfile, parser))
    dataset = DatasetTable.from_csv(args.dataset)
    session = refine(
        dag, dataset, _config(args),
        policy="interactive" if args.interactive else "automatic",
        decision_callback=_interactive_callback if args.interactive else None,
        max_iterations=args.max_iterations,
    )
    doc = session.to_dict()
    sys.stdout.write(render_json(doc) if args.format == "json" else render_session_narrative(doc))
    if args.emit_dag:
        Path(args.emit_dag).write_text(serialize_dag(session.final_dag), "utf-8")
    return 0 if session.status == "consistent" else 1


def _cmd_ingest(args, parser) -> int:
    labels = {name.lower(): True for name in (args.bug_label or ["bug"])}
    projects = {}
    for bundle in args.bundles:
        if not Path(bundle).exists():
            parser.error(f"cannot read {bundle}: no such file")
        log = load_event_log(bundle)
        project = log.project or Path(bundle).stem
        is_ci = log.ci_adopted_at is not None
        alignment = log.ci_adopted_at if is_ci else log.alignment_start
        if alignment is None:
            raise MetricsError(
                f"{bundle}: no-CI project needs an alignment_start in its meta record"
            )
        scan = detect_merge_conflicts(log)
        bugs = classify_bugs(log.issues, labels, fallback=not args.no_label_fallback)
        projects[project] = compute_release_metrics(log, bugs, scan.flagged, is_ci, alignment)
    table = build_dataset(projects)
    Path(args.out).write_text(table.to_csv(), "utf-8")
    print(f"wrote {table.row_count} rows x {len(table.columns)} columns to {args.out}")
    return 0


def _cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    state_root = args.state_root or os.environ.get(STATE_ROOT_ENV) or "./dagcheck-state"
    app = create_app(Path(state_root))
    uvicorn.run(app, host=args.host, port=args.port, log_level="info")
    return 0


if __name__ == "__main__":
    sys.exit(main())
