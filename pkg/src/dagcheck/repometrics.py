"""Build the analysis dataset from exported repository event logs.

Ingestion is file-based: one JSONL bundle per repository, with commit,
pull-request, issue, and merge-probe records (no live API crawling).
From a bundle the pipeline classifies the CI service, detects merge
conflicts from parent-diff probes, classifies bug issues, and aggregates
twelve consecutive 30-day release windows into the seven analysis
variables keyed by the same names the DAG fixtures use.
"""

from __future__ import annotations

import json
import statistics
from dataclasses import dataclass, field
from datetime import datetime, timedelta, timezone
from typing import IO, Iterable, Mapping, Optional, Sequence, Union

from .stats import DatasetTable

__all__ = [
    "MetricsError",
    "FileChange",
    "CommitRecord",
    "PullRequestRecord",
    "IssueRecord",
    "RepoEventLog",
    "ReleaseMetrics",
    "ConflictScan",
    "load_event_log",
    "detect_merge_conflicts",
    "classify_ci_service",
    "classify_bugs",
    "compute_release_metrics",
    "build_dataset",
    "VARIABLE_COLUMNS",
]

VARIABLE_COLUMNS = (
    "Age", "BugReport", "CI", "CommitFrequency",
    "Communication", "MergeConflicts", "TestsVolume",
)

WINDOW_DAYS = 30
WINDOW_COUNT = 12


class MetricsError(Exception):
    pass


def parse_instant(value: str) -> datetime:
    """RFC 3339 timestamp to an aware UTC datetime."""
    try:
        dt = datetime.fromisoformat(value.replace("Z", "+00:00"))
    except ValueError as exc:
        raise MetricsError(f"bad timestamp {value!r}") from exc
    if dt.tzinfo is None:
        raise MetricsError(f"timestamp {value!r} lacks a UTC offset")
    return dt.astimezone(timezone.utc)


@dataclass(frozen=True)
class FileChange:
    path: str
    lines_added: int
    lines_removed: int
    is_test: bool

    @property
    def lines_changed(self) -> int:
        return self.lines_added + self.lines_removed


@dataclass(frozen=True)
class CommitRecord:
    sha: str
    parents: tuple[str, ...]
    timestamp: datetime
    pull_request: Optional[str] = None
    files: tuple[FileChange, ...] = ()

    @property
    def is_merge(self) -> bool:
        return len(self.parents) > 1


@dataclass(frozen=True)
class PullRequestRecord:
    id: str
    opened_at: datetime
    comments: int
    review_comments: int

    def __post_init__(self):
        if self.comments < 0 or self.review_comments < 0:
            raise MetricsError(f"pull request {self.id!r} has negative comment counts")


@dataclass(frozen=True)
class IssueRecord:
    id: str
    created_at: datetime
    labels: tuple[str, ...] = ()
    title: str = ""
    body: str = ""


@dataclass(frozen=True)
class RepoEventLog:
    repo_created_at: datetime
    ci_adopted_at: Optional[datetime]
    commits: tuple[CommitRecord, ...]
    pull_requests: tuple[PullRequestRecord, ...]
    issues: tuple[IssueRecord, ...]
    conflict_probe: Mapping[str, str] = field(default_factory=dict)
    collected_at: Optional[datetime] = None
    # optional meta carried by the bundle: a display name for the project
    # and, for no-CI projects, the externally chosen window start
    project: Optional[str] = None
    alignment_start: Optional[datetime] = None

    def __post_init__(self):
        if self.ci_adopted_at is not None and self.ci_adopted_at < self.repo_created_at:
            raise MetricsError("ci_adopted_at precedes repository creation")
        shas = [c.sha for c in self.commits]
        if len(shas) != len(set(shas)):
            raise MetricsError("duplicate commit sha in log")
        ids = [i.id for i in self.issues]
        if len(ids) != len(set(ids)):
            raise MetricsError("duplicate issue id in log")

    @property
    def dangling_parents(self) -> tuple[str, ...]:
        """Parent shas referencing commits outside the log; flagged, not fatal."""
        known = {c.sha for c in self.commits}
        return tuple(sorted({p for c in self.commits for p in c.parents if p not in known}))

    def last_event_at(self) -> datetime:
        stamps = [self.repo_created_at]
        stamps += [c.timestamp for c in self.commits]
        stamps += [p.opened_at for p in self.pull_requests]
        stamps += [i.created_at for i in self.issues]
        if self.collected_at is not None:
            stamps.append(self.collected_at)
        return max(stamps)


def load_event_log(source: Union[str, IO[str], Iterable[str]]) -> RepoEventLog:
    """Read a JSONL bundle: one object per line with a `type` field in
    {meta, commit, pull_request, issue, conflict_probe}."""
    if isinstance(source, str):
        with open(source, "r", encoding="utf-8") as fh:
            lines = fh.readlines()
    else:
        lines = list(source)

    meta: Optional[dict] = None
    commits: list[CommitRecord] = []
    pulls: list[PullRequestRecord] = []
    issues: list[IssueRecord] = []
    probes: dict[str, str] = {}
    for lineno, raw in enumerate(lines, start=1):
        raw = raw.strip()
        if not raw:
            continue
        try:
            record = json.loads(raw)
        except json.JSONDecodeError as exc:
            raise MetricsError(f"line {lineno}: invalid JSON ({exc.msg})") from exc
        kind = record.get("type")
        if kind == "meta":
            if meta is not None:
                raise MetricsError(f"line {lineno}: duplicate meta record")
            meta = record
        elif kind == "commit":
            commits.append(CommitRecord(
                sha=record["sha"],
                parents=tuple(record.get("parents", [])),
                timestamp=parse_instant(record["timestamp"]),
                pull_request=record.get("pull_request"),
                files=tuple(
                    FileChange(f["path"], int(f["lines_added"]), int(f["lines_removed"]),
                               bool(f["is_test"]))
                    for f in record.get("files", [])
                ),
            ))
        elif kind == "pull_request":
            pulls.append(PullRequestRecord(
                id=str(record["id"]),
                opened_at=parse_instant(record["opened_at"]),
                comments=int(record.get("comments", 0)),
                review_comments=int(record.get("review_comments", 0)),
            ))
        elif kind == "issue":
            issues.append(IssueRecord(
                id=str(record["id"]),
                created_at=parse_instant(record["created_at"]),
                labels=tuple(record.get("labels", [])),
                title=record.get("title", ""),
                body=record.get("body", ""),
            ))
        elif kind == "conflict_probe":
            probes[record["sha"]] = record.get("diff", "")
        else:
            raise MetricsError(f"line {lineno}: unknown record type {kind!r}")
    if meta is None:
        raise MetricsError("bundle has no meta record")
    return RepoEventLog(
        repo_created_at=parse_instant(meta["repo_created_at"]),
        ci_adopted_at=parse_instant(meta["ci_adopted_at"]) if meta.get("ci_adopted_at") else None,
        commits=tuple(commits),
        pull_requests=tuple(pulls),
        issues=tuple(issues),
        conflict_probe=probes,
        collected_at=parse_instant(meta["collected_at"]) if meta.get("collected_at") else None,
        project=meta.get("project"),
        alignment_start=parse_instant(meta["alignment_start"]) if meta.get("alignment_start") else None,
    )


@dataclass(frozen=True)
class ConflictScan:
    """Merge commits flagged as conflicting, in commit-timestamp order;
    merge commits lacking a probe are reported unscanned, not failed."""

    flagged: tuple[str, ...]
    unscanned: tuple[str, ...]


def detect_merge_conflicts(log: RepoEventLog) -> ConflictScan:
    """Flag a commit iff it has more than one parent and the diff between
    its first two parents still carries conflict markers."""
    flagged: list[tuple[datetime, str]] = []
    unscanned: list[str] = []
    for commit in log.commits:
        if not commit.is_merge:
            continue
        probe = log.conflict_probe.get(commit.sha)
        if probe is None:
            unscanned.append(commit.sha)
            continue
        if "<<<<<<< HEAD" in probe and "<<<<<<<" in probe:
            flagged.append((commit.timestamp, commit.sha))
    flagged.sort(key=lambda pair: pair[0])
    return ConflictScan(tuple(sha for _, sha in flagged), tuple(unscanned))


_SERVICE_RULES = (
    ("travis", "travis", (".travis.yml",)),
    ("github_actions", None, ()),
    ("circle", "circle", (".circleci/config.yml",)),
    ("jenkins", None, ("Jenkinsfile",)),
    ("appveyor", None, ("appveyor.yml",)),
)


def classify_ci_service(
    files: Sequence[str],
    api_presence: Optional[Mapping[str, bool]] = None,
) -> Optional[str]:
    """First matching CI service, checked in fixed precedence order:
    travis, github_actions, circle, jenkins, appveyor; None otherwise."""
    api_presence = api_presence or {}

    def has_file(target: str) -> bool:
        return any(p == target or p.endswith("/" + target) for p in files)

    for service, api_key, markers in _SERVICE_RULES:
        if api_key is not None and api_presence.get(api_key):
            return service
        if service == "github_actions":
            if any(p.startswith(".github/workflows/") and p.endswith(".yml") for p in files):
                return service
        elif any(has_file(m) for m in markers):
            return service
    return None


def classify_bugs(
    issues: Sequence[IssueRecord],
    label_map: Mapping[str, bool],
    fallback: bool = False,
) -> set[str]:
    """Issue ids considered bug reports.

    An issue is a bug iff any of its labels maps to True; unlabeled
    issues fall back (when enabled) to a case-insensitive substring scan
    for "bug" or "fix" in the title or body.
    """
    for key in label_map:
        if key != key.lower():
            raise MetricsError(f"label_map keys must be lower-cased (got {key!r})")
    bugs: set[str] = set()
    for issue in issues:
        if issue.labels:
            if any(label_map.get(label.lower(), False) for label in issue.labels):
                bugs.add(issue.id)
        elif fallback:
            text = (issue.title + "\n" + issue.body).lower()
            if "bug" in text or "fix" in text:
                bugs.add(issue.id)
    return bugs


@dataclass(frozen=True)
class ReleaseMetrics:
    """One 30-day release window. Field names deliberately match the DAG
    variable names so dataset columns line up with fixture graphs."""

    release_index: int
    CI: int
    Age: int
    CommitFrequency: int
    Communication: float
    MergeConflicts: int
    TestsVolume: float
    BugReport: int

    def __post_init__(self):
        if not 1 <= self.release_index <= WINDOW_COUNT:
            raise MetricsError(f"release_index must be 1..{WINDOW_COUNT}")
        if not 0.0 <= self.TestsVolume <= 1.0:
            raise MetricsError("TestsVolume must be a proportion in [0, 1]")
        if self.Age < 0:
            raise MetricsError("Age must be non-negative")


def compute_release_metrics(
    log: RepoEventLog,
    bug_ids: set[str],
    conflict_shas: Sequence[str],
    is_ci_project: bool,
    alignment_start: datetime,
) -> list[ReleaseMetrics]:
    """Aggregate twelve consecutive 30-day windows from `alignment_start`.

    For CI projects the start is CI adoption; for the control group it is
    supplied externally (median-age alignment happens upstream). Raises
    when the start precedes repository creation or the log does not cover
    all twelve windows.
    """
    if alignment_start < log.repo_created_at:
        raise MetricsError("alignment_start precedes repository creation")
    span_end = alignment_start + timedelta(days=WINDOW_DAYS * WINDOW_COUNT)
    if log.last_event_at() < span_end:
        raise MetricsError(
            f"log covers history only to {log.last_event_at().isoformat()}, "
            f"short of the {WINDOW_COUNT} windows ending {span_end.isoformat()}"
        )
    conflict_times = {
        c.sha: c.timestamp for c in log.commits if c.sha in set(conflict_shas)
    }

    rows: list[ReleaseMetrics] = []
    for index in range(1, WINDOW_COUNT + 1):
        lo = alignment_start + timedelta(days=WINDOW_DAYS * (index - 1))
        hi = alignment_start + timedelta(days=WINDOW_DAYS * index)
        in_window = lambda t: lo <= t < hi  # noqa: E731

        pr_commits = sum(
            1 for c in log.commits if c.pull_request is not None and in_window(c.timestamp)
        )
        window_prs = [p for p in log.pull_requests if in_window(p.opened_at)]
        communication = (
            sum(p.comments + p.review_comments for p in window_prs) / len(window_prs)
            if window_prs else 0.0
        )
        conflicts = sum(1 for t in conflict_times.values() if in_window(t))
        ratios = []
        for c in log.commits:
            if not in_window(c.timestamp):
                continue
            changed = sum(f.lines_changed for f in c.files)
            if changed == 0:
                continue
            test_changed = sum(f.lines_changed for f in c.files if f.is_test)
            ratios.append(test_changed / changed)
        tests_volume = statistics.median(ratios) if ratios else 0.0
        bugs = sum(1 for i in log.issues if i.id in bug_ids and in_window(i.created_at))
        age_days = (hi - log.repo_created_at).days

        rows.append(ReleaseMetrics(
            release_index=index,
            CI=1 if is_ci_project else 0,
            Age=age_days,
            CommitFrequency=pr_commits,
            Communication=communication,
            MergeConflicts=conflicts,
            TestsVolume=tests_volume,
            BugReport=bugs,
        ))
    return rows


def build_dataset(rows: Mapping[str, Sequence[ReleaseMetrics]]) -> DatasetTable:
    """One dataset row per (project, release), columns named exactly as
    the DAG fixture variables."""
    if not rows:
        raise MetricsError("no release metrics supplied")
    columns: dict[str, list[float]] = {name: [] for name in VARIABLE_COLUMNS}
    seen: set[tuple[str, int]] = set()
    for project in rows:
        for row in rows[project]:
            key = (project, row.release_index)
            if key in seen:
                raise MetricsError(f"duplicate (project, release) pair {key}")
            seen.add(key)
            for name in VARIABLE_COLUMNS:
                columns[name].append(float(getattr(row, name)))
    return DatasetTable(columns)
