import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from dagcheck.fixtures import load_fixture
from dagcheck.graph import parse_dag


@pytest.fixture(scope="session")
def literature_dag():
    return load_fixture("literature")


@pytest.fixture(scope="session")
def data_validated_dag():
    return load_fixture("data_validated")


@pytest.fixture(scope="session")
def fire_dag():
    """The running example graph: a common cause with a chain and an
    independent cause colliding at Heat."""
    return parse_dag(
        """
        Spark -> Fire
        Spark -> Smoke
        Fire -> Heat
        Fire -> Smoke
        Smoke -> Smell
        Humidity -> Heat
        """
    )


@pytest.fixture(scope="session")
def chain_dag():
    return parse_dag("A -> B\nB -> C")


@pytest.fixture(scope="session")
def collider_dag():
    return parse_dag("A -> B\nC -> B")


@pytest.fixture(scope="session")
def diamond_dag():
    return parse_dag("A -> B\nA -> C\nB -> D\nC -> D")


def hand_event_log():
    """Hand-built repository log; the tests that consume it assert
    window-1 metrics computed by hand."""
    from datetime import datetime, timezone

    from dagcheck.repometrics import (
        CommitRecord, FileChange, IssueRecord, PullRequestRecord, RepoEventLog,
    )

    def utc(text):
        return datetime.fromisoformat(text).replace(tzinfo=timezone.utc)

    conflict_diff = (
        "diff --git a/x b/x\n<<<<<<< HEAD\nours\n=======\ntheirs\n>>>>>>> branch\n"
    )
    clean_diff = "diff --git a/x b/x\n+only additions\n"
    commits = (
        CommitRecord("c1", (), utc("2020-02-03T10:00:00"), "pr1", (
            FileChange("src/a.py", 10, 5, False),
            FileChange("tests/test_a.py", 5, 0, True),
        )),
        CommitRecord("c2", ("c1",), utc("2020-02-10T10:00:00"), "pr1", (
            FileChange("tests/test_b.py", 30, 0, True),
        )),
        CommitRecord("c3", ("c2",), utc("2020-02-15T10:00:00"), None, (
            FileChange("src/b.py", 8, 2, False),
        )),
        CommitRecord("m1", ("c1", "c2"), utc("2020-02-25T10:00:00"), None, ()),
        CommitRecord("m2", ("c3", "m1"), utc("2020-03-05T10:00:00"), None, ()),
    )
    pulls = (
        PullRequestRecord("pr1", utc("2020-02-05T00:00:00"), 2, 1),
        PullRequestRecord("pr2", utc("2020-02-20T00:00:00"), 1, 0),
    )
    issues = (
        IssueRecord("i1", utc("2020-02-07T00:00:00"), ("bug",), "crash", "boom"),
        IssueRecord("i2", utc("2020-02-09T00:00:00"), ("enhancement",), "idea", ""),
        IssueRecord("i3", utc("2020-03-10T00:00:00"), (), "quick fix for crash", ""),
        IssueRecord("i4", utc("2020-03-12T00:00:00"), (), "improve docs", ""),
    )
    return RepoEventLog(
        repo_created_at=utc("2020-01-01T00:00:00"),
        ci_adopted_at=utc("2020-02-01T00:00:00"),
        commits=commits,
        pull_requests=pulls,
        issues=issues,
        conflict_probe={"m1": conflict_diff, "m2": clean_diff},
        collected_at=utc("2021-02-01T00:00:00"),
    )
