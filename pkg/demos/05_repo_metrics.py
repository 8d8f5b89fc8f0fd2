"""From raw repository events to an analysis-ready dataset.

Builds a small synthetic event log in memory (commits, pull requests,
issues, and merge probes), runs conflict detection and bug
classification, aggregates twelve 30-day release windows, and writes the
CSV the statistical layer consumes.

Run: python demos/05_repo_metrics.py
"""

import json
from datetime import datetime, timedelta, timezone

import numpy as np

from dagcheck.repometrics import (
    build_dataset,
    classify_bugs,
    classify_ci_service,
    compute_release_metrics,
    detect_merge_conflicts,
    load_event_log,
)


def synth_bundle(project: str, ci: bool, seed: int) -> list[str]:
    rng = np.random.default_rng(seed)
    created = datetime(2020, 1, 1, tzinfo=timezone.utc)
    adopted = created + timedelta(days=40)
    records = [{
        "type": "meta", "project": project,
        "repo_created_at": created.isoformat(),
        "collected_at": (adopted + timedelta(days=400)).isoformat(),
        **({"ci_adopted_at": adopted.isoformat()} if ci
           else {"alignment_start": adopted.isoformat()}),
    }]
    for day in range(0, 360, 3):
        stamp = adopted + timedelta(days=day, hours=int(rng.integers(0, 24)))
        sha = f"{project}-{day}"
        records.append({
            "type": "commit", "sha": sha, "parents": [f"{project}-{day - 3}"] if day else [],
            "timestamp": stamp.isoformat(), "pull_request": f"pr{day // 30}",
            "files": [{"path": "src/m.py", "lines_added": int(rng.integers(1, 50)),
                       "lines_removed": int(rng.integers(0, 20)), "is_test": False},
                      {"path": "tests/test_m.py", "lines_added": int(rng.integers(0, 30)),
                       "lines_removed": 0, "is_test": True}],
        })
    merge_day = 95
    records.append({
        "type": "commit", "sha": f"{project}-merge", "parents":
            [f"{project}-{merge_day - 2}", f"{project}-{merge_day - 5}"],
        "timestamp": (adopted + timedelta(days=merge_day)).isoformat(),
    })
    records.append({"type": "conflict_probe", "sha": f"{project}-merge",
                    "diff": "<<<<<<< HEAD\nours\n=======\ntheirs\n>>>>>>> branch\n"
                    if seed % 2 else "+clean merge\n"})
    for window in range(12):
        stamp = adopted + timedelta(days=30 * window + 1)
        records.append({"type": "pull_request", "id": f"pr{window}",
                        "opened_at": stamp.isoformat(),
                        "comments": int(rng.integers(0, 9)),
                        "review_comments": int(rng.integers(0, 5))})
        records.append({"type": "issue", "id": f"{project}-i{window}",
                        "created_at": stamp.isoformat(),
                        "labels": ["bug"] if rng.random() < 0.6 else [],
                        "title": "something broke", "body": "please fix"})
    return [json.dumps(r) for r in records]


print("CI service classification, by marker files:")
for files in ([".travis.yml"], [".github/workflows/main.yml"], ["Jenkinsfile"], ["README.md"]):
    print(f"  {files!r:40s} -> {classify_ci_service(files)}")

projects = {}
for name, ci, seed in (("kettle", True, 1), ("teapot", False, 2)):
    log = load_event_log(synth_bundle(name, ci, seed))
    scan = detect_merge_conflicts(log)
    bugs = classify_bugs(log.issues, {"bug": True}, fallback=True)
    start = log.ci_adopted_at or log.alignment_start
    projects[name] = compute_release_metrics(log, bugs, scan.flagged, ci, start)
    print(f"\n{name}: {len(log.commits)} commits, {len(bugs)} bug issues, "
          f"{len(scan.flagged)} conflicts, {len(scan.unscanned)} unscanned merges")

table = build_dataset(projects)
print(f"\nDataset: {table.row_count} rows x {len(table.columns)} columns")
print(table.to_csv().splitlines()[0])
for line in table.to_csv().splitlines()[1:4]:
    print(line)
