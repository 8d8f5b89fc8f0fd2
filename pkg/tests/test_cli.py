import json

import pytest

from dagcheck.cli import main
from dagcheck.fixtures import load_fixture
from dagcheck.stats import DatasetTable
from dagcheck.synth import simulate_linear_gaussian

LIT = "fixtures/literature.dag"
DV = "fixtures/data_validated.dag"


@pytest.fixture(scope="module")
def consistent_csv(tmp_path_factory):
    data = simulate_linear_gaussian(load_fixture("data_validated"), 150, rng_seed=4)
    path = tmp_path_factory.mktemp("data") / "consistent.csv"
    path.write_text(data.to_csv(), "utf-8")
    return str(path)


class TestValidate:
    def test_valid_fixture(self, capsys):
        assert main(["validate", LIT]) == 0
        assert "valid:" in capsys.readouterr().out

    def test_cyclic_file_exits_one(self, tmp_path, capsys):
        bad = tmp_path / "cyclic.dag"
        bad.write_text("A -> B\nB -> C\nC -> A\n", "utf-8")
        assert main(["validate", str(bad)]) == 1
        assert "cycle" in capsys.readouterr().err

    def test_missing_file_is_usage_error(self):
        with pytest.raises(SystemExit) as exc:
            main(["validate", "no/such/file.dag"])
        assert exc.value.code == 2


class TestImplications:
    def test_data_validated_prints_four_claims(self, capsys):
        assert main(["implications", DV]) == 0
        doc = json.loads(capsys.readouterr().out)
        assert len(doc["claims"]) == 4

    def test_table_format(self, capsys):
        assert main(["implications", LIT, "--format", "table"]) == 0
        out = capsys.readouterr().out
        assert "Testable implications" in out
        assert " 10. " in out


class TestAdjust:
    def test_literature_marked_pair(self, capsys):
        assert main(["adjust", LIT]) == 0
        assert "{Age}" in capsys.readouterr().out

    def test_json_format(self, capsys):
        assert main(["adjust", LIT, "--format", "json"]) == 0
        doc = json.loads(capsys.readouterr().out)
        assert doc["exposure"] == "CI" and doc["outcome"] == "BugReport"
        assert doc["sets"] == [["Age"]]

    def test_inadmissible_exits_one(self, tmp_path, capsys):
        f = tmp_path / "latent.dag"
        f.write_text("latent U\nexposure X\noutcome Y\nU -> X\nU -> Y\nX -> Y\n")
        assert main(["adjust", str(f)]) == 1

    def test_unmarked_dag_is_usage_error(self, tmp_path):
        f = tmp_path / "plain.dag"
        f.write_text("A -> B\n")
        with pytest.raises(SystemExit) as exc:
            main(["adjust", str(f)])
        assert exc.value.code == 2


class TestTest:
    def test_consistent_dataset_exits_zero(self, consistent_csv, capsys):
        assert main(["test", DV, consistent_csv, "--seed", "4"]) == 0
        out = capsys.readouterr().out
        assert "passed 4, failed 0" in out

    def test_json_format(self, consistent_csv, capsys):
        assert main(["test", DV, consistent_csv, "--seed", "4", "--format", "json"]) == 0
        doc = json.loads(capsys.readouterr().out)
        assert len(doc["results"]) == 4
        assert doc["summary"]["failed"] == 0

    def test_inconsistent_dataset_exits_one(self, consistent_csv, capsys):
        assert main(["test", LIT, consistent_csv, "--seed", "4"]) == 1


class TestRefine:
    def test_refine_to_consistency(self, consistent_csv, tmp_path, capsys):
        out_dag = tmp_path / "final.dag"
        code = main(["refine", LIT, consistent_csv, "--seed", "4",
                     "--emit-dag", str(out_dag)])
        assert code == 0
        narrative = capsys.readouterr().out
        assert narrative.startswith("Refinement session: status consistent")
        from dagcheck.graph import parse_dag

        final = parse_dag(out_dag.read_text("utf-8"))
        assert len(final.edges) >= 15


class TestIngest:
    def bundle(self, tmp_path, name="proj", with_alignment=True, ci=True) -> str:
        records = [{"type": "meta", "project": name,
                    "repo_created_at": "2020-01-01T00:00:00Z",
                    "collected_at": "2021-03-01T00:00:00Z"}]
        if ci:
            records[0]["ci_adopted_at"] = "2020-02-01T00:00:00Z"
        elif with_alignment:
            records[0]["alignment_start"] = "2020-02-01T00:00:00Z"
        records += [
            {"type": "commit", "sha": f"{name}-c{i}", "parents": [],
             "timestamp": f"2020-{2 + i % 10:02d}-05T00:00:00Z", "pull_request": "pr1",
             "files": [{"path": "t.py", "lines_added": i + 1, "lines_removed": 0,
                        "is_test": bool(i % 2)}]}
            for i in range(6)
        ]
        records.append({"type": "pull_request", "id": "pr1",
                        "opened_at": "2020-02-02T00:00:00Z",
                        "comments": 1, "review_comments": 2})
        records.append({"type": "issue", "id": "i1",
                        "created_at": "2020-03-01T00:00:00Z", "labels": ["bug"],
                        "title": "t", "body": "b"})
        path = tmp_path / f"{name}.jsonl"
        path.write_text("\n".join(json.dumps(r) for r in records) + "\n", "utf-8")
        return str(path)

    def test_ingest_two_projects(self, tmp_path, capsys):
        a = self.bundle(tmp_path, "alpha", ci=True)
        b = self.bundle(tmp_path, "beta", ci=False)
        out = tmp_path / "dataset.csv"
        assert main(["ingest", a, b, "--out", str(out)]) == 0
        table = DatasetTable.from_csv(str(out))
        assert table.row_count == 24
        assert set(table.columns) == {
            "Age", "BugReport", "CI", "CommitFrequency",
            "Communication", "MergeConflicts", "TestsVolume",
        }
        ci_column = table.column("CI")
        assert sorted(set(ci_column)) == [0.0, 1.0]

    def test_no_ci_without_alignment_fails(self, tmp_path, capsys):
        bad = self.bundle(tmp_path, "gamma", with_alignment=False, ci=False)
        out = tmp_path / "x.csv"
        assert main(["ingest", bad, "--out", str(out)]) == 1
        assert "alignment_start" in capsys.readouterr().err


class TestUsage:
    def test_unknown_command(self):
        with pytest.raises(SystemExit) as exc:
            main(["frobnicate"])
        assert exc.value.code == 2

    def test_no_command(self):
        with pytest.raises(SystemExit) as exc:
            main([])
        assert exc.value.code == 2
