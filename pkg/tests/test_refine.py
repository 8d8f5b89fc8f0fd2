import pytest

from dagcheck.dsep import is_d_separated
from dagcheck.graph import CycleError, DagEdit, GraphError, parse_dag, validate_dag
from dagcheck.implications import IndependenceClaim
from dagcheck.refine import apply_edit, diagnose_failure, refine
from dagcheck.stats import TestConfig, evaluate_dag
from dagcheck.synth import simulate_linear_gaussian


@pytest.fixture(scope="module")
def dv_data(data_validated_dag):
    return simulate_linear_gaussian(data_validated_dag, 500, rng_seed=11)


class TestApplyEdit:
    def test_add_edge(self):
        dag = parse_dag("A\nB")
        out = apply_edit(dag, DagEdit("add_edge", "A", "B"))
        assert out.has_edge("A", "B")
        assert len(out.edges) == 1

    def test_add_duplicate_rejected(self, chain_dag):
        with pytest.raises(GraphError, match="already present"):
            apply_edit(chain_dag, DagEdit("add_edge", "A", "B"))

    def test_remove_missing_rejected(self, chain_dag):
        with pytest.raises(GraphError, match="to remove"):
            apply_edit(chain_dag, DagEdit("remove_edge", "A", "C"))

    def test_reverse_closing_three_cycle_rejected(self):
        dag = parse_dag("A -> B\nB -> C\nA -> C")
        with pytest.raises(CycleError):
            apply_edit(dag, DagEdit("reverse_edge", "A", "C"))

    def test_atomic_failure_leaves_original(self, chain_dag):
        before = chain_dag.edges
        with pytest.raises(GraphError):
            apply_edit(chain_dag, DagEdit("add_edge", "C", "A"))
        assert chain_dag.edges == before

    def test_add_age_communication_to_literature(self, literature_dag):
        out = apply_edit(literature_dag, DagEdit("add_edge", "Age", "Communication"))
        assert validate_dag(out) == []

    def test_marks_and_kinds_preserved(self, literature_dag):
        out = apply_edit(literature_dag, DagEdit("add_edge", "Age", "CommitFrequency"))
        assert out.exposure == "CI" and out.outcome == "BugReport"
        assert set(out.latent) == {"IssueType", "Overconfidence"}


class TestDiagnoseFailure:
    def test_age_commitfrequency_candidates(self, literature_dag, dv_data):
        failed = IndependenceClaim("Age", "CommitFrequency", ("CI",))
        diagnosis = diagnose_failure(literature_dag, failed, dv_data, TestConfig(rng_seed=1))
        followups = {
            claim for cand in diagnosis.candidates for claim in cand.followup_claims
        }
        assert IndependenceClaim("Age", "CommitFrequency", ("BugReport", "CI")) in followups
        direct = [c for c in diagnosis.candidates if c.mechanism == "add_direct_edge"]
        assert len(direct) == 1
        assert (direct[0].edit.kind, direct[0].edit.src, direct[0].edit.dst) == \
            ("add_edge", "Age", "CommitFrequency")

    def test_communication_testsvolume_reorientation(self, literature_dag, dv_data):
        failed = IndependenceClaim("Communication", "TestsVolume", ("CI",))
        diagnosis = diagnose_failure(literature_dag, failed, dv_data, TestConfig(rng_seed=1))
        reorients = {
            (c.edit.kind, c.edit.src, c.edit.dst): c
            for c in diagnosis.candidates if c.mechanism == "collider_to_chain"
        }
        key = ("reverse_edge", "IssueType", "CommitFrequency")
        assert key in reorients
        assert reorients[key].followup_claims == (
            IndependenceClaim("Communication", "TestsVolume", ("CI", "CommitFrequency")),
        )

    def test_adjacent_claim_rejected(self, literature_dag, dv_data):
        claim = IndependenceClaim("Age", "CI")
        with pytest.raises(GraphError, match="adjacent"):
            diagnose_failure(literature_dag, claim, dv_data, TestConfig())

    def test_unimplied_claim_rejected(self, literature_dag, dv_data):
        claim = IndependenceClaim("Age", "CommitFrequency", ("MergeConflicts",))
        with pytest.raises(GraphError, match="not implied"):
            diagnose_failure(literature_dag, claim, dv_data, TestConfig())

    def test_candidates_are_sound(self, literature_dag, dv_data):
        failed = IndependenceClaim("Age", "TestsVolume", ("CI",))
        diagnosis = diagnose_failure(literature_dag, failed, dv_data, TestConfig(rng_seed=1))
        for cand in diagnosis.candidates:
            edited = apply_edit(literature_dag, cand.edit)
            assert validate_dag(edited) == []
            if not edited.adjacent(failed.x, failed.y):
                assert not is_d_separated(edited, {failed.x}, {failed.y},
                                          set(failed.conditioning))

    def test_followups_observed_only(self, literature_dag, dv_data):
        observed = set(literature_dag.observed)
        failed = IndependenceClaim("BugReport", "MergeConflicts", ("CI", "CommitFrequency"))
        diagnosis = diagnose_failure(literature_dag, failed, dv_data, TestConfig(rng_seed=1))
        for cand in diagnosis.candidates:
            for claim in cand.followup_claims:
                assert set(claim.conditioning) <= observed


class TestRefine:
    def test_consistent_dag_stops_immediately(self, data_validated_dag, dv_data):
        session = refine(data_validated_dag, dv_data, TestConfig(rng_seed=11))
        assert session.status == "consistent"
        assert len(session.steps) == 1
        assert session.edits() == ()
        assert session.final_dag == data_validated_dag

    def test_synthetic_end_to_end(self, literature_dag, data_validated_dag):
        data = simulate_linear_gaussian(data_validated_dag, 600, rng_seed=4)
        session = refine(literature_dag, data, TestConfig(rng_seed=4))
        assert session.status == "consistent"
        final_report = evaluate_dag(data, session.final_dag, TestConfig(rng_seed=4))
        assert final_report.failed == 0

    def test_journal_replay_reproduces_final_dag(self, literature_dag, data_validated_dag):
        data = simulate_linear_gaussian(data_validated_dag, 400, rng_seed=9)
        session = refine(literature_dag, data, TestConfig(rng_seed=9))
        assert session.replay() == session.final_dag

    def test_intermediate_dags_always_valid(self, literature_dag, data_validated_dag):
        data = simulate_linear_gaussian(data_validated_dag, 400, rng_seed=21)
        session = refine(literature_dag, data, TestConfig(rng_seed=21))
        dag = session.initial_dag
        assert validate_dag(dag) == []
        for edit in session.edits():
            dag = apply_edit(dag, edit)
            assert validate_dag(dag) == []

    def test_deterministic(self, literature_dag, data_validated_dag):
        data = simulate_linear_gaussian(data_validated_dag, 300, rng_seed=2)
        a = refine(literature_dag, data, TestConfig(rng_seed=2))
        b = refine(literature_dag, data, TestConfig(rng_seed=2))
        assert a.edits() == b.edits()
        assert a.status == b.status
        assert a.final_dag == b.final_dag

    def test_termination_cap(self, literature_dag, data_validated_dag):
        data = simulate_linear_gaussian(data_validated_dag, 300, rng_seed=5)
        session = refine(literature_dag, data, TestConfig(rng_seed=5), max_iterations=1)
        assert len(session.steps) <= 2
        assert session.status in ("consistent", "exhausted")

    def test_interactive_abort(self, literature_dag, data_validated_dag):
        data = simulate_linear_gaussian(data_validated_dag, 300, rng_seed=6)
        session = refine(literature_dag, data, TestConfig(rng_seed=6),
                         policy="interactive", decision_callback=lambda d: None)
        assert session.status == "aborted"
        assert session.final_dag == literature_dag

    def test_interactive_follows_choices(self, literature_dag, data_validated_dag):
        data = simulate_linear_gaussian(data_validated_dag, 300, rng_seed=7)
        picks = []

        def choose(diagnosis):
            direct = next(c for c in diagnosis.candidates if c.mechanism == "add_direct_edge")
            picks.append(direct.edit)
            return direct

        session = refine(literature_dag, data, TestConfig(rng_seed=7),
                         policy="interactive", decision_callback=choose, max_iterations=6)
        applied = [s.applied.edit for s in session.steps if s.applied]
        assert applied == picks
        assert all(s.decider == "human" for s in session.steps if s.applied)

    def test_session_serializes(self, literature_dag, data_validated_dag):
        import json

        data = simulate_linear_gaussian(data_validated_dag, 300, rng_seed=8)
        session = refine(literature_dag, data, TestConfig(rng_seed=8), max_iterations=3)
        doc = session.to_dict()
        json.dumps(doc)  # must be JSON-clean
        assert doc["status"] == session.status
        assert len(doc["steps"]) == len(session.steps)
