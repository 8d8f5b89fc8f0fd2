import itertools

import pytest

from dagcheck.dsep import is_d_separated
from dagcheck.graph import GraphError, parse_dag
from dagcheck.implications import (
    HypothesisSet,
    IndependenceClaim,
    claim_canonicalize,
    implied_independencies,
)

from oracles import random_dag

# Reference claim sets the two shipped fixtures must imply, claim for claim.
LITERATURE_CLAIMS = {
    ("Age", "CommitFrequency", ("CI",)),
    ("Age", "TestsVolume", ("CI",)),
    ("Age", "Communication", ("CI",)),
    ("Age", "MergeConflicts", ("CI",)),
    ("BugReport", "CommitFrequency", ("CI", "Communication", "TestsVolume")),
    ("BugReport", "MergeConflicts", ("CI", "CommitFrequency")),
    ("BugReport", "MergeConflicts", ("CI", "Communication", "TestsVolume")),
    ("Communication", "MergeConflicts", ("CI", "CommitFrequency")),
    ("Communication", "TestsVolume", ("CI",)),
    ("MergeConflicts", "TestsVolume", ("CI", "CommitFrequency")),
}

DATA_VALIDATED_CLAIMS = {
    ("Age", "MergeConflicts", ("CI", "CommitFrequency")),
    ("BugReport", "MergeConflicts", ("CI", "CommitFrequency")),
    ("Communication", "MergeConflicts", ("CI", "CommitFrequency")),
    ("MergeConflicts", "TestsVolume", ("CI", "CommitFrequency")),
}


def claim_tuples(hs: HypothesisSet) -> set[tuple]:
    return {(c.x, c.y, c.conditioning) for c in hs.claims}


class TestClaim:
    def test_canonical_ordering(self):
        claim = IndependenceClaim("B", "A", ("Z2", "Z1"))
        assert (claim.x, claim.y) == ("A", "B")
        assert claim.conditioning == ("Z1", "Z2")

    def test_canonicalize_idempotent(self):
        claim = IndependenceClaim("A", "B", ("Z",))
        assert claim_canonicalize(claim) == claim

    def test_same_endpoint_rejected(self):
        with pytest.raises(GraphError):
            IndependenceClaim("A", "A")

    def test_endpoint_in_conditioning_rejected(self):
        with pytest.raises(GraphError):
            IndependenceClaim("A", "B", ("A",))

    def test_round_trip_dict(self):
        claim = IndependenceClaim("X", "W", ("A", "B"))
        assert IndependenceClaim.from_dict(claim.to_dict()) == claim


class TestImpliedIndependencies:
    def test_chain(self, chain_dag):
        hs = implied_independencies(chain_dag)
        assert claim_tuples(hs) == {("A", "C", ("B",))}

    def test_collider_unconditional(self, collider_dag):
        hs = implied_independencies(collider_dag)
        assert claim_tuples(hs) == {("A", "C", ())}

    def test_literature_fixture_exact(self, literature_dag):
        hs = implied_independencies(literature_dag)
        assert claim_tuples(hs) == LITERATURE_CLAIMS
        assert len(hs.claims) == 10
        assert hs.latent_only_pairs == (("CommitFrequency", "Communication"),)

    def test_data_validated_fixture_exact(self, data_validated_dag):
        hs = implied_independencies(data_validated_dag)
        assert claim_tuples(hs) == DATA_VALIDATED_CLAIMS
        assert len(hs.claims) == 4
        assert all(c.conditioning == ("CI", "CommitFrequency") for c in hs.claims)

    def test_soundness_every_claim_separates(self, literature_dag, data_validated_dag):
        for dag in (literature_dag, data_validated_dag):
            for claim in implied_independencies(dag).claims:
                assert is_d_separated(dag, {claim.x}, {claim.y}, set(claim.conditioning))

    def test_claims_condition_on_observed_only(self, literature_dag):
        observed = set(literature_dag.observed)
        for claim in implied_independencies(literature_dag).claims:
            assert set(claim.conditioning) <= observed
            assert {claim.x, claim.y} <= observed

    def test_pair_coverage_on_random_dags(self):
        # every non-adjacent observed pair either yields >= 1 claim or is
        # reported as separable only through latents
        for seed in range(100):
            dag = random_dag(seed, latent_fraction=0.25)
            hs = implied_independencies(dag)
            claimed = {(c.x, c.y) for c in hs.claims}
            latent_only = set(hs.latent_only_pairs)
            observed = sorted(dag.observed)
            for x, y in itertools.combinations(observed, 2):
                if dag.adjacent(x, y):
                    assert (x, y) not in claimed
                else:
                    assert ((x, y) in claimed) != ((x, y) in latent_only)

    def test_soundness_on_random_dags(self):
        for seed in range(100):
            dag = random_dag(seed, latent_fraction=0.25)
            for claim in implied_independencies(dag).claims:
                assert is_d_separated(dag, {claim.x}, {claim.y}, set(claim.conditioning))

    def test_determinism_byte_identical(self, literature_dag):
        a = implied_independencies(literature_dag).to_json()
        b = implied_independencies(parse_dag(open("fixtures/literature.dag").read())).to_json()
        assert a == b

    def test_claims_sorted_and_unique(self, literature_dag):
        hs = implied_independencies(literature_dag)
        assert list(hs.claims) == sorted(set(hs.claims))

    def test_fingerprint_matches_source_dag(self, literature_dag):
        assert implied_independencies(literature_dag).dag_fingerprint == literature_dag.fingerprint


class TestHypothesisSetSerialization:
    def test_json_round_trip(self, literature_dag):
        hs = implied_independencies(literature_dag)
        import json

        assert HypothesisSet.from_dict(json.loads(hs.to_json())) == hs
