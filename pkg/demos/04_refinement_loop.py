"""The full guess-and-test loop on synthetic ground truth.

We draw data from the data-validated graph's structure, hand the loop the
older literature graph, and watch it discover the discrepancies: each
failed claim is diagnosed, candidate reorientations are tested through
their follow-up claims, and a direct edge is added when nothing else
explains the dependence.

Run: python demos/04_refinement_loop.py   (about half a minute)
"""

from dagcheck import TestConfig, evaluate_dag, refine
from dagcheck.fixtures import load_fixture
from dagcheck.report import render_session_narrative
from dagcheck.synth import simulate_linear_gaussian

truth = load_fixture("data_validated")
start = load_fixture("literature")

data = simulate_linear_gaussian(truth, n=1000, rng_seed=42)
config = TestConfig(alpha=0.05, rng_seed=42)

before = evaluate_dag(data, start, config)
print(f"Literature graph against the data: {before.failed} of "
      f"{len(before.results)} implications rejected.\n")

session = refine(start, data, config)
print(render_session_narrative(session.to_dict()))

after = evaluate_dag(data, session.final_dag, config)
print(f"Final graph: {after.failed} rejected of {len(after.results)} implications; "
      f"{len(session.edits())} edits applied; status {session.status}.")
print("Edges added or turned relative to the start:")
for edge in sorted(set(session.final_dag.edges) - set(start.edges), key=str):
    print(f"  {edge}")
