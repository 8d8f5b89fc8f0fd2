"""From a graph to its testable claims.

Every missing edge between measured variables is a promise: some
conditioning set should make the pair statistically independent. This
demo prints those promises for both shipped fixtures, including the one
pair that is only separable through latent variables (and therefore
cannot be tested on data at all).

Run: python demos/02_implications.py
"""

from dagcheck.fixtures import load_fixture
from dagcheck.implications import implied_independencies

for name in ("literature", "data_validated"):
    dag = load_fixture(name)
    hypothesis_set = implied_independencies(dag)
    print(f"== {name}: {len(dag.observed)} observed, {len(dag.latent)} latent, "
          f"{len(dag.edges)} edges")
    for i, claim in enumerate(hypothesis_set.claims, start=1):
        print(f"  {i:>2}. {claim}")
    for x, y in hypothesis_set.latent_only_pairs:
        print(f"   -- ({x}, {y}): separable only through latents, untestable")
    print()

literature = implied_independencies(load_fixture("literature"))
refined = implied_independencies(load_fixture("data_validated"))
dropped = set(literature.claims) - set(refined.claims)
print(f"The refinement kept {len(set(literature.claims) & set(refined.claims))} "
      f"claims and dropped {len(dropped)}; each dropped claim is a dependence "
      "the dataset insisted on.")
