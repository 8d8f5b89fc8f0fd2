"""Testable (un)conditional independence implications of a DAG.

For every non-adjacent pair of observed variables that can be separated
using observed variables only, one claim is emitted per inclusion-minimal
separating set (so a pair may contribute several claims). Pairs separable
only through latent variables are reported separately: they exist in the
graph but cannot be checked on data.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass
from typing import Iterable, Optional

from .dsep import list_minimal_separators
from .graph import CausalDag, GraphError

__all__ = ["IndependenceClaim", "HypothesisSet", "implied_independencies", "claim_canonicalize"]


@dataclass(frozen=True, order=True)
class IndependenceClaim:
    """An assertion "x independent of y given conditioning".

    Stored canonically: endpoints lexicographically ordered, conditioning
    sorted. Construction rejects x == y and endpoints inside the
    conditioning set.
    """

    x: str
    y: str
    conditioning: tuple[str, ...] = ()

    def __init__(self, x: str, y: str, conditioning: Iterable[str] = ()):
        if x == y:
            raise GraphError(f"claim endpoints must differ (got {x!r} twice)")
        given = tuple(sorted(set(conditioning)))
        if x in given or y in given:
            raise GraphError("claim endpoints may not appear in the conditioning set")
        a, b = sorted((x, y))
        object.__setattr__(self, "x", a)
        object.__setattr__(self, "y", b)
        object.__setattr__(self, "conditioning", given)

    @property
    def unconditional(self) -> bool:
        return not self.conditioning

    def __str__(self) -> str:
        base = f"{self.x} _||_ {self.y}"
        if self.conditioning:
            base += " | " + ", ".join(self.conditioning)
        return base

    def to_dict(self) -> dict:
        return {"x": self.x, "y": self.y, "conditioning": list(self.conditioning)}

    @classmethod
    def from_dict(cls, d: dict) -> "IndependenceClaim":
        return cls(d["x"], d["y"], d.get("conditioning", ()))


def claim_canonicalize(claim: IndependenceClaim) -> IndependenceClaim:
    """Return the canonical form; idempotent (construction already
    normalizes, so this is the identity on valid claims)."""
    return IndependenceClaim(claim.x, claim.y, claim.conditioning)


@dataclass(frozen=True)
class HypothesisSet:
    """Ordered, deduplicated claims implied by one DAG, fingerprinted
    against the canonical serialization of that DAG."""

    dag_fingerprint: str
    claims: tuple[IndependenceClaim, ...]
    latent_only_pairs: tuple[tuple[str, str], ...] = ()

    def __len__(self) -> int:
        return len(self.claims)

    def __iter__(self):
        return iter(self.claims)

    def to_dict(self) -> dict:
        return {
            "dag_fingerprint": self.dag_fingerprint,
            "claims": [c.to_dict() for c in self.claims],
            "latent_only_pairs": [list(p) for p in self.latent_only_pairs],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"

    @classmethod
    def from_dict(cls, d: dict) -> "HypothesisSet":
        return cls(
            d["dag_fingerprint"],
            tuple(IndependenceClaim.from_dict(c) for c in d["claims"]),
            tuple((a, b) for a, b in d.get("latent_only_pairs", [])),
        )


def implied_independencies(
    dag: CausalDag, max_separators_per_pair: Optional[int] = 100
) -> HypothesisSet:
    """Enumerate the DAG's testable implications.

    Every emitted claim is d-separated in the source DAG, conditions on
    observed variables only, and uses an inclusion-minimal separating set.
    Output is deterministic: claims sorted by (x, y, conditioning).
    """
    observed = dag.observed
    claims: list[IndependenceClaim] = []
    latent_only: list[tuple[str, str]] = []
    for x, y in itertools.combinations(sorted(observed), 2):
        if dag.adjacent(x, y):
            continue
        separators = list_minimal_separators(dag, x, y, observed, max_results=max_separators_per_pair)
        if not separators:
            latent_only.append((x, y))
            continue
        claims.extend(IndependenceClaim(x, y, z) for z in separators)
    return HypothesisSet(
        dag_fingerprint=dag.fingerprint,
        claims=tuple(sorted(set(claims))),
        latent_only_pairs=tuple(latent_only),
    )
