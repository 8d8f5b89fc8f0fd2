"""Causal DAG data model, text serialization, and structural validation.

A :class:`CausalDag` is an immutable value: named variables (observed or
latent), a set of directed edges, and optional exposure/outcome marks.
Graphs are written in a line-oriented text format::

    # one statement per line
    Fire -> Smoke          # edge (endpoints implicitly declared observed)
    latent Spark           # mark a variable latent
    exposure Fire
    outcome Smoke
    Orphan                 # bare name declares an isolated observed variable

Serialization is canonical: variable declarations sorted lexicographically,
then edges sorted by (from, to), so equal graphs serialize byte-identically.
"""

from __future__ import annotations

import hashlib
import re
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Literal, Mapping, Optional, Sequence

__all__ = [
    "GraphError",
    "DagSyntaxError",
    "CycleError",
    "UnknownVariableError",
    "Variable",
    "Edge",
    "CausalDag",
    "DagEdit",
    "Violation",
    "parse_dag",
    "serialize_dag",
    "validate_dag",
    "relatives",
]

_NAME_RE = re.compile(r"[A-Za-z0-9_]+")

Relation = Literal["parents", "children", "ancestors", "descendants"]
VariableKind = Literal["observed", "latent"]


class GraphError(Exception):
    """Base class for graph-model failures."""


class DagSyntaxError(GraphError):
    """Malformed DAG document; carries 1-based line and column."""

    def __init__(self, message: str, line: int, column: int = 1):
        super().__init__(f"line {line}, column {column}: {message}")
        self.line = line
        self.column = column


class CycleError(GraphError):
    """The edge set contains a directed cycle."""

    def __init__(self, cycle: Sequence[str]):
        super().__init__("directed cycle: " + " -> ".join(cycle))
        self.cycle = tuple(cycle)


class UnknownVariableError(GraphError, KeyError):
    def __init__(self, name: str):
        super().__init__(f"unknown variable {name!r}")
        self.name = name


@dataclass(frozen=True)
class Variable:
    """A named node. Latent variables shape separation structure but carry
    no data column and may never be conditioned on in emitted claims."""

    name: str
    kind: VariableKind = "observed"
    description: str = field(default="", compare=False)

    @property
    def observed(self) -> bool:
        return self.kind == "observed"


@dataclass(frozen=True, order=True)
class Edge:
    src: str
    dst: str

    def __str__(self) -> str:
        return f"{self.src} -> {self.dst}"


@dataclass(frozen=True)
class DagEdit:
    """A single structural change; applying it either yields a valid
    CausalDag or fails atomically."""

    kind: Literal["add_edge", "remove_edge", "reverse_edge"]
    src: str
    dst: str
    rationale: str = field(default="", compare=False)

    def __str__(self) -> str:
        verb = {"add_edge": "add", "remove_edge": "remove", "reverse_edge": "reverse"}[self.kind]
        return f"{verb} {self.src} -> {self.dst}"


@dataclass(frozen=True)
class Violation:
    code: str
    message: str

    def __str__(self) -> str:
        return f"{self.code}: {self.message}"


@dataclass(frozen=True)
class CausalDag:
    """Immutable causal DAG.

    The constructor normalizes order but does not reject ill-formed input;
    :func:`validate_dag` reports violations as data and :meth:`check` raises
    on the first one. Parsing and editing always return checked graphs.
    """

    variables: tuple[Variable, ...]
    edges: tuple[Edge, ...]
    exposure: Optional[str] = None
    outcome: Optional[str] = None

    def __init__(
        self,
        variables: Iterable[Variable | str] = (),
        edges: Iterable[Edge | tuple[str, str]] = (),
        exposure: Optional[str] = None,
        outcome: Optional[str] = None,
    ):
        vs = tuple(
            v if isinstance(v, Variable) else Variable(v)
            for v in variables
        )
        es = tuple(e if isinstance(e, Edge) else Edge(*e) for e in edges)
        object.__setattr__(self, "variables", tuple(sorted(vs, key=lambda v: v.name)))
        object.__setattr__(self, "edges", tuple(sorted(es)))
        object.__setattr__(self, "exposure", exposure)
        object.__setattr__(self, "outcome", outcome)

    # -- lookups ---------------------------------------------------------

    @cached_property
    def names(self) -> tuple[str, ...]:
        return tuple(v.name for v in self.variables)

    @cached_property
    def observed(self) -> tuple[str, ...]:
        return tuple(v.name for v in self.variables if v.observed)

    @cached_property
    def latent(self) -> tuple[str, ...]:
        return tuple(v.name for v in self.variables if not v.observed)

    @cached_property
    def _by_name(self) -> Mapping[str, Variable]:
        return {v.name: v for v in self.variables}

    @cached_property
    def _parents(self) -> Mapping[str, frozenset[str]]:
        acc: dict[str, set[str]] = {n: set() for n in self.names}
        for e in self.edges:
            if e.dst in acc and e.src in self._by_name:
                acc[e.dst].add(e.src)
        return {k: frozenset(v) for k, v in acc.items()}

    @cached_property
    def _children(self) -> Mapping[str, frozenset[str]]:
        acc: dict[str, set[str]] = {n: set() for n in self.names}
        for e in self.edges:
            if e.src in acc and e.dst in self._by_name:
                acc[e.src].add(e.dst)
        return {k: frozenset(v) for k, v in acc.items()}

    def __contains__(self, name: str) -> bool:
        return name in self._by_name

    def variable(self, name: str) -> Variable:
        try:
            return self._by_name[name]
        except KeyError:
            raise UnknownVariableError(name) from None

    def has_edge(self, src: str, dst: str) -> bool:
        return dst in self._children.get(src, frozenset())

    def adjacent(self, a: str, b: str) -> bool:
        return self.has_edge(a, b) or self.has_edge(b, a)

    def parents(self, name: str) -> frozenset[str]:
        self.variable(name)
        return self._parents[name]

    def children(self, name: str) -> frozenset[str]:
        self.variable(name)
        return self._children[name]

    def ancestors(self, name: str) -> frozenset[str]:
        return self._closure(name, self._parents)

    def descendants(self, name: str) -> frozenset[str]:
        return self._closure(name, self._children)

    def ancestors_of(self, names: Iterable[str]) -> frozenset[str]:
        """Ancestors of the set, including the set itself."""
        out: set[str] = set()
        for n in names:
            out.add(n)
            out |= self.ancestors(n)
        return frozenset(out)

    def _closure(self, name: str, step: Mapping[str, frozenset[str]]) -> frozenset[str]:
        self.variable(name)
        seen: set[str] = set()
        frontier = list(step[name])
        while frontier:
            v = frontier.pop()
            if v not in seen:
                seen.add(v)
                frontier.extend(step[v])
        return frozenset(seen)

    # -- structure -------------------------------------------------------

    def topological_order(self) -> tuple[str, ...]:
        """Kahn's algorithm with a lexicographic frontier; raises CycleError."""
        indeg = {n: len(self._parents[n]) for n in self.names}
        frontier = sorted(n for n, d in indeg.items() if d == 0)
        order: list[str] = []
        while frontier:
            v = frontier.pop(0)
            order.append(v)
            changed = False
            for c in self._children[v]:
                indeg[c] -= 1
                if indeg[c] == 0:
                    frontier.append(c)
                    changed = True
            if changed:
                frontier.sort()
        if len(order) != len(self.names):
            rest = {n for n in self.names if n not in set(order)}
            raise CycleError(self._find_cycle(rest))
        return tuple(order)

    def _find_cycle(self, inside: set[str]) -> list[str]:
        # every unordered node keeps an unordered parent, so walking
        # parents must revisit a node; the revisited stretch is a cycle
        start = sorted(inside)[0]
        trail, seen = [start], {start}
        v = start
        while True:
            nxt = sorted(p for p in self._parents[v] if p in inside)[0]
            if nxt in seen:
                loop = trail[trail.index(nxt):] + [nxt]
                return loop[::-1]
            trail.append(nxt)
            seen.add(nxt)
            v = nxt

    def is_acyclic(self) -> bool:
        try:
            self.topological_order()
            return True
        except CycleError:
            return False

    @cached_property
    def fingerprint(self) -> str:
        """Content digest of the canonical serialization."""
        return hashlib.sha256(serialize_dag(self).encode("utf-8")).hexdigest()

    def check(self) -> "CausalDag":
        violations = validate_dag(self)
        if violations:
            first = violations[0]
            if first.code == "cycle":
                self.topological_order()  # raises CycleError with the cycle
            raise GraphError(str(first))
        return self

    # -- derivation ------------------------------------------------------

    def replace_edges(self, edges: Iterable[Edge | tuple[str, str]]) -> "CausalDag":
        return CausalDag(self.variables, edges, self.exposure, self.outcome)

    def with_marks(self, exposure: Optional[str], outcome: Optional[str]) -> "CausalDag":
        return CausalDag(self.variables, self.edges, exposure, outcome)


def validate_dag(dag: CausalDag) -> list[Violation]:
    """Report every invariant violation; an empty list means a valid DAG."""
    out: list[Violation] = []
    seen: set[str] = set()
    for v in dag.variables:
        if not v.name or not _NAME_RE.fullmatch(v.name):
            out.append(Violation("bad_name", f"variable name {v.name!r} is not [A-Za-z0-9_]+"))
        if v.name in seen:
            out.append(Violation("duplicate_variable", f"variable {v.name!r} declared twice"))
        seen.add(v.name)
    ordered_pairs: set[tuple[str, str]] = set()
    for e in dag.edges:
        for endpoint in (e.src, e.dst):
            if endpoint not in seen:
                out.append(Violation("unknown_endpoint", f"edge {e} names undeclared variable {endpoint!r}"))
        if e.src == e.dst:
            out.append(Violation("self_loop", f"self-loop on {e.src!r}"))
        if (e.src, e.dst) in ordered_pairs:
            out.append(Violation("duplicate_edge", f"edge {e} declared twice"))
        if (e.dst, e.src) in ordered_pairs:
            out.append(Violation("two_cycle", f"edges in both directions between {e.src!r} and {e.dst!r}"))
        ordered_pairs.add((e.src, e.dst))
    for role, name in (("exposure", dag.exposure), ("outcome", dag.outcome)):
        if name is None:
            continue
        if name not in seen:
            out.append(Violation("unknown_endpoint", f"{role} names undeclared variable {name!r}"))
        elif not dag._by_name[name].observed:
            out.append(Violation("latent_mark", f"{role} {name!r} must be observed"))
    if not any(v.code in ("self_loop", "two_cycle", "unknown_endpoint", "duplicate_variable") for v in out):
        if not dag.is_acyclic():
            out.append(Violation("cycle", "graph contains a directed cycle"))
    return out


def parse_dag(text: str) -> CausalDag:
    """Parse a DAG document, returning a checked CausalDag.

    Raises DagSyntaxError (with line/column), CycleError, or GraphError for
    duplicate declarations and unknown endpoints.
    """
    kinds: dict[str, str] = {}
    order: list[str] = []
    edges: list[Edge] = []
    edge_set: set[tuple[str, str]] = set()
    exposure: Optional[str] = None
    outcome: Optional[str] = None

    def declare(name: str, lineno: int, col: int, kind: str = "observed") -> None:
        if not _NAME_RE.fullmatch(name):
            raise DagSyntaxError(f"bad variable name {name!r}", lineno, col)
        if name not in kinds:
            kinds[name] = kind
            order.append(name)
        elif kind == "latent" and kinds[name] == "latent":
            raise DagSyntaxError(f"variable {name!r} marked latent twice", lineno, col)
        elif kind == "latent":
            kinds[name] = "latent"

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "->" in line:
            parts = [p.strip() for p in line.split("->")]
            if len(parts) != 2 or not all(parts):
                raise DagSyntaxError("expected '<name> -> <name>'", lineno, raw.index("->") + 1)
            declare(parts[0], lineno, 1)
            declare(parts[1], lineno, raw.index("->") + 3)
            if parts[0] == parts[1]:
                raise DagSyntaxError(f"self-loop on {parts[0]!r}", lineno, 1)
            key = (parts[0], parts[1])
            if key in edge_set:
                raise DagSyntaxError(f"duplicate edge {parts[0]} -> {parts[1]}", lineno, 1)
            if (parts[1], parts[0]) in edge_set:
                raise DagSyntaxError(f"edges in both directions between {parts[0]!r} and {parts[1]!r}", lineno, 1)
            edge_set.add(key)
            edges.append(Edge(*key))
            continue
        tokens = line.split()
        if len(tokens) == 2 and tokens[0] in ("latent", "exposure", "outcome"):
            keyword, name = tokens
            if keyword == "latent":
                declare(name, lineno, len("latent ") + 1, kind="latent")
            else:
                declare(name, lineno, len(keyword) + 2)
                if keyword == "exposure":
                    if exposure is not None:
                        raise DagSyntaxError("exposure declared twice", lineno, 1)
                    exposure = name
                else:
                    if outcome is not None:
                        raise DagSyntaxError("outcome declared twice", lineno, 1)
                    outcome = name
        elif len(tokens) == 1:
            declare(tokens[0], lineno, 1)
        else:
            raise DagSyntaxError(f"unrecognized statement {line!r}", lineno, 1)

    dag = CausalDag(
        (Variable(n, kinds[n]) for n in order),  # type: ignore[arg-type]
        edges,
        exposure,
        outcome,
    )
    return dag.check()


def serialize_dag(dag: CausalDag) -> str:
    """Canonical text form: declarations sorted lexicographically, then
    edges sorted by (from, to). Deterministic for equal graphs."""
    covered = {e.src for e in dag.edges} | {e.dst for e in dag.edges}
    lines: list[str] = []
    for v in dag.variables:  # already name-sorted
        if v.observed and v.name not in covered:
            lines.append(v.name)
    for v in dag.variables:
        if not v.observed:
            lines.append(f"latent {v.name}")
    if dag.exposure is not None:
        lines.append(f"exposure {dag.exposure}")
    if dag.outcome is not None:
        lines.append(f"outcome {dag.outcome}")
    lines.extend(str(e) for e in dag.edges)
    return "\n".join(lines) + ("\n" if lines else "")


def relatives(dag: CausalDag, v: str, relation: Relation) -> frozenset[str]:
    """Standard graph semantics; ancestors/descendants exclude v itself."""
    if relation == "parents":
        return dag.parents(v)
    if relation == "children":
        return dag.children(v)
    if relation == "ancestors":
        return dag.ancestors(v)
    if relation == "descendants":
        return dag.descendants(v)
    raise ValueError(f"unknown relation {relation!r}")
