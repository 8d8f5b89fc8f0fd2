"""d-separation: path blocking, reachability, backdoor paths, and minimal
separating/adjustment sets.

The production d-separation test is a linear-time ball-passing traversal;
explicit path enumeration (exponential) is retained for diagnostics and as
the independent oracle in the test suite. Minimal-separator listing works on
the moral graph of the ancestral subgraph, which carries d-separation for
every candidate set.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import AbstractSet, Iterable, Literal, Optional

from .graph import CausalDag, GraphError

__all__ = [
    "Path",
    "PathStatus",
    "PathLimitError",
    "AdjustmentSearch",
    "enumerate_paths",
    "path_status",
    "is_d_separated",
    "backdoor_paths",
    "list_minimal_separators",
    "find_minimal_separator",
    "minimal_adjustment_sets",
]

DEFAULT_PATH_LIMIT = 10_000

Direction = Literal["forward", "backward"]


class PathLimitError(GraphError):
    def __init__(self, limit: int):
        super().__init__(f"path enumeration exceeded the limit of {limit} paths")
        self.limit = limit


@dataclass(frozen=True)
class Path:
    """A simple path; ``directions[i]`` orients the edge between
    ``nodes[i]`` and ``nodes[i+1]`` (forward = along the arrow)."""

    nodes: tuple[str, ...]
    directions: tuple[Direction, ...]

    def __str__(self) -> str:
        parts = [self.nodes[0]]
        for d, n in zip(self.directions, self.nodes[1:]):
            parts.append(" -> " if d == "forward" else " <- ")
            parts.append(n)
        return "".join(parts)


@dataclass(frozen=True)
class PathStatus:
    open: bool
    blocking_nodes: frozenset[str]
    colliders_opened: frozenset[str]


def _require(dag: CausalDag, names: Iterable[str]) -> None:
    for n in names:
        dag.variable(n)


def enumerate_paths(
    dag: CausalDag, x: str, y: str, limit: int = DEFAULT_PATH_LIMIT
) -> list[Path]:
    """All simple paths between x and y, lexicographic by node sequence.

    Exponential in the worst case; raises PathLimitError past `limit`.
    """
    _require(dag, (x, y))
    if x == y:
        raise GraphError("path endpoints must differ")
    found: list[Path] = []
    nodes: list[str] = [x]
    dirs: list[Direction] = []
    on_path = {x}

    def steps(v: str) -> list[tuple[str, Direction]]:
        out = [(c, "forward") for c in dag.children(v)]
        out += [(p, "backward") for p in dag.parents(v)]
        return sorted(out)

    def walk(v: str) -> None:
        for nxt, d in steps(v):
            if nxt in on_path:
                continue
            nodes.append(nxt)
            dirs.append(d)
            if nxt == y:
                if len(found) >= limit:
                    raise PathLimitError(limit)
                found.append(Path(tuple(nodes), tuple(dirs)))
            else:
                on_path.add(nxt)
                walk(nxt)
                on_path.remove(nxt)
            nodes.pop()
            dirs.pop()

    walk(x)
    found.sort(key=lambda p: p.nodes)
    return found


def path_status(dag: CausalDag, path: Path, conditioning: AbstractSet[str]) -> PathStatus:
    """Blocking verdict for one path under a conditioning set.

    A non-endpoint node blocks iff it is a chain/fork node inside the
    conditioning set, or a collider with neither itself nor any descendant
    conditioned on.
    """
    _require(dag, path.nodes)
    _require(dag, conditioning)
    if len(path.nodes) < 2 or len(path.directions) != len(path.nodes) - 1:
        raise GraphError("invalid path: node/direction shapes disagree")
    if len(set(path.nodes)) != len(path.nodes):
        raise GraphError("invalid path: repeated node")
    for a, d, b in zip(path.nodes, path.directions, path.nodes[1:]):
        src, dst = (a, b) if d == "forward" else (b, a)
        if not dag.has_edge(src, dst):
            raise GraphError(f"invalid path: no edge {src} -> {dst}")

    z = frozenset(conditioning)
    blocking: set[str] = set()
    opened: set[str] = set()
    for i in range(1, len(path.nodes) - 1):
        v = path.nodes[i]
        is_collider = path.directions[i - 1] == "forward" and path.directions[i] == "backward"
        if is_collider:
            if v in z or dag.descendants(v) & z:
                opened.add(v)
            else:
                blocking.add(v)
        elif v in z:
            blocking.add(v)
    return PathStatus(open=not blocking, blocking_nodes=frozenset(blocking), colliders_opened=frozenset(opened))


def is_d_separated(
    dag: CausalDag,
    x: AbstractSet[str] | str,
    y: AbstractSet[str] | str,
    z: AbstractSet[str] = frozenset(),
) -> bool:
    """True iff every path between x and y is blocked given z.

    Linear-time ball-passing reachability (Koller & Friedman, alg. 3.1),
    not path enumeration.
    """
    xs = frozenset([x]) if isinstance(x, str) else frozenset(x)
    ys = frozenset([y]) if isinstance(y, str) else frozenset(y)
    zs = frozenset(z)
    _require(dag, xs | ys | zs)
    if xs & ys or xs & zs or ys & zs:
        raise GraphError("x, y, and z must be pairwise disjoint")
    if not xs or not ys:
        return True

    # ancestors of the conditioning set, for collider opening
    anc_z: set[str] = set(zs)
    frontier = list(zs)
    while frontier:
        for p in dag.parents(frontier.pop()):
            if p not in anc_z:
                anc_z.add(p)
                frontier.append(p)

    up, down = 0, 1
    queue: list[tuple[str, int]] = [(v, up) for v in xs]
    visited: set[tuple[str, int]] = set()
    while queue:
        node, direction = queue.pop()
        if (node, direction) in visited:
            continue
        visited.add((node, direction))
        if node not in zs and node in ys:
            return False
        if direction == up and node not in zs:
            queue.extend((p, up) for p in dag.parents(node))
            queue.extend((c, down) for c in dag.children(node))
        elif direction == down:
            if node not in zs:
                queue.extend((c, down) for c in dag.children(node))
            if node in anc_z:
                queue.extend((p, up) for p in dag.parents(node))
    return True


def backdoor_paths(
    dag: CausalDag, exposure: str, outcome: str, limit: int = DEFAULT_PATH_LIMIT
) -> list[Path]:
    """Simple exposure-outcome paths whose first step enters the exposure."""
    _require(dag, (exposure, outcome))
    if exposure == outcome:
        raise GraphError("exposure and outcome must differ")
    return [p for p in enumerate_paths(dag, exposure, outcome, limit) if p.directions[0] == "backward"]


# -- minimal separators over the moral graph -------------------------------

Adjacency = dict[str, set[str]]


def _moral_ancestral(dag: CausalDag, x: str, y: str) -> Adjacency:
    """Moral graph of the subgraph induced on An({x, y}).

    For conditioning sets inside An({x, y}) — which contain every minimal
    separator — vertex separation here coincides with d-separation.
    """
    keep = dag.ancestors_of((x, y))
    adj: Adjacency = {v: set() for v in keep}
    for e in dag.edges:
        if e.src in keep and e.dst in keep:
            adj[e.src].add(e.dst)
            adj[e.dst].add(e.src)
    for v in keep:
        parents = sorted(dag.parents(v) & keep)
        for i, a in enumerate(parents):
            for b in parents[i + 1:]:
                adj[a].add(b)
                adj[b].add(a)
    return adj


def _reachable(adj: Adjacency, start: str, removed: AbstractSet[str]) -> set[str]:
    seen = {start}
    frontier = [start]
    while frontier:
        v = frontier.pop()
        for w in adj[v]:
            if w not in removed and w not in seen:
                seen.add(w)
                frontier.append(w)
    return seen


def _separates(adj: Adjacency, x: str, y: str, z: AbstractSet[str]) -> bool:
    return y not in _reachable(adj, x, z)


def _shrink(adj: Adjacency, x: str, y: str, sep: frozenset[str], keep: frozenset[str]) -> frozenset[str]:
    """Shrink a separator to one whose extra vertices touch both sides,
    never dropping `keep`."""
    comp_x = _reachable(adj, x, sep)
    near_x = frozenset(v for v in sep if adj[v] & comp_x) | keep
    comp_y = _reachable(adj, y, near_x)
    return frozenset(v for v in near_x if adj[v] & comp_y) | keep


def _is_minimal(adj: Adjacency, x: str, y: str, sep: frozenset[str]) -> bool:
    if not _separates(adj, x, y, sep):
        return False
    comp_x = _reachable(adj, x, sep)
    comp_y = _reachable(adj, y, sep)
    return all(adj[v] & comp_x and adj[v] & comp_y for v in sep)


def list_minimal_separators(
    dag: CausalDag,
    x: str,
    y: str,
    restricted_to: Optional[Iterable[str]] = None,
    max_results: Optional[int] = None,
) -> list[frozenset[str]]:
    """All inclusion-minimal sets Z within `restricted_to` with x d-sep y | Z.

    Defaults to observed variables only, so every listed separator is
    testable on data. Results sorted by size, then lexicographically.
    Raises GraphError if x and y are adjacent, or if `max_results`
    (when given) would be exceeded.
    """
    _require(dag, (x, y))
    if x == y:
        raise GraphError("endpoints must differ")
    if dag.adjacent(x, y):
        raise GraphError(f"{x!r} and {y!r} are adjacent; no separator exists")
    allowed = frozenset(restricted_to if restricted_to is not None else dag.observed)
    _require(dag, allowed)

    adj = _moral_ancestral(dag, x, y)
    universe = frozenset(allowed & adj.keys()) - {x, y}
    out: set[frozenset[str]] = set()

    def recurse(required: frozenset[str], candidates: frozenset[str]) -> None:
        if not _separates(adj, x, y, candidates):
            return
        shrunk = _shrink(adj, x, y, candidates, required)
        extra = shrunk - required
        if not extra:
            if _is_minimal(adj, x, y, required):
                out.add(required)
                if max_results is not None and len(out) > max_results:
                    raise GraphError(f"more than {max_results} minimal separators for ({x}, {y})")
            return
        pivot = min(extra)
        recurse(required | {pivot}, candidates)
        recurse(required, candidates - {pivot})

    recurse(frozenset(), universe)
    return sorted(out, key=lambda s: (len(s), sorted(s)))


def find_minimal_separator(
    dag: CausalDag,
    x: str,
    y: str,
    restricted_to: Optional[Iterable[str]] = None,
) -> Optional[frozenset[str]]:
    """Smallest minimal separator within the allowed set (lexicographic
    tie-break), or None when the pair cannot be separated there."""
    seps = list_minimal_separators(dag, x, y, restricted_to)
    return seps[0] if seps else None


@dataclass(frozen=True)
class AdjustmentSearch:
    """Backdoor-criterion search result. `admissible` distinguishes "no
    backdoor paths, adjust for nothing" ([frozenset()]) from "no valid
    set exists" ([])."""

    sets: tuple[frozenset[str], ...]
    admissible: bool


def minimal_adjustment_sets(dag: CausalDag, exposure: str, outcome: str) -> AdjustmentSearch:
    """All inclusion-minimal observed sets satisfying the backdoor
    criterion: no descendants of the exposure, and every backdoor path
    blocked. Sorted by size, then lexicographically."""
    _require(dag, (exposure, outcome))
    if exposure == outcome:
        raise GraphError("exposure and outcome must differ")
    for role, name in (("exposure", exposure), ("outcome", outcome)):
        if not dag.variable(name).observed:
            raise GraphError(f"{role} {name!r} must be observed")

    allowed = frozenset(dag.observed) - dag.descendants(exposure) - {exposure, outcome}
    # removing the exposure's outgoing edges leaves exactly the backdoor paths
    trimmed = dag.replace_edges(e for e in dag.edges if e.src != exposure)
    if trimmed.adjacent(exposure, outcome):
        return AdjustmentSearch((), admissible=False)
    sets = list_minimal_separators(trimmed, exposure, outcome, allowed)
    return AdjustmentSearch(tuple(sets), admissible=bool(sets))
