"""Independence tests and batch evaluation of a hypothesis set.

Two tests cover the two claim shapes: a distance-covariance permutation
test for unconditional claims, and a kernel conditional-independence test
(Gaussian kernels, median-heuristic bandwidths, ridge-regularized kernel
regression, gamma moment-matching null) for conditional claims. Every
result is deterministic given the configuration seed.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
from dataclasses import dataclass, field, replace
from typing import Literal, Mapping, Optional, Sequence, Union

import numpy as np
from scipy.spatial.distance import pdist, squareform
from scipy.stats import gamma as gamma_dist

from .graph import CausalDag
from .implications import HypothesisSet, IndependenceClaim, implied_independencies

__all__ = [
    "StatsError",
    "DatasetTable",
    "TestConfig",
    "TestResult",
    "Bandwidth",
    "EvaluationReport",
    "TestCache",
    "median_bandwidth",
    "dcov_test",
    "kci_test",
    "test_claim",
    "evaluate_dag",
]

Method = Literal["distance_covariance", "kernel_conditional"]
Decision = Literal["reject_independence", "fail_to_reject"]


class StatsError(Exception):
    pass


class DatasetTable:
    """Rectangular numeric observations keyed by variable name.

    Rows containing missing values are dropped at construction and counted
    in `dropped_rows`. All columns share the same length (at least 4).
    """

    def __init__(self, columns: Mapping[str, Sequence[float]]):
        if not columns:
            raise StatsError("dataset needs at least one column")
        arrays = {name: np.asarray(vals, dtype=float) for name, vals in columns.items()}
        lengths = {a.shape[0] for a in arrays.values()}
        if len(lengths) != 1:
            raise StatsError("columns must have equal length")
        for name, a in arrays.items():
            if a.ndim != 1:
                raise StatsError(f"column {name!r} is not one-dimensional")
        stacked = np.column_stack(list(arrays.values()))
        complete = ~np.isnan(stacked).any(axis=1)
        self.dropped_rows = int((~complete).sum())
        self.columns: dict[str, np.ndarray] = {
            name: a[complete].copy() for name, a in arrays.items()
        }
        self.row_count = int(complete.sum())
        if self.row_count < 4:
            raise StatsError(f"dataset needs at least 4 complete rows, got {self.row_count}")

    def __contains__(self, name: str) -> bool:
        return name in self.columns

    def column(self, name: str) -> np.ndarray:
        if name not in self.columns:
            raise StatsError(f"dataset has no column {name!r}")
        return self.columns[name]

    def matrix(self, names: Sequence[str]) -> np.ndarray:
        return np.column_stack([self.column(n) for n in names])

    @property
    def digest(self) -> str:
        h = hashlib.sha256()
        for name in self.columns:
            h.update(name.encode("utf-8"))
            h.update(self.columns[name].tobytes())
        return h.hexdigest()

    @classmethod
    def from_csv(cls, source: Union[str, "io.TextIOBase"]) -> "DatasetTable":
        """First row variable names, subsequent rows numeric; blank or
        non-numeric cells mark a row incomplete (it is dropped)."""
        close = False
        if isinstance(source, str):
            source = open(source, "r", encoding="utf-8", newline="")
            close = True
        try:
            reader = csv.reader(source)
            try:
                header = next(reader)
            except StopIteration:
                raise StatsError("empty CSV") from None
            names = [h.strip() for h in header]
            rows = []
            for row in reader:
                if not row or all(not c.strip() for c in row):
                    continue
                if len(row) != len(names):
                    raise StatsError(f"row has {len(row)} cells, expected {len(names)}")
                values = []
                for cell in row:
                    cell = cell.strip()
                    try:
                        values.append(float(cell))
                    except ValueError:
                        values.append(float("nan"))
                rows.append(values)
            if not rows:
                raise StatsError("CSV contains no data rows")
            data = np.asarray(rows, dtype=float)
            return cls({name: data[:, i] for i, name in enumerate(names)})
        finally:
            if close:
                source.close()

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        names = list(self.columns)
        writer.writerow(names)
        data = self.matrix(names)
        for row in data:
            writer.writerow([format(v, "g") for v in row])
        return buf.getvalue()


@dataclass(frozen=True)
class TestConfig:
    __test__ = False  # not a pytest class, despite the name

    alpha: float = 0.05
    permutations: int = 999
    rng_seed: int = 0
    kernel_bandwidth: Union[Literal["median_heuristic"], float] = "median_heuristic"
    kci_regularization: float = 1e-3
    kci_null: Literal["gamma_approximation", "permutation"] = "gamma_approximation"

    def __post_init__(self):
        if not 0.0 < self.alpha < 1.0:
            raise StatsError("alpha must lie strictly between 0 and 1")
        if self.permutations < 0:
            raise StatsError("permutations must be non-negative")
        if self.kci_regularization <= 0:
            raise StatsError("kci_regularization must be positive")
        if isinstance(self.kernel_bandwidth, (int, float)) and self.kernel_bandwidth <= 0:
            raise StatsError("explicit kernel bandwidth must be positive")

    @property
    def digest(self) -> str:
        payload = json.dumps(
            [self.alpha, self.permutations, self.rng_seed, self.kernel_bandwidth,
             self.kci_regularization, self.kci_null]
        )
        return hashlib.sha256(payload.encode("utf-8")).hexdigest()[:16]


@dataclass(frozen=True)
class TestResult:
    __test__ = False  # not a pytest class, despite the name

    claim: IndependenceClaim
    method: Method
    statistic: float
    p_value: float
    alpha: float
    decision: Decision
    seed: int
    permutations: int
    degenerate: bool = False
    note: str = field(default="", compare=False)

    def to_dict(self) -> dict:
        return {
            "claim": self.claim.to_dict(),
            "method": self.method,
            "statistic": self.statistic,
            "p_value": self.p_value,
            "alpha": self.alpha,
            "decision": self.decision,
            "seed": self.seed,
            "permutations": self.permutations,
            "degenerate": self.degenerate,
        }


def _decide(p: float, alpha: float) -> Decision:
    return "reject_independence" if p < alpha else "fail_to_reject"


class Bandwidth(float):
    """A kernel bandwidth; `degenerate` marks the all-rows-identical case."""

    degenerate: bool

    def __new__(cls, value: float, degenerate: bool = False):
        obj = super().__new__(cls, value)
        obj.degenerate = degenerate
        return obj


def median_bandwidth(values: np.ndarray) -> Bandwidth:
    """Median pairwise Euclidean distance between rows.

    Falls back to the smallest positive distance when the median is zero,
    and to 1 (flagged degenerate) when all rows coincide.
    """
    values = np.asarray(values, dtype=float)
    if values.ndim == 1:
        values = values[:, None]
    if values.shape[0] < 2:
        raise StatsError("median bandwidth needs at least 2 rows")
    dists = pdist(values)
    med = float(np.median(dists))
    if med > 0:
        return Bandwidth(med)
    positive = dists[dists > 0]
    if positive.size:
        return Bandwidth(float(positive.min()))
    return Bandwidth(1.0, degenerate=True)


def _is_constant(v: np.ndarray) -> bool:
    return bool(np.all(v == v[0]))


def _centered_distances(v: np.ndarray) -> np.ndarray:
    d = squareform(pdist(v[:, None]))
    return d - d.mean(axis=0, keepdims=True) - d.mean(axis=1, keepdims=True) + d.mean()


def dcov_test(x: Sequence[float], y: Sequence[float], config: TestConfig) -> TestResult:
    """Distance-covariance independence test with a permutation null.

    The statistic is n times the squared sample distance covariance from
    doubly-centered pairwise-distance matrices; y is permuted under the
    null. Constant inputs short-circuit to a degenerate non-rejection.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise StatsError("x and y must be one-dimensional with equal length")
    n = x.shape[0]
    if n < 4:
        raise StatsError(f"distance covariance needs at least 4 observations, got {n}")
    claim = IndependenceClaim("x", "y")
    if _is_constant(x) or _is_constant(y):
        return TestResult(claim, "distance_covariance", 0.0, 1.0, config.alpha,
                          "fail_to_reject", config.rng_seed, 0, degenerate=True,
                          note="constant input")
    if config.permutations < 99:
        raise StatsError("permutation null needs at least 99 permutations")

    a = _centered_distances(x)
    b = _centered_distances(y)
    observed = max(float((a * b).mean()), 0.0) * n
    rng = np.random.default_rng(config.rng_seed)
    hits = 0
    for _ in range(config.permutations):
        idx = rng.permutation(n)
        perm = max(float((a * b[np.ix_(idx, idx)]).mean()), 0.0) * n
        if perm >= observed:
            hits += 1
    p = (1 + hits) / (config.permutations + 1)
    return TestResult(claim, "distance_covariance", observed, p, config.alpha,
                      _decide(p, config.alpha), config.rng_seed, config.permutations)


def _gram(values: np.ndarray, bandwidth: Union[str, float]) -> np.ndarray:
    if values.ndim == 1:
        values = values[:, None]
    sigma = median_bandwidth(values) if bandwidth == "median_heuristic" else float(bandwidth)
    sq = squareform(pdist(values, "sqeuclidean"))
    return np.exp(-sq / (2.0 * sigma**2))


def _center(k: np.ndarray) -> np.ndarray:
    return k - k.mean(axis=0, keepdims=True) - k.mean(axis=1, keepdims=True) + k.mean()


def kci_test(
    x: Sequence[float],
    y: Sequence[float],
    z: np.ndarray,
    config: TestConfig,
) -> TestResult:
    """Kernel conditional-independence test of x and y given the columns
    of z.

    Gram matrices are centered and residualized against z by ridge-
    regularized kernel regression; the null is a gamma fit matched to the
    first two moments of the statistic (or a permutation of the
    residualized y-kernel when configured).
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    z = np.asarray(z, dtype=float)
    if z.ndim == 1:
        z = z[:, None]
    n = x.shape[0]
    if y.shape[0] != n or z.shape[0] != n:
        raise StatsError("x, y, and z must have matching row counts")
    if x.ndim != 1 or y.ndim != 1:
        raise StatsError("x and y must be one-dimensional")
    if n < 10:
        raise StatsError(f"the conditional test needs at least 10 observations, got {n}")
    if z.shape[1] < 1:
        raise StatsError("z needs at least one column")
    claim = IndependenceClaim("x", "y")
    if _is_constant(x) or _is_constant(y):
        return TestResult(claim, "kernel_conditional", 0.0, 1.0, config.alpha,
                          "fail_to_reject", config.rng_seed, 0, degenerate=True,
                          note="constant input")

    # the x-kernel also sees z, following the test's original formulation,
    # so residual dependence on z cannot masquerade as dependence on y
    kx = _center(_gram(np.column_stack([x, z / 2.0]), config.kernel_bandwidth))
    ky = _center(_gram(y, config.kernel_bandwidth))
    kz = _center(_gram(z, config.kernel_bandwidth))

    eps = config.kci_regularization
    try:
        rz = eps * np.linalg.inv(kz + eps * np.eye(n))
    except np.linalg.LinAlgError as exc:
        raise StatsError(
            f"singular regularized kernel system (regularization {config.kci_regularization})"
        ) from exc
    kxr = rz @ kx @ rz
    kyr = rz @ ky @ rz
    statistic = float((kxr * kyr).sum())

    if config.kci_null == "gamma_approximation":
        # the Hadamard product is the Gram matrix of the paired residual
        # features; its spectrum drives the weighted-chi-square null, and
        # the gamma fit matches that distribution's first two moments
        product = kxr * kyr
        mean = float(product.trace())
        var = 2.0 * float((product * product).sum())
        if mean <= 0 or var <= 0:
            return TestResult(claim, "kernel_conditional", statistic, 1.0, config.alpha,
                              "fail_to_reject", config.rng_seed, 0, degenerate=True,
                              note="degenerate null moments")
        shape = mean**2 / var
        scale = var / mean
        p = float(gamma_dist.sf(statistic, a=shape, scale=scale))
        permutations = 0
    else:
        if config.permutations < 99:
            raise StatsError("permutation null needs at least 99 permutations")
        rng = np.random.default_rng(config.rng_seed)
        hits = 0
        for _ in range(config.permutations):
            idx = rng.permutation(n)
            if float((kxr * kyr[np.ix_(idx, idx)]).sum()) >= statistic:
                hits += 1
        p = (1 + hits) / (config.permutations + 1)
        permutations = config.permutations
    return TestResult(claim, "kernel_conditional", statistic, p, config.alpha,
                      _decide(p, config.alpha), config.rng_seed, permutations)


def _standardize(v: np.ndarray) -> np.ndarray:
    std = v.std()
    if std == 0:
        return v - v.mean()
    return (v - v.mean()) / std


def test_claim(dataset: DatasetTable, claim: IndependenceClaim, config: TestConfig) -> TestResult:
    """Dispatch one claim: distance covariance when the conditioning set is
    empty, the kernel conditional test otherwise. Columns are standardized
    before any kernel computation."""
    for name in (claim.x, claim.y, *claim.conditioning):
        if name not in dataset:
            raise StatsError(f"dataset has no column {name!r}")
    x = _standardize(dataset.column(claim.x))
    y = _standardize(dataset.column(claim.y))
    if claim.unconditional:
        result = dcov_test(x, y, config)
    else:
        z = np.column_stack([_standardize(dataset.column(c)) for c in claim.conditioning])
        result = kci_test(x, y, z, config)
    return replace(result, claim=claim)


def derive_seed(base: int, claim: IndependenceClaim) -> int:
    """Per-claim seed: stable under claim-list reordering, so serial,
    parallel, and cached runs all agree."""
    digest = hashlib.blake2b(str(claim).encode("utf-8"), digest_size=4).digest()
    return (base ^ int.from_bytes(digest, "big")) & 0x7FFFFFFF


class TestCache:
    """Memo for completed claim tests, keyed by (dataset, claim, config)."""

    __test__ = False  # not a pytest class, despite the name

    def __init__(self):
        self._store: dict[tuple, TestResult] = {}

    def get_or_run(self, dataset: DatasetTable, claim: IndependenceClaim,
                   config: TestConfig) -> TestResult:
        key = (dataset.digest, claim, config.digest)
        if key not in self._store:
            self._store[key] = test_claim(dataset, claim, config)
        return self._store[key]

    def __len__(self) -> int:
        return len(self._store)


@dataclass(frozen=True)
class EvaluationReport:
    """Outcome of testing every implication of a DAG against a dataset."""

    dag_fingerprint: str
    hypothesis_set: HypothesisSet
    results: tuple[TestResult, ...]
    passed: int
    failed: int
    degenerate: int

    @property
    def consistent(self) -> bool:
        return self.failed == 0

    def failures(self) -> tuple[TestResult, ...]:
        return tuple(r for r in self.results if r.decision == "reject_independence")

    def to_dict(self) -> dict:
        return {
            "dag_fingerprint": self.dag_fingerprint,
            "results": [r.to_dict() for r in self.results],
            "summary": {"passed": self.passed, "failed": self.failed, "degenerate": self.degenerate},
        }


def evaluate_dag(
    dataset: DatasetTable,
    dag: CausalDag,
    config: TestConfig,
    cache: Optional[TestCache] = None,
) -> EvaluationReport:
    """Run every implied claim of `dag` against `dataset`.

    Results keep hypothesis-set order; each claim gets a seed derived from
    the base seed and the claim itself.
    """
    missing = sorted(set(dag.observed) - set(dataset.columns))
    if missing:
        raise StatsError("dataset is missing columns for: " + ", ".join(missing))
    hypothesis_set = implied_independencies(dag)
    cache = cache if cache is not None else TestCache()
    results = []
    for claim in hypothesis_set.claims:
        claim_config = replace(config, rng_seed=derive_seed(config.rng_seed, claim))
        results.append(cache.get_or_run(dataset, claim, claim_config))
    failed = sum(r.decision == "reject_independence" for r in results)
    degenerate = sum(r.degenerate for r in results)
    passed = len(results) - failed - degenerate
    return EvaluationReport(dag.fingerprint, hypothesis_set, tuple(results),
                            passed, failed, degenerate)
