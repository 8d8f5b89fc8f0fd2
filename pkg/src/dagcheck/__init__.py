"""Causal-DAG workbench: graphs to testable claims to data verdicts."""

from .graph import (
    CausalDag,
    CycleError,
    DagEdit,
    DagSyntaxError,
    Edge,
    GraphError,
    UnknownVariableError,
    Variable,
    Violation,
    parse_dag,
    relatives,
    serialize_dag,
    validate_dag,
)
from .dsep import (
    AdjustmentSearch,
    Path,
    PathLimitError,
    PathStatus,
    backdoor_paths,
    enumerate_paths,
    find_minimal_separator,
    is_d_separated,
    list_minimal_separators,
    minimal_adjustment_sets,
    path_status,
)
from .implications import HypothesisSet, IndependenceClaim, claim_canonicalize, implied_independencies
from .stats import (
    DatasetTable,
    EvaluationReport,
    StatsError,
    TestCache,
    TestConfig,
    TestResult,
    dcov_test,
    evaluate_dag,
    kci_test,
    median_bandwidth,
    test_claim,
)
from .synth import simulate_linear_gaussian

__version__ = "0.1.0"

from .refine import (
    EditProposal,
    FailureDiagnosis,
    RefinementSession,
    RefinementStep,
    apply_edit,
    diagnose_failure,
    refine,
)
from .repometrics import (
    CommitRecord,
    ConflictScan,
    FileChange,
    IssueRecord,
    MetricsError,
    PullRequestRecord,
    ReleaseMetrics,
    RepoEventLog,
    build_dataset,
    classify_bugs,
    classify_ci_service,
    compute_release_metrics,
    detect_merge_conflicts,
    load_event_log,
)
