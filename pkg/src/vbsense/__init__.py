"""Verification-based sparse recovery over irregular sensing graphs.

The package covers the full experimental loop: sampling random bipartite
sensing graphs with prescribed node-degree distributions, recovering
sparse signals with the SBB verification rules (zero checks, degree-one
checks, equal checks), estimating success thresholds by seeded Monte
Carlo with binary search over the density factor, and searching degree
distributions that maximize the threshold.
"""

__version__ = "0.1.0"

from .analysis import (
    ProbeResult,
    StoppingCriteria,
    ThresholdResult,
    TrajectoryStats,
    TrialSet,
    classify_trajectory,
    find_threshold,
    run_trials,
    trajectory,
)
from .distributions import (
    DegreeDistribution,
    distribution_from_json,
    make_distribution,
    mean_degree,
    node_counts,
    parse_distribution,
)
from .ensemble import (
    EnsembleSpec,
    MeasurementVector,
    SensingGraph,
    SignalModel,
    SignalVector,
    WeightModel,
    measure,
    nearest_feasible_n,
    sample_graph,
    sample_instance,
    sample_signal,
)
from .errors import (
    AlreadyVerified,
    BadBracket,
    BudgetExhausted,
    ConflictingAssignment,
    DimensionMismatch,
    DuplicateDegree,
    InfeasibleEdgeBudget,
    NonPositiveDegree,
    NonUnitMass,
    OracleRequired,
    RepairStall,
    ValidationError,
    VbsenseError,
)
from .optimizer import (
    Candidate,
    EvaluatorConfig,
    OptimizeResult,
    SearchSpace,
    enumerate_bimodal,
    enumerate_sparse,
    iter_sparse,
    optimize,
)
from .partitions import (
    PartitionSnapshot,
    TheoremCheckResult,
    check_round_theorems,
    compute_partitions,
    round1_predicted_set,
    round2_predicted_set,
)
from .recovery import (
    EventLog,
    RecoveryOptions,
    RecoveryReport,
    RecoveryState,
    VerificationEvent,
    apply_d1cn,
    apply_ecn,
    apply_zcn,
    check_false_verification,
    init_state,
    recompute_residuals,
    residuals_from_oracle,
    run_sbb,
    verify_and_peel,
)
