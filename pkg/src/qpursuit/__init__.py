"""Sparse recovery by pair-wise greedy pursuit.

Implements orthogonal matching pursuit, its generalized variant, and a
pair-selecting pursuit that picks the two-column subspace best explaining
the residual each iteration, plus coherence analytics, a deterministic
pair-search engine, a seeded Monte Carlo experiment harness, and file
formats with a CLI.
"""

from .analytics import (
    CoherenceReport,
    DecayCheckRow,
    DecayRateReport,
    coherence_decay_check,
    coherence_f,
    exact_delta2,
    mutual_coherence,
    residual_decay_report,
    theoretical_alpha,
    welch_lower_bound,
)
from .errors import (
    EnumerationGuard,
    NearCollinearPair,
    NoAdmissiblePair,
    PreconditionViolated,
    PursuitError,
    RankDeficient,
    ZeroColumn,
)
from .estimators import GOMPRegressor, OMPRegressor, QOMPRegressor
from .fileio import (
    FileFormatError,
    read_matrix,
    read_report,
    read_vector,
    write_frequency_csv,
    write_matrix,
    write_report,
)
from .experiments import (
    ALGORITHM_CHOICES,
    CellResult,
    ExperimentConfig,
    ExperimentReport,
    ProblemInstance,
    exact_recovery,
    make_instance,
    run_decay_experiment,
    run_frequency_experiment,
)
from .linalg import (
    Residual,
    SensingMatrix,
    SparseSignal,
    as_sensing_matrix,
    least_squares_on_support,
    normalize_columns,
    pair_projection_coefficients,
    pair_residual_sq,
)
from .oracle import best_support
from .pair_search import (
    ExclusionSet,
    PairSearchConfig,
    PairSelection,
    evaluate_pair_block,
    select_best_pair,
    total_pair_count,
)
from .pursuit import RecoveryResult, StoppingRule, gomp, omp, qomp, refine_support
from .sampling import (
    add_noise,
    derive_seed,
    gaussian_matrix,
    noise_vector,
    sparse_signal,
)

__version__ = "0.1.0"

__all__ = [
    "ALGORITHM_CHOICES",
    "CellResult",
    "CoherenceReport",
    "DecayCheckRow",
    "DecayRateReport",
    "EnumerationGuard",
    "ExclusionSet",
    "ExperimentConfig",
    "ExperimentReport",
    "FileFormatError",
    "GOMPRegressor",
    "NearCollinearPair",
    "NoAdmissiblePair",
    "OMPRegressor",
    "PairSearchConfig",
    "PairSelection",
    "PreconditionViolated",
    "ProblemInstance",
    "PursuitError",
    "QOMPRegressor",
    "RankDeficient",
    "RecoveryResult",
    "Residual",
    "SensingMatrix",
    "SparseSignal",
    "StoppingRule",
    "ZeroColumn",
    "add_noise",
    "as_sensing_matrix",
    "best_support",
    "coherence_decay_check",
    "coherence_f",
    "derive_seed",
    "evaluate_pair_block",
    "exact_delta2",
    "exact_recovery",
    "gaussian_matrix",
    "gomp",
    "least_squares_on_support",
    "make_instance",
    "mutual_coherence",
    "noise_vector",
    "normalize_columns",
    "omp",
    "pair_projection_coefficients",
    "pair_residual_sq",
    "qomp",
    "read_matrix",
    "read_report",
    "read_vector",
    "refine_support",
    "residual_decay_report",
    "run_decay_experiment",
    "run_frequency_experiment",
    "select_best_pair",
    "sparse_signal",
    "theoretical_alpha",
    "total_pair_count",
    "welch_lower_bound",
    "write_frequency_csv",
    "write_matrix",
    "write_report",
]
