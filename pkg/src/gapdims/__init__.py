"""Almost-sure Assouad-like dimensions of complementary sets of gap sequences."""

from .cantor import (
    FormulaEstimate,
    box_dim_estimate,
    lower_phi_dim_formula,
    upper_phi_dim_formula,
)
from .dimfuncs import (
    DepthTable,
    DimensionFunction,
    classify_regime,
    depth_function,
    make_dimension_function,
)
from .errors import (
    DepthUnsupportedError,
    GapdimsError,
    InsufficientDepthError,
    InvalidRangeError,
    InvalidRatioError,
    NoAdmissibleWindowError,
    NotDecreasingError,
    NotLevelComparableError,
    NotNormalizedError,
    OutOfDomainError,
    OutOfRegimeError,
    TruncationViolationError,
)
from .covering import (
    CoverQuery,
    DimensionEstimate,
    WindowPolicy,
    cover_count,
    enumerate_windows,
    estimate_dimension,
)
from .experiments import (
    ExperimentReport,
    TailCheck,
    TrialStats,
    binomial_tail_check,
    empty_bin_probability,
    interval_length_lemma_check,
    max_load_statistic,
    run_dichotomy_experiment,
)
from .randmodel import ApproxSet, build_set, rank_slots, sample_order, slot_counts
from .rng import derive_seed, mix64, uniforms
from .sequences import (
    GapSequence,
    LevelProfile,
    check_level_comparable,
    level_sums,
    make_sequence,
)

__version__ = "0.1.0"

__all__ = [
    "ApproxSet",
    "DepthTable",
    "DimensionFunction",
    "FormulaEstimate",
    "GapSequence",
    "GapdimsError",
    "LevelProfile",
    "CoverQuery",
    "DimensionEstimate",
    "ExperimentReport",
    "TailCheck",
    "TrialStats",
    "WindowPolicy",
    "binomial_tail_check",
    "box_dim_estimate",
    "build_set",
    "check_level_comparable",
    "classify_regime",
    "cover_count",
    "depth_function",
    "derive_seed",
    "empty_bin_probability",
    "enumerate_windows",
    "estimate_dimension",
    "interval_length_lemma_check",
    "level_sums",
    "max_load_statistic",
    "rank_slots",
    "run_dichotomy_experiment",
    "slot_counts",
    "lower_phi_dim_formula",
    "make_dimension_function",
    "make_sequence",
    "mix64",
    "sample_order",
    "uniforms",
    "upper_phi_dim_formula",
]
