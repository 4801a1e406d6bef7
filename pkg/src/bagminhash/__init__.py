"""Weighted minwise hashing with discretized-Jaccard match probability."""

from .discretization import (
    WeightDiscretization,
    binary_grid,
    explicit_grid,
    geometric_grid,
    grid_from_descriptor,
    single_precision_grid,
)
from .errors import (
    BagMinHashError,
    EmptyBagsWarning,
    IncompatibleSignatureError,
    IncompleteSignatureError,
    InvalidGridError,
    WeightOutOfRangeError,
)
from .estimation import (
    JaccardEstimate,
    bbit_corrected_estimate,
    bbit_variance,
    empirical_mse,
    estimate_jaccard,
    estimator_variance,
    exact_discretized_jaccard,
    exact_weighted_jaccard,
)
from .harness import (
    BINARY_CASE_NAMES,
    CANONICAL_TEST_CASES,
    CASES_BY_NAME,
    BenchmarkReport,
    TestCase,
    ZScoreReport,
    instantiate_test_case,
    mse_moments,
    random_bag,
    run_benchmark,
    run_verification,
)
from .rng import DEFAULT_CONFIG, RngConfig, SeededGenerator, config_from_tag
from .serialization import (
    dump_signature,
    load_signature,
    signature_from_bytes,
    signature_from_json,
    signature_to_bytes,
    signature_to_json,
)
from .signatures import (
    BbitSignature,
    IcwsSignature,
    RealSignature,
    WeightedBag,
    bagminhash1,
    bagminhash2,
    bbit_transform,
    enhanced_signature,
    icws_signature,
    naive_signature,
)

__version__ = "0.1.0"

__all__ = [
    "BINARY_CASE_NAMES",
    "BagMinHashError",
    "BbitSignature",
    "BenchmarkReport",
    "CANONICAL_TEST_CASES",
    "CASES_BY_NAME",
    "DEFAULT_CONFIG",
    "EmptyBagsWarning",
    "IcwsSignature",
    "IncompatibleSignatureError",
    "IncompleteSignatureError",
    "InvalidGridError",
    "JaccardEstimate",
    "RealSignature",
    "RngConfig",
    "SeededGenerator",
    "TestCase",
    "WeightDiscretization",
    "WeightOutOfRangeError",
    "WeightedBag",
    "ZScoreReport",
    "bagminhash1",
    "bagminhash2",
    "bbit_corrected_estimate",
    "bbit_transform",
    "bbit_variance",
    "binary_grid",
    "config_from_tag",
    "dump_signature",
    "empirical_mse",
    "enhanced_signature",
    "estimate_jaccard",
    "estimator_variance",
    "exact_discretized_jaccard",
    "exact_weighted_jaccard",
    "explicit_grid",
    "geometric_grid",
    "grid_from_descriptor",
    "icws_signature",
    "instantiate_test_case",
    "load_signature",
    "mse_moments",
    "naive_signature",
    "random_bag",
    "run_benchmark",
    "run_verification",
    "signature_from_bytes",
    "signature_from_json",
    "signature_to_bytes",
    "signature_to_json",
    "single_precision_grid",
]
