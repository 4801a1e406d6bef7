"""Statistical verification and benchmarking of the signature algorithms.

Verification works on small named test cases: a list of weight pairs, one
per element, giving that element's weight in each of two bags.  Each
replication assigns fresh random 64-bit ids to the pairs, shuffles both
bags, hashes them, and estimates the Jaccard index from the signatures.
Across N replications the match counts are binomial, so the empirical mean
squared error has known moments; its z-score flags estimator bias or
miscalibrated variance without any tolerance tuning.

Replications are independent: replication ``r`` draws everything from a
generator seeded by (master seed, r), so reports do not depend on
execution order or batching.

Benchmarks time signature computation over random bags (ids uniform,
weights Exp(1)), excluding bag generation, and report a median-of-means
wall time plus the peak number of live Poisson process records.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import _kernels
from .discretization import WeightDiscretization
from .errors import WeightOutOfRangeError
from .estimation import empirical_mse, estimate_jaccard
from .hashing import replication_seed
from .rng import DEFAULT_CONFIG, RngConfig, SeededGenerator
from .signatures import (
    WeightedBag,
    bagminhash1,
    bagminhash2,
    enhanced_signature,
    icws_signature,
    naive_signature,
)

_SIGNATURE_FN = {
    "naive": naive_signature,
    "enhanced": enhanced_signature,
    "bmh1": bagminhash1,
    "bmh2": bagminhash2,
}


@dataclass(frozen=True)
class TestCase:
    """A named list of (weight in A, weight in B) pairs, one per element."""

    __test__ = False  # not a pytest class, despite the name

    name: str
    weight_pairs: tuple[tuple[float, float], ...]

    def __post_init__(self) -> None:
        if not self.weight_pairs:
            raise ValueError("a test case needs at least one weight pair")
        for wa, wb in self.weight_pairs:
            if not (math.isfinite(wa) and math.isfinite(wb) and wa >= 0.0 and wb >= 0.0):
                raise ValueError(f"weights must be finite and nonnegative: {(wa, wb)}")

    @property
    def weights_a(self) -> np.ndarray:
        return np.array([wa for wa, _ in self.weight_pairs])

    @property
    def weights_b(self) -> np.ndarray:
        return np.array([wb for _, wb in self.weight_pairs])

    @property
    def max_weight(self) -> float:
        return float(max(max(wa, wb) for wa, wb in self.weight_pairs))

    @property
    def expected_jaccard(self) -> float:
        """The continuous weighted Jaccard index of the two bags."""
        mins = sum(min(wa, wb) for wa, wb in self.weight_pairs)
        maxs = sum(max(wa, wb) for wa, wb in self.weight_pairs)
        return mins / maxs

    def discretized_jaccard(self, grid: WeightDiscretization) -> float:
        """The index after rounding every weight down onto ``grid``."""
        mins = 0.0
        maxs = 0.0
        for wa, wb in self.weight_pairs:
            da = grid.discretized(wa)
            db = grid.discretized(wb)
            mins += min(da, db)
            maxs += max(da, db)
        return mins / maxs if maxs > 0.0 else 1.0


# Reconstructed coverage: binary-weight cases at J in {1, 1/2, 1/3, 0},
# proportionally scaled weights, mixed overlap, a wide dynamic range, and
# a single-element bag (n much smaller than m).
CANONICAL_TEST_CASES: tuple[TestCase, ...] = (
    TestCase("binary_identical", ((1.0, 1.0), (1.0, 1.0))),
    TestCase("binary_half", ((1.0, 1.0), (1.0, 1.0), (1.0, 0.0), (0.0, 1.0))),
    TestCase("binary_third", ((1.0, 1.0), (1.0, 0.0), (0.0, 1.0))),
    TestCase("binary_disjoint", ((1.0, 0.0), (0.0, 1.0))),
    TestCase("scaled_half", ((2.0, 1.0), (4.0, 2.0), (6.0, 3.0))),
    TestCase("mixed_04", ((2.0, 1.0), (1.0, 3.0))),
    TestCase("wide_range", ((1e-3, 1e-2), (1e2, 1e1))),
    TestCase("single_quarter", ((1.0, 4.0),)),
)

CASES_BY_NAME = {tc.name: tc for tc in CANONICAL_TEST_CASES}

BINARY_CASE_NAMES = ("binary_identical", "binary_half", "binary_third", "binary_disjoint")


def instantiate_test_case(tc: TestCase, g: SeededGenerator) -> tuple[WeightedBag, WeightedBag]:
    """Draw fresh element ids for the case's pairs and build both bags.

    Ids come one block each from ``g`` (redrawn on duplicates), zero
    weights are dropped, and each bag is then shuffled in place with
    index draws from the same stream.
    """
    ids: list[int] = []
    for _ in tc.weight_pairs:
        d = g.next_u64()
        while d in ids:
            d = g.next_u64()
        ids.append(d)
    items_a = [(d, wa) for d, (wa, _) in zip(ids, tc.weight_pairs) if wa > 0.0]
    items_b = [(d, wb) for d, (_, wb) in zip(ids, tc.weight_pairs) if wb > 0.0]
    for items in (items_a, items_b):
        for i in range(len(items) - 1, 0, -1):
            j = g.uniform_index(i + 1) - 1
            items[i], items[j] = items[j], items[i]
    return WeightedBag.from_pairs(items_a), WeightedBag.from_pairs(items_b)


def mse_moments(j: float, m: int, n: int) -> tuple[float, float]:
    """Exact mean and variance of the empirical MSE of match-count estimates.

    With X ~ Binomial(m, j) matches per replication, the squared error
    (X/m - j)^2 has mean j(1-j)/m; averaging N independent replications
    scales the variance of that squared error by 1/N, giving
    ``j^2 (1-j)^2 / m^2 * (2 - 6/m) / N + j (1-j) / (m^3 N)``.
    """
    if not 0.0 <= j <= 1.0:
        raise ValueError("jaccard index must lie in [0, 1]")
    if m < 1 or n < 1:
        raise ValueError("m and n must be at least 1")
    p = j * (1.0 - j)
    expected = p / m
    variance = (p * p / (m * m) * (2.0 - 6.0 / m) + p / m**3) / n
    return expected, variance


@dataclass(frozen=True)
class ZScoreReport:
    """Outcome of one verification cell."""

    test_case: str
    algorithm: str
    m: int
    n_examples: int
    jaccard: float
    empirical_mse: float
    expected_mse: float
    variance_mse: float
    z: float
    seed: int

    def to_dict(self) -> dict:
        return {
            "test_case": self.test_case,
            "algorithm": self.algorithm,
            "m": self.m,
            "n_examples": self.n_examples,
            "jaccard": self.jaccard,
            "empirical_mse": self.empirical_mse,
            "expected_mse": self.expected_mse,
            "variance_mse": self.variance_mse,
            "z": self.z,
            "seed": self.seed,
        }


def _zscore(empirical: float, expected: float, variance: float) -> float:
    if variance == 0.0:
        if empirical == expected:
            return 0.0
        return math.inf if empirical > expected else -math.inf
    return (empirical - expected) / math.sqrt(variance)


def _check_verification_args(algorithm, tc, m, n_examples, grid) -> None:
    if algorithm not in ("naive", "enhanced", "bmh1", "bmh2", "icws"):
        raise ValueError(f"unknown algorithm {algorithm!r}")
    if n_examples < 1:
        raise ValueError("need at least one example")
    if m < 1:
        raise ValueError("m must be at least 1")
    if algorithm == "icws":
        if not (np.any(tc.weights_a > 0.0) and np.any(tc.weights_b > 0.0)):
            raise ValueError("icws verification needs positive weight on both sides")
        return
    if grid is None:
        raise ValueError(f"{algorithm} needs a weight grid")
    if tc.max_weight > grid.max_weight:
        raise WeightOutOfRangeError(
            f"case weight {tc.max_weight} exceeds grid maximum {grid.max_weight}"
        )


def _python_match_counts(algorithm, tc, m, n_examples, seed, grid, config) -> np.ndarray:
    matches = np.empty(n_examples, dtype=np.int64)
    for rep in range(n_examples):
        g = SeededGenerator(replication_seed(seed, rep), config)
        bag_a, bag_b = instantiate_test_case(tc, g)
        if algorithm == "icws":
            sig_a = icws_signature(bag_a, m, config=config, engine="python")
            sig_b = icws_signature(bag_b, m, config=config, engine="python")
        else:
            fn = _SIGNATURE_FN[algorithm]
            sig_a = fn(bag_a, grid, m, config=config, engine="python")
            sig_b = fn(bag_b, grid, m, config=config, engine="python")
        matches[rep] = estimate_jaccard(sig_a, sig_b).matches
    return matches


def match_counts(
    algorithm: str,
    tc: TestCase,
    m: int,
    n_examples: int,
    seed: int,
    *,
    grid: WeightDiscretization | None = None,
    config: RngConfig = DEFAULT_CONFIG,
    engine: str = "compiled",
) -> np.ndarray:
    """Signature match counts for each of ``n_examples`` replications."""
    _check_verification_args(algorithm, tc, m, n_examples, grid)
    if engine == "python":
        return _python_match_counts(algorithm, tc, m, n_examples, seed, grid, config)
    if engine != "compiled":
        raise ValueError(f"unknown engine: {engine!r}")
    counts, _ = _kernels.verify_batch(
        algorithm, tc.weights_a, tc.weights_b, m, n_examples,
        seed, None if algorithm == "icws" else grid, config,
    )
    return counts


def run_verification(
    algorithm: str,
    tc: TestCase,
    m: int,
    n_examples: int,
    seed: int,
    *,
    grid: WeightDiscretization | None = None,
    config: RngConfig = DEFAULT_CONFIG,
    engine: str = "compiled",
) -> ZScoreReport:
    """Hash N instantiations of a test case and z-score the empirical MSE.

    The ground truth is the discretized Jaccard index for the grid-based
    algorithms and the continuous one for icws.
    """
    counts = match_counts(
        algorithm, tc, m, n_examples, seed, grid=grid, config=config, engine=engine
    )
    truth = tc.expected_jaccard if algorithm == "icws" else tc.discretized_jaccard(grid)
    emp = empirical_mse(counts / m, truth)
    expected, variance = mse_moments(truth, m, n_examples)
    return ZScoreReport(
        test_case=tc.name,
        algorithm=algorithm,
        m=m,
        n_examples=n_examples,
        jaccard=truth,
        empirical_mse=emp,
        expected_mse=expected,
        variance_mse=variance,
        z=_zscore(emp, expected, variance),
        seed=seed,
    )


def bbit_match_counts(
    algorithm: str,
    tc: TestCase,
    m: int,
    n_examples: int,
    seed: int,
    bs: Sequence[int],
    *,
    grid: WeightDiscretization,
    config: RngConfig = DEFAULT_CONFIG,
) -> np.ndarray:
    """Match counts after b-bit truncation, one column per entry of ``bs``."""
    if algorithm not in ("naive", "enhanced", "bmh1", "bmh2"):
        raise ValueError("b-bit truncation applies to the real-valued algorithms")
    _check_verification_args(algorithm, tc, m, n_examples, grid)
    _, bcounts = _kernels.verify_batch(
        algorithm, tc.weights_a, tc.weights_b, m, n_examples, seed, grid, config, bs=bs
    )
    return bcounts


def random_bag(master: int, rep: int, n: int, config: RngConfig = DEFAULT_CONFIG) -> WeightedBag:
    """Benchmark input: ``n`` random ids with Exp(1) weights."""
    ids, weights = _kernels.random_bag(master, rep, n, config)
    return WeightedBag(ids, weights)


@dataclass(frozen=True)
class BenchmarkReport:
    algorithm: str
    m: int
    n: int
    repetitions: int
    mean_ns: float
    peak_objects: int
    times_ns: tuple[int, ...] = field(repr=False, default=())

    def csv_row(self) -> str:
        return f"{self.algorithm},{self.m},{self.n},{self.mean_ns:.0f},{self.peak_objects}"

    @staticmethod
    def csv_header() -> str:
        return "algo,m,n,mean_ns,peak_objects"


def _median_of_means(times: list[int], groups: int = 5) -> float:
    groups = min(groups, len(times))
    chunks = np.array_split(np.asarray(times, dtype=np.float64), groups)
    return float(np.median([chunk.mean() for chunk in chunks]))


def run_benchmark(
    algorithm: str,
    m: int,
    n: int,
    repetitions: int,
    seed: int,
    *,
    grid: WeightDiscretization | None = None,
    config: RngConfig = DEFAULT_CONFIG,
    presort_descending: bool = False,
) -> BenchmarkReport:
    """Time signature computation on pregenerated random bags.

    Bag generation and the one warmup pass are excluded from timing.
    ``presort_descending`` feeds each bag in decreasing weight order,
    which tightens the running max sooner for the heap-based variants.
    """
    if repetitions < 1 or n < 1:
        raise ValueError("need at least one repetition and one element")
    if algorithm != "icws" and grid is None:
        raise ValueError(f"{algorithm} needs a weight grid")
    bags = [random_bag(seed, rep, n, config) for rep in range(repetitions)]
    if presort_descending:
        for i, bag in enumerate(bags):
            order = np.argsort(-bag.weights, kind="stable")
            bags[i] = WeightedBag(bag.ids[order], bag.weights[order])

    def compute(bag: WeightedBag) -> int:
        if algorithm == "icws":
            _kernels.run_icws(bag, m, config)
            return 0
        _, peak = _kernels.run_real(algorithm, bag, grid, m, config)
        return peak

    warm_peak = compute(bags[0])  # warmup pass, untimed
    times: list[int] = []
    peaks: list[int] = [warm_peak]
    for bag in bags:
        t0 = time.perf_counter_ns()
        peaks.append(compute(bag))
        times.append(time.perf_counter_ns() - t0)
    return BenchmarkReport(
        algorithm=algorithm,
        m=m,
        n=n,
        repetitions=repetitions,
        mean_ns=_median_of_means(times),
        peak_objects=max(peaks),
        times_ns=tuple(times),
    )
