"""Jaccard estimation from signatures, and the exact ground truths.

The match-count estimator is unbiased with variance J(1-J)/m because
components of a signature pair agree independently with probability J (the
discretized index for the real-valued algorithms).  For b-bit signatures a
random collision inflates the raw match rate to ``J + (1-J) 2^-b``; the
corrected estimator inverts that affine map and its variance picks up a
``(1-J) / ((2^b - 1) m)`` term.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import EmptyBagsWarning, IncompatibleSignatureError
from .signatures import BbitSignature, IcwsSignature, RealSignature, WeightedBag


@dataclass(frozen=True)
class JaccardEstimate:
    """Match-count estimate of the (discretized) Jaccard index."""

    matches: int
    m: int
    estimate: float
    corrected_estimate: float | None = None
    all_empty: bool = False


def _require(cond: bool, message: str) -> None:
    if not cond:
        raise IncompatibleSignatureError(message)


def estimate_jaccard(a, b) -> JaccardEstimate:
    """Estimate from two signatures of the same type, size, and provenance.

    Two real components count as matching when they are equal, including
    the all-components-unset case (+inf against +inf, empty input bags),
    which is reported with ``all_empty=True`` and estimates 1.
    """
    _require(type(a) is type(b), f"cannot compare {type(a).__name__} with {type(b).__name__}")
    _require(a.m == b.m, f"signature sizes differ: {a.m} != {b.m}")
    _require(a.config_tag == b.config_tag, "signatures use different draw configurations")
    corrected: float | None = None
    all_empty = False
    if isinstance(a, IcwsSignature):
        matches = int(np.count_nonzero((a.keys == b.keys) & (a.levels == b.levels)))
    elif isinstance(a, BbitSignature):
        _require(a.grid == b.grid, "signatures use different weight grids")
        _require(a.b == b.b, f"bit widths differ: {a.b} != {b.b}")
        matches = int(np.count_nonzero(a.values == b.values))
        corrected = bbit_corrected_estimate(matches / a.m, a.b)
    elif isinstance(a, RealSignature):
        _require(a.grid == b.grid, "signatures use different weight grids")
        matches = int(np.count_nonzero(a.values == b.values))
        all_empty = bool(np.all(np.isinf(a.values)) and np.all(np.isinf(b.values)))
    else:
        raise IncompatibleSignatureError(f"unsupported signature type {type(a).__name__}")
    return JaccardEstimate(
        matches=matches,
        m=a.m,
        estimate=matches / a.m,
        corrected_estimate=corrected,
        all_empty=all_empty,
    )


def estimator_variance(j: float, m: int) -> float:
    """Variance of the plain match-count estimator at true index ``j``."""
    if not 0.0 <= j <= 1.0:
        raise ValueError("jaccard index must lie in [0, 1]")
    if m < 1:
        raise ValueError("m must be at least 1")
    return j * (1.0 - j) / m


def bbit_corrected_estimate(raw: float, b: int) -> float:
    """Invert the random-collision bias of the raw b-bit match rate."""
    c = 2.0**-b
    return (raw - c) / (1.0 - c)


def bbit_variance(j: float, m: int, b: int) -> float:
    """Variance of the corrected b-bit estimator at true index ``j``.

    With collision rate ``c = 2^-b`` the raw match probability is
    ``p = j + (1-j) c``; propagating ``p (1-p) / m`` through the affine
    correction gives ``(j (1-j) + (1-j) / (2^b - 1)) / m``.
    """
    if not 0.0 <= j <= 1.0:
        raise ValueError("jaccard index must lie in [0, 1]")
    if m < 1:
        raise ValueError("m must be at least 1")
    if not 1 <= b <= 64:
        raise ValueError("b must be in [1, 64]")
    return (j * (1.0 - j) + (1.0 - j) / (2.0**b - 1.0)) / m


def _union_weights(a: WeightedBag, b: WeightedBag) -> tuple[np.ndarray, np.ndarray]:
    wa = {int(d): float(w) for d, w in a}
    wb = {int(d): float(w) for d, w in b}
    union = sorted(set(wa) | set(wb))
    va = np.array([wa.get(d, 0.0) for d in union])
    vb = np.array([wb.get(d, 0.0) for d in union])
    return va, vb


def exact_weighted_jaccard(a: WeightedBag, b: WeightedBag) -> float:
    """Sum of elementwise min weights over sum of max weights.

    Two bags with no positive weight at all have index 1 by the empty-set
    convention; that case raises :class:`EmptyBagsWarning` since it is
    usually an upstream mistake.
    """
    va, vb = _union_weights(a, b)
    denom = float(np.maximum(va, vb).sum())
    if denom == 0.0:
        warnings.warn("jaccard of two weightless bags defaults to 1", EmptyBagsWarning)
        return 1.0
    return float(np.minimum(va, vb).sum()) / denom


def exact_discretized_jaccard(a: WeightedBag, b: WeightedBag, grid) -> float:
    """The weighted Jaccard index after rounding both bags onto ``grid``.

    This is the quantity the real-valued signatures estimate; it differs
    from :func:`exact_weighted_jaccard` by at most the grid's relative
    error in each direction.
    """
    va, vb = _union_weights(a, b)
    da = np.array([grid.discretized(w) for w in va])
    db = np.array([grid.discretized(w) for w in vb])
    denom = float(np.maximum(da, db).sum())
    if denom == 0.0:
        warnings.warn("jaccard of two weightless bags defaults to 1", EmptyBagsWarning)
        return 1.0
    return float(np.minimum(da, db).sum()) / denom


def empirical_mse(estimates, truth: float) -> float:
    """Mean squared error of a nonempty sequence of estimates."""
    arr = np.asarray(list(estimates), dtype=np.float64)
    if arr.size == 0:
        raise ValueError("need at least one estimate")
    err = arr - truth
    return float(np.mean(err * err))
