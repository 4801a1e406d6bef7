"""Weighted bags, signature types, and the signature algorithms.

All real-valued algorithms compute the same object: component ``j`` of the
signature is the minimum over all (element, grid level) pairs with ``v_k <=
w(element)`` of an exponential draw with rate ``(v_k - v_{k-1}) / m`` that
is seeded purely by the pair and the component.  Two bags therefore collide
on a component with probability equal to their discretized Jaccard index.

Four strategies realize that definition with identical output
distributions (and bit-identical outputs for the last two):

* ``naive_signature``     per-pair, per-component draws; O(K m n)
* ``enhanced_signature``  per-pair combined process, ascending points with
                          an early stop at the running max; useful for
                          small K (binary weights in particular)
* ``bagminhash1``         one process per element over the whole grid,
                          lazily split toward relevant levels, a min-heap
                          ordering the frontier
* ``bagminhash2``         same as bagminhash1 but with element processing
                          split into a find-the-first-relevant-point phase
                          and a shared drain phase over a global buffer;
                          bit-identical to bagminhash1 by construction

The ICWS baseline and the b-bit truncation live here too.  Every function
takes ``engine="compiled"`` (numba kernels) or ``engine="python"`` (the
reference implementations in this file); both engines produce identical
bytes, which the test suite pins.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass
from typing import Iterable, Iterator

import numpy as np

from .discretization import WeightDiscretization
from .errors import WeightOutOfRangeError
from .hashing import component_seed, icws_seed, level_pair_seed
from .maxtracker import MaxTracker
from .poisson import PoissonProcess
from .rng import DEFAULT_CONFIG, RngConfig, SeededGenerator

ALGORITHMS = ("naive", "enhanced", "bmh1", "bmh2", "icws")


class WeightedBag:
    """A set of 64-bit element ids, each with a nonnegative finite weight."""

    __slots__ = ("ids", "weights")

    def __init__(self, ids: np.ndarray, weights: np.ndarray) -> None:
        ids = np.asarray(ids, dtype=np.uint64)
        weights = np.asarray(weights, dtype=np.float64)
        if ids.shape != weights.shape or ids.ndim != 1:
            raise ValueError("ids and weights must be 1-d arrays of equal length")
        if not np.all(np.isfinite(weights)) or np.any(weights < 0.0):
            raise ValueError("weights must be finite and nonnegative")
        if np.unique(ids).size != ids.size:
            raise ValueError("duplicate element ids in bag")
        self.ids = ids
        self.weights = weights

    @classmethod
    def from_pairs(cls, pairs: Iterable[tuple[int, float]]) -> "WeightedBag":
        ids, weights = [], []
        for d, w in pairs:
            ids.append(d)
            weights.append(w)
        return cls(np.array(ids, dtype=np.uint64), np.array(weights, dtype=np.float64))

    def __len__(self) -> int:
        return int(self.ids.size)

    def __iter__(self) -> Iterator[tuple[int, float]]:
        for d, w in zip(self.ids, self.weights):
            yield int(d), float(w)

    def __repr__(self) -> str:
        return f"WeightedBag(n={len(self)})"


@dataclass(frozen=True, eq=False)
class RealSignature:
    """Real-valued signature; unset components are +inf."""

    values: np.ndarray
    grid: dict
    config_tag: str
    algorithm: str

    @property
    def m(self) -> int:
        return int(self.values.size)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, RealSignature):
            return NotImplemented
        return (
            np.array_equal(self.values, other.values)
            and self.grid == other.grid
            and self.config_tag == other.config_tag
        )


@dataclass(frozen=True, eq=False)
class BbitSignature:
    """Truncated signature with b-bit integer components."""

    values: np.ndarray
    b: int
    grid: dict
    config_tag: str
    algorithm: str

    @property
    def m(self) -> int:
        return int(self.values.size)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, BbitSignature):
            return NotImplemented
        return (
            self.b == other.b
            and np.array_equal(self.values, other.values)
            and self.grid == other.grid
            and self.config_tag == other.config_tag
        )


@dataclass(frozen=True, eq=False)
class IcwsSignature:
    """ICWS signature; components are (element id, level) pairs."""

    keys: np.ndarray
    levels: np.ndarray
    config_tag: str
    algorithm: str = "icws"

    @property
    def m(self) -> int:
        return int(self.keys.size)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, IcwsSignature):
            return NotImplemented
        return (
            np.array_equal(self.keys, other.keys)
            and np.array_equal(self.levels, other.levels)
            and self.config_tag == other.config_tag
        )


def _require_power_of_two(m: int) -> None:
    if m < 1 or m & (m - 1):
        raise ValueError(f"signature size must be a power of two, got {m}")


def _check_bag_fits_grid(bag: WeightedBag, grid: WeightDiscretization) -> None:
    if len(bag) and float(bag.weights.max()) > grid.max_weight:
        offender = float(bag.weights.max())
        raise WeightOutOfRangeError(
            f"bag weight {offender!r} exceeds grid maximum {grid.max_weight!r}"
        )


# --- reference implementations ----------------------------------------------


def _naive_py(bag: WeightedBag, grid, m: int, config: RngConfig) -> np.ndarray:
    h = np.full(m, math.inf)
    v1 = grid.min_positive
    for d, w in bag:
        if w < v1:
            continue
        kmax = grid.index_of(w)
        for k in range(1, kmax + 1):
            g = SeededGenerator(level_pair_seed(d, k), config)
            rate = (grid.value_at(k) - grid.value_at(k - 1)) / m
            for i in range(m):
                x = g.exponential(rate)
                if x < h[i]:
                    h[i] = x
    return h


def _enhanced_py(bag: WeightedBag, grid, m: int, config: RngConfig) -> np.ndarray:
    tracker = MaxTracker(m)
    v1 = grid.min_positive
    for d, w in bag:
        if w < v1:
            continue
        kmax = grid.index_of(w)
        for k in range(1, kmax + 1):
            g = SeededGenerator(level_pair_seed(d, k), config)
            p = PoissonProcess(0.0, g, k - 1, k, w, grid, m)
            p.next_point()
            while p.x <= tracker.current_max:
                tracker.update(p.component - 1, p.x)
                p.next_point()
    return tracker.components()


def _bmh1_py(bag: WeightedBag, grid, m: int, config: RngConfig) -> np.ndarray:
    tracker = MaxTracker(m)
    v1 = grid.min_positive
    for d, w in bag:
        if w < v1:
            continue
        p = PoissonProcess.for_element(d, w, grid, m, config)
        p.next_point()
        if p.fully_relevant:
            tracker.update(p.component - 1, p.x)
        heap: list = []  # (x, tiebreak, process); fresh per element
        seq = 0
        while p.x <= tracker.current_max:
            while p.splittable and p.partially_relevant:
                sib = p.split()
                if p.fully_relevant:
                    tracker.update(p.component - 1, p.x)
                if sib.partially_relevant:
                    sib.next_point()
                    if sib.fully_relevant:
                        tracker.update(sib.component - 1, sib.x)
                    if sib.x <= tracker.current_max:
                        heapq.heappush(heap, (sib.x, seq, sib))
                        seq += 1
            if p.fully_relevant:
                p.next_point()
                tracker.update(p.component - 1, p.x)
                if p.x <= tracker.current_max:
                    heapq.heappush(heap, (p.x, seq, p))
                    seq += 1
            if not heap:
                break
            _, _, p = heapq.heappop(heap)
    return tracker.components()


def _bmh2_py(bag: WeightedBag, grid, m: int, config: RngConfig) -> np.ndarray:
    tracker = MaxTracker(m)
    buffer: list = []  # max-heap over (-x, tiebreak, process)
    bufseq = 0
    v1 = grid.min_positive
    for d, w in bag:
        if w < v1:
            continue
        p = PoissonProcess.for_element(d, w, grid, m, config)
        p.next_point()
        if p.fully_relevant:
            tracker.update(p.component - 1, p.x)
        heap: list = []
        seq = 0
        while p.x <= tracker.current_max:
            # Unlike bagminhash1, stop descending at the first fully
            # relevant process: its point is already final for this round.
            while p.splittable and p.partially_relevant and not p.fully_relevant:
                sib = p.split()
                if p.fully_relevant:
                    tracker.update(p.component - 1, p.x)
                if sib.partially_relevant:
                    sib.next_point()
                    if sib.fully_relevant:
                        tracker.update(sib.component - 1, sib.x)
                    if sib.x <= tracker.current_max:
                        heapq.heappush(heap, (sib.x, seq, sib))
                        seq += 1
            if p.fully_relevant:
                heapq.heappush(heap, (p.x, seq, p))
                seq += 1
                break
            if not heap:
                break
            _, _, p = heapq.heappop(heap)
        # Keep the still-useful frontier (ascending drain keeps the order
        # deterministic), evicting buffered processes the shrinking max
        # has outdated.
        hmax = tracker.current_max
        while heap:
            x, _, q = heapq.heappop(heap)
            if x <= hmax:
                heapq.heappush(buffer, (-x, bufseq, q))
                bufseq += 1
        while buffer and -buffer[0][0] > hmax:
            heapq.heappop(buffer)
    # Phase two: drain the buffer into one min-heap and finish exactly as
    # bagminhash1 would.
    heap = []
    seq = 0
    hmax = tracker.current_max
    while buffer:
        negx, _, q = heapq.heappop(buffer)
        if -negx <= hmax:
            heapq.heappush(heap, (q.x, seq, q))
            seq += 1
    while heap:
        _, _, p = heapq.heappop(heap)
        if p.x > tracker.current_max:
            break
        while p.splittable and p.partially_relevant:
            sib = p.split()
            if p.fully_relevant:
                tracker.update(p.component - 1, p.x)
            if sib.partially_relevant:
                sib.next_point()
                if sib.fully_relevant:
                    tracker.update(sib.component - 1, sib.x)
                if sib.x <= tracker.current_max:
                    heapq.heappush(heap, (sib.x, seq, sib))
                    seq += 1
        if p.fully_relevant:
            p.next_point()
            tracker.update(p.component - 1, p.x)
            if p.x <= tracker.current_max:
                heapq.heappush(heap, (p.x, seq, p))
                seq += 1
    return tracker.components()


def _bbit_py(values: np.ndarray, b: int, config: RngConfig) -> np.ndarray:
    out = np.empty(values.size, dtype=np.uint64)
    for i, h in enumerate(values):
        g = SeededGenerator(component_seed(float(h)), config)
        out[i] = g.uniform_bits(b)
    return out


def _icws_py(bag: WeightedBag, m: int, config: RngConfig):
    keys = np.zeros(m, dtype=np.uint64)
    levels = np.zeros(m, dtype=np.int64)
    best = np.full(m, math.inf)
    for d, w in bag:
        if w == 0.0:
            continue
        logw = math.log(w)
        for q in range(m):
            g = SeededGenerator(icws_seed(d, q), config)
            # Draw order per component: r as Exp+Exp, c as Exp+Exp, then
            # the uniform offset.  Gamma(2,1) as a sum of two unit
            # exponentials keeps the stream layout trivial.
            r = g._exp_unit() + g._exp_unit()
            c = g._exp_unit() + g._exp_unit()
            beta = g.uniform_double()
            t = math.floor(logw / r + beta)
            ln_y = r * (t - beta)
            ln_a = math.log(c) - ln_y - r
            if ln_a < best[q]:
                best[q] = ln_a
                keys[q] = d
                levels[q] = int(t)
    return keys, levels


# --- engine dispatch ---------------------------------------------------------


def _run_real(algo: str, bag, grid, m, config, engine) -> tuple[np.ndarray, int]:
    """Returns (component values, peak live process objects)."""
    if engine == "python":
        fn = {"naive": _naive_py, "enhanced": _enhanced_py, "bmh1": _bmh1_py, "bmh2": _bmh2_py}[algo]
        return fn(bag, grid, m, config), 0
    if engine != "compiled":
        raise ValueError(f"unknown engine: {engine!r}")
    from . import _kernels

    return _kernels.run_real(algo, bag, grid, m, config)


def _real_signature(algo, bag, grid, m, config, engine) -> RealSignature:
    if algo in ("enhanced", "bmh1", "bmh2"):
        _require_power_of_two(m)
    elif m < 1:
        raise ValueError("signature size must be at least 1")
    _check_bag_fits_grid(bag, grid)
    values, _ = _run_real(algo, bag, grid, m, config, engine)
    return RealSignature(
        values=values, grid=grid.descriptor(), config_tag=config.tag, algorithm=algo
    )


def naive_signature(
    bag: WeightedBag,
    grid: WeightDiscretization,
    m: int,
    *,
    config: RngConfig = DEFAULT_CONFIG,
    engine: str = "compiled",
) -> RealSignature:
    """Direct per-(element, level, component) evaluation; the baseline oracle."""
    return _real_signature("naive", bag, grid, m, config, engine)


def enhanced_signature(
    bag: WeightedBag,
    grid: WeightDiscretization,
    m: int,
    *,
    config: RngConfig = DEFAULT_CONFIG,
    engine: str = "compiled",
) -> RealSignature:
    """Per-(element, level) ascending point generation with early stopping."""
    return _real_signature("enhanced", bag, grid, m, config, engine)


def bagminhash1(
    bag: WeightedBag,
    grid: WeightDiscretization,
    m: int,
    *,
    config: RngConfig = DEFAULT_CONFIG,
    engine: str = "compiled",
) -> RealSignature:
    """Split-descent over one process per element."""
    return _real_signature("bmh1", bag, grid, m, config, engine)


def bagminhash2(
    bag: WeightedBag,
    grid: WeightDiscretization,
    m: int,
    *,
    config: RngConfig = DEFAULT_CONFIG,
    engine: str = "compiled",
) -> RealSignature:
    """Two-phase variant of bagminhash1; bit-identical output."""
    return _real_signature("bmh2", bag, grid, m, config, engine)


def bbit_transform(sig: RealSignature, b: int, *, engine: str = "compiled") -> BbitSignature:
    """Truncate a real signature to b-bit components via per-value streams."""
    if not 1 <= b <= 64:
        raise ValueError("b must be in [1, 64]")
    config = _config_of(sig)
    if engine == "python":
        values = _bbit_py(sig.values, b, config)
    elif engine == "compiled":
        from . import _kernels

        values = _kernels.run_bbit(sig.values, b)
    else:
        raise ValueError(f"unknown engine: {engine!r}")
    return BbitSignature(
        values=values, b=b, grid=sig.grid, config_tag=sig.config_tag, algorithm=sig.algorithm
    )


def icws_signature(
    bag: WeightedBag,
    m: int,
    *,
    config: RngConfig = DEFAULT_CONFIG,
    engine: str = "compiled",
) -> IcwsSignature:
    """Consistent weighted sampling over the raw (continuous) weights."""
    if m < 1:
        raise ValueError("signature size must be at least 1")
    if not len(bag) or not np.any(bag.weights > 0.0):
        raise ValueError("icws needs at least one element with positive weight")
    if engine == "python":
        keys, levels = _icws_py(bag, m, config)
    elif engine == "compiled":
        from . import _kernels

        keys, levels = _kernels.run_icws(bag, m, config)
    else:
        raise ValueError(f"unknown engine: {engine!r}")
    return IcwsSignature(keys=keys, levels=levels, config_tag=config.tag)


def _config_of(sig) -> RngConfig:
    from .rng import config_from_tag

    return config_from_tag(sig.config_tag)
