"""Weight grids: strictly increasing discretizations of the weight axis.

A grid is a finite sequence ``v_0 = 0 < v_1 < ... < v_K``.  Discretizing a
weight rounds it down onto the grid, so a grid whose consecutive ratios are
at most ``1 + eps`` distorts any weighted Jaccard index by at most a factor
``1 + eps`` in either direction.

Two families are provided beyond explicit value tables:

* ``single_precision_grid()`` uses every nonnegative finite float32 as a
  grid value.  Its index space is the float32 bit pattern, which is order
  preserving for nonnegative floats, so both directions have closed forms
  and nothing is materialized.
* ``geometric_grid(v1, eps, K)`` with ``v_k = v1 * (1 + eps)**(k - 1)``
  gives a controllable relative error ``eps``.
"""

from __future__ import annotations

import math
from typing import Sequence

import numpy as np

from .errors import InvalidGridError, WeightOutOfRangeError

F32_MAX_INDEX = 0x7F7FFFFF  # bit pattern of the largest finite float32
F32_MAX = 3.4028234663852886e38

# Grid values above this would break the exact-Bernoulli denominator bound.
_MAX_GRID_VALUE = 2.0**1023

KIND_TABLE = 0
KIND_F32 = 1

_F32_SCALES = np.ldexp(1.0, np.arange(255) - 127)
_F32_SCALES[0] = 2.0**-149


class WeightDiscretization:
    """Base class; concrete grids implement value/index in both directions."""

    upper_index: int

    @property
    def epsilon(self) -> float | None:
        """Bound on the relative gap between consecutive values, if known."""
        return None

    @property
    def min_positive(self) -> float:
        return self.value_at(1)

    @property
    def max_weight(self) -> float:
        return self.value_at(self.upper_index)

    def value_at(self, k: int) -> float:
        raise NotImplementedError

    def index_of(self, w: float) -> int:
        raise NotImplementedError

    def discretized(self, w: float) -> float:
        """The largest grid value that does not exceed ``w``."""
        return self.value_at(self.index_of(w))

    def descriptor(self) -> dict:
        raise NotImplementedError

    def kernel_form(self) -> tuple[int, np.ndarray, int]:
        """(kind, value table, upper index) as consumed by compiled kernels."""
        raise NotImplementedError

    def _check_weight(self, w: float) -> None:
        if not (isinstance(w, (int, float)) and 0.0 <= w <= self.max_weight):
            raise WeightOutOfRangeError(
                f"weight {w!r} outside [0, {self.max_weight!r}]"
            )

    def _check_index(self, k: int) -> None:
        if not 0 <= k <= self.upper_index:
            raise IndexError(f"grid index {k} outside [0, {self.upper_index}]")

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, WeightDiscretization):
            return NotImplemented
        return self.descriptor() == other.descriptor()

    def __repr__(self) -> str:
        return f"{type(self).__name__}({self.descriptor()})"


class TableGrid(WeightDiscretization):
    """Grid backed by an explicit value table."""

    def __init__(self, values: Sequence[float], _name: str | None = None, _epsilon: float | None = None):
        arr = np.asarray(values, dtype=np.float64)
        if arr.ndim != 1 or arr.size < 2:
            raise InvalidGridError("grid needs at least the values v_0 and v_1")
        if arr[0] != 0.0:
            raise InvalidGridError("grid must start at v_0 = 0")
        if not np.all(np.isfinite(arr)):
            raise InvalidGridError("grid values must be finite")
        if np.any(np.diff(arr) <= 0.0):
            raise InvalidGridError("grid values must be strictly increasing")
        if arr[-1] > _MAX_GRID_VALUE:
            raise InvalidGridError("grid values must not exceed 2**1023")
        self.values = arr
        self.upper_index = arr.size - 1
        self._name = _name
        self._epsilon = _epsilon

    @property
    def epsilon(self) -> float | None:
        return self._epsilon

    def value_at(self, k: int) -> float:
        self._check_index(k)
        return float(self.values[k])

    def index_of(self, w: float) -> int:
        self._check_weight(w)
        return int(np.searchsorted(self.values, w, side="right")) - 1

    def descriptor(self) -> dict:
        if self._name == "binary":
            return {"kind": "binary"}
        if self._name == "geometric":
            return {
                "kind": "geometric",
                "v1": float(self.values[1]),
                "epsilon": float(self._epsilon),
                "K": int(self.upper_index),
            }
        return {"kind": "explicit", "values": [float(v) for v in self.values]}

    def kernel_form(self) -> tuple[int, np.ndarray, int]:
        return KIND_TABLE, self.values, self.upper_index


class SinglePrecisionGrid(WeightDiscretization):
    """All nonnegative finite float32 values, indexed by bit pattern."""

    def __init__(self) -> None:
        self.upper_index = F32_MAX_INDEX

    @property
    def epsilon(self) -> float | None:
        # Relative spacing of normal float32 values; subnormal spacing is
        # absolute (2**-149), which only matters below ~1.2e-38.
        return 2.0**-23

    def value_at(self, k: int) -> float:
        self._check_index(k)
        exponent = k >> 23
        mantissa = k & 0x7FFFFF
        if exponent == 0:
            return math.ldexp(float(mantissa), -149)
        return math.ldexp(1.0 + float(mantissa) * 2.0**-23, exponent - 127)

    def index_of(self, w: float) -> int:
        self._check_weight(w)
        w = float(w)
        if w == 0.0:
            return 0
        m, e = math.frexp(w)  # w = m * 2**e with m in [0.5, 1)
        if e < -125:
            # Below the normal float32 range: absolute spacing 2**-149.
            # The scaling is a power of two, so the product is exact.
            return int(math.floor(w * 2.0**149))
        # (2m - 1) is exact by Sterbenz; truncating to 23 mantissa bits
        # rounds toward the float32 at or below w.
        mantissa = int(math.floor((2.0 * m - 1.0) * 8388608.0))
        return ((e - 1 + 127) << 23) | mantissa

    def descriptor(self) -> dict:
        return {"kind": "f32"}

    def kernel_form(self) -> tuple[int, np.ndarray, int]:
        # Scale table indexed by the biased exponent: entry 0 is the
        # subnormal step 2**-149, entry e >= 1 is 2**(e-127).  A float32
        # value is its 24-bit significand times one of these powers of
        # two, so the double product is exact and equals value_at.
        return KIND_F32, _F32_SCALES, self.upper_index


def explicit_grid(values: Sequence[float]) -> TableGrid:
    return TableGrid(values)


def binary_grid() -> TableGrid:
    """The grid {0, 1}; set semantics for 0/1 weights."""
    return TableGrid([0.0, 1.0], _name="binary")


def geometric_grid(v1: float, epsilon: float, upper_index: int) -> TableGrid:
    """Grid with ``v_k = v1 * (1 + epsilon)**(k - 1)`` for ``k >= 1``."""
    if not (math.isfinite(v1) and v1 > 0.0):
        raise InvalidGridError("v1 must be positive and finite")
    if not (math.isfinite(epsilon) and epsilon > 0.0):
        raise InvalidGridError("epsilon must be positive and finite")
    if upper_index < 1:
        raise InvalidGridError("upper index must be at least 1")
    ks = np.arange(upper_index, dtype=np.float64)
    with np.errstate(over="raise"):
        try:
            tail = v1 * np.power(1.0 + epsilon, ks)
        except FloatingPointError:
            raise InvalidGridError("geometric grid overflows float range") from None
    values = np.concatenate(([0.0], tail))
    # Delegates monotonicity/overflow validation (an epsilon too small to
    # separate adjacent floats fails here).
    return TableGrid(values, _name="geometric", _epsilon=float(epsilon))


def single_precision_grid() -> SinglePrecisionGrid:
    return SinglePrecisionGrid()


def grid_from_descriptor(desc: dict) -> WeightDiscretization:
    """Rebuild a grid from its serialized descriptor."""
    kind = desc.get("kind")
    if kind == "binary":
        return binary_grid()
    if kind == "f32":
        return single_precision_grid()
    if kind == "geometric":
        return geometric_grid(desc["v1"], desc["epsilon"], desc["K"])
    if kind == "explicit":
        return explicit_grid(desc["values"])
    raise InvalidGridError(f"unknown grid descriptor: {desc!r}")
