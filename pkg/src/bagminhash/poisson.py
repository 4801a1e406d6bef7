"""Splittable Poisson processes over contiguous ranges of a weight grid.

A process covers grid levels ``lower+1 .. upper`` of one bag element and
has rate ``v_upper - v_lower``.  Its points are generated in ascending
order; each point is assigned a uniform signature component.  A process
covering more than one level can be split at the midpoint: a Bernoulli
trial with odds proportional to the sub-rates decides which half the
current point belongs to, the process object keeps that half, and a new
sibling object covering the other half is returned.  The sibling reuses
the current point as its starting offset and draws further randomness
from a fresh stream seeded by (point, split index), which is unique
because no second split can happen at the same index below the same
point.

Relevance is with respect to the element weight ``w``: a process is
partially relevant if its lowest level still matters (``v_{lower+1} <=
w``) and fully relevant if all its levels do (``v_upper <= w``).
"""

from __future__ import annotations

from .discretization import WeightDiscretization
from .errors import WeightOutOfRangeError
from .hashing import element_seed, split_seed
from .rng import DEFAULT_CONFIG, RngConfig, SeededGenerator


class PoissonProcess:
    """State of one splittable process; mutated in place by the algorithms."""

    __slots__ = ("x", "generator", "lower", "upper", "weight", "component", "grid", "m")

    def __init__(
        self,
        x: float,
        generator: SeededGenerator,
        lower: int,
        upper: int,
        weight: float,
        grid: WeightDiscretization,
        m: int,
    ) -> None:
        if not 0 <= lower < upper <= grid.upper_index:
            raise ValueError(f"invalid level range [{lower}, {upper}]")
        if m < 1:
            raise ValueError("signature size must be at least 1")
        self.x = x
        self.generator = generator
        self.lower = lower
        self.upper = upper
        self.weight = weight
        self.component = 0  # 1-based once a point exists; 0 means no point yet
        self.grid = grid
        self.m = m

    @classmethod
    def for_element(
        cls,
        element_id: int,
        weight: float,
        grid: WeightDiscretization,
        m: int,
        config: RngConfig = DEFAULT_CONFIG,
    ) -> "PoissonProcess":
        """Root process of one element, covering the whole grid."""
        if not 0.0 <= weight <= grid.max_weight:
            raise WeightOutOfRangeError(f"weight {weight!r} outside grid")
        gen = SeededGenerator(element_seed(element_id), config)
        return cls(0.0, gen, 0, grid.upper_index, weight, grid, m)

    @property
    def rate(self) -> float:
        return self.grid.value_at(self.upper) - self.grid.value_at(self.lower)

    @property
    def splittable(self) -> bool:
        return self.lower + 1 < self.upper

    @property
    def partially_relevant(self) -> bool:
        return self.grid.value_at(self.lower + 1) <= self.weight

    @property
    def fully_relevant(self) -> bool:
        return self.grid.value_at(self.upper) <= self.weight

    def next_point(self) -> float:
        """Advance to the next point and draw its signature component."""
        self.x += self.generator.exponential(self.rate)
        self.component = self.generator.uniform_index(self.m)
        return self.x

    def split(self) -> "PoissonProcess":
        """Split at the midpoint; self keeps the half owning its point."""
        if not self.splittable:
            raise ValueError("elementary process cannot be split")
        q = (self.lower + self.upper) // 2
        sibling_gen = SeededGenerator(
            split_seed(self.x, q), self.generator.config
        )
        v_lower = self.grid.value_at(self.lower)
        v_mid = self.grid.value_at(q)
        v_upper = self.grid.value_at(self.upper)
        if self.generator.bernoulli(v_mid - v_lower, v_upper - v_lower):
            sibling = PoissonProcess(
                self.x, sibling_gen, q, self.upper, self.weight, self.grid, self.m
            )
            self.upper = q
        else:
            sibling = PoissonProcess(
                self.x, sibling_gen, self.lower, q, self.weight, self.grid, self.m
            )
            self.lower = q
        # The retained half owns the current point; the sibling has no
        # point of its own until next_point() is called on it.
        return sibling

    def __repr__(self) -> str:
        return (
            f"PoissonProcess(x={self.x!r}, levels=({self.lower}, {self.upper}], "
            f"w={self.weight!r})"
        )
