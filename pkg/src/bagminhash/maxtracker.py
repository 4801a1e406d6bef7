"""Running maximum over signature components that only ever decrease.

The signature algorithms repeatedly ask for ``h_max = max_j h_j`` and
lower one component at a time.  Recomputing the maximum on demand would
cost O(m) per update, so the components are kept as the leaves of a
complete binary tree stored in one array, every internal node holding the
maximum of its children.  The root is ``h_max``.  After a leaf decreases,
only the path toward the root needs fixing, and the expected number of
node writes per effective update is constant: the parent changes only if
the updated child held the parent's maximum, which happens with
probability at most 1/2 at each level.

Layout (1-based): leaves are nodes ``1..m``, the parent of node ``i`` is
``m + ceil(i / 2)``, and the children of an internal node ``i > m`` are
``2(i - m) - 1`` and ``2(i - m)``.  The root is node ``2m - 1``.  Sizes
that are not powers of two are padded up with ``-inf`` leaves, which never
win a maximum; the public signature API only uses power-of-two sizes.
"""

from __future__ import annotations

import math

import numpy as np


class MaxTracker:
    """Decrease-only component store with an O(1)-amortized running max."""

    __slots__ = ("size", "_padded", "_tree", "writes")

    def __init__(self, size: int) -> None:
        if size < 1:
            raise ValueError("tracker needs at least one component")
        self.size = size
        padded = 1 << (size - 1).bit_length()
        self._padded = padded
        tree = np.full(2 * padded, math.inf)  # index 0 unused
        tree[size + 1 : padded + 1] = -math.inf
        # Seed internal nodes bottom-up so subtrees made only of padding
        # report -inf instead of sticking at +inf forever.
        for i in range(padded + 1, 2 * padded):
            tree[i] = max(tree[2 * (i - padded) - 1], tree[2 * (i - padded)])
        self._tree = tree
        self.writes = 0

    @property
    def current_max(self) -> float:
        return float(self._tree[2 * self._padded - 1])

    def component(self, j: int) -> float:
        if not 0 <= j < self.size:
            raise IndexError(f"component {j} outside [0, {self.size})")
        return float(self._tree[j + 1])

    def components(self) -> np.ndarray:
        """A copy of the component values h_1..h_m."""
        return self._tree[1 : self.size + 1].copy()

    def update(self, j: int, value: float) -> bool:
        """Lower component ``j`` to ``value`` if that is a decrease.

        Returns whether the component changed.  Ancestors are rewritten
        only while their maximum actually changes.
        """
        if not 0 <= j < self.size:
            raise IndexError(f"component {j} outside [0, {self.size})")
        tree = self._tree
        padded = self._padded
        i = j + 1
        if not value < tree[i]:
            return False
        while value < tree[i]:
            tree[i] = value
            self.writes += 1
            i = padded + (i + 1) // 2
            if i >= 2 * padded:
                break
            left = tree[2 * (i - padded) - 1]
            right = tree[2 * (i - padded)]
            value = left if left > right else right
        return True
