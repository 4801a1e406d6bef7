import math

import numpy as np
import pytest
from scipy import stats

from bagminhash.discretization import explicit_grid, single_precision_grid
from bagminhash.errors import WeightOutOfRangeError
from bagminhash.poisson import PoissonProcess
from bagminhash.rng import RngConfig


GRID = explicit_grid([0.0, 1.0, 2.0, 3.0, 4.0])


def root(d=1, w=4.0, grid=GRID, m=8, **kw):
    return PoissonProcess.for_element(d, w, grid, m, **kw)


def descend_fully(p):
    """Split down to elementary processes (ignoring relevance)."""
    stack, leaves = [p], []
    while stack:
        q = stack.pop()
        if q.splittable:
            stack.append(q.split())
            stack.append(q)
        else:
            leaves.append(q)
    return leaves


# --- construction and state -------------------------------------------------


def test_root_covers_whole_grid():
    p = root()
    assert (p.lower, p.upper) == (0, 4)
    assert p.x == 0.0
    assert p.rate == 4.0
    assert p.splittable
    assert p.component == 0


def test_weight_validation():
    with pytest.raises(WeightOutOfRangeError):
        root(w=4.5)
    with pytest.raises(WeightOutOfRangeError):
        root(w=-1.0)


def test_relevance_thresholds():
    p = root(w=2.0)
    assert p.partially_relevant  # v_1 = 1 <= 2
    assert not p.fully_relevant  # v_4 = 4 > 2
    q = root(w=4.0)
    assert q.fully_relevant and q.partially_relevant
    r = root(w=0.5)
    assert not r.partially_relevant


def test_next_point_ascends_and_draws_component():
    p = root(m=16)
    xs = [p.next_point() for _ in range(50)]
    assert all(b > a for a, b in zip(xs, xs[1:]))
    assert all(1 <= p.component <= 16 for _ in [0])
    assert p.x == xs[-1]


def test_determinism_by_element_id():
    p1, p2 = root(d=42), root(d=42)
    assert [p1.next_point() for _ in range(5)] == [p2.next_point() for _ in range(5)]
    assert root(d=42).next_point() != root(d=43).next_point()


# --- splitting --------------------------------------------------------------


def test_split_halves_partition_the_range():
    for d in range(40):
        p = root(d=d)
        p.next_point()
        x_before = p.x
        sib = p.split()
        assert {(p.lower, p.upper), (sib.lower, sib.upper)} == {(0, 2), (2, 4)}
        assert p.x == x_before  # the kept half owns the point
        assert sib.x == x_before  # the sibling starts from the same offset
        assert sib.component == 0
        assert sib.weight == p.weight


def test_split_of_elementary_raises():
    p = root()
    for _ in range(2):
        p.split() if p.splittable else None
    while p.splittable:
        p.split()
    assert p.upper - p.lower == 1
    with pytest.raises(ValueError):
        p.split()


def test_split_streams_are_independent_of_parent():
    p1, p2 = root(d=9), root(d=9)
    p1.next_point()
    p2.next_point()
    sib = p1.split()
    sib.next_point()
    # The parent's continued stream is unaffected by having created the
    # sibling apart from the consumed Bernoulli bit; the sibling draws
    # from a different stream than the parent would have.
    assert sib.x != p2.next_point()


def test_split_seeds_depend_on_point():
    # Two processes split at the same index but different x must diverge.
    a, b = root(d=1), root(d=2)
    a.next_point()
    b.next_point()
    assert a.x != b.x
    sa, sb = a.split(), b.split()
    if (sa.lower, sa.upper) == (sb.lower, sb.upper):
        sa.next_point()
        sb.next_point()
        assert sa.x - a.x != sb.x - b.x


# --- distributional checks --------------------------------------------------


def test_first_point_is_exponential_with_grid_rate():
    xs = np.array([root(d=d).next_point() for d in range(3000)])
    res = stats.kstest(xs, "expon", args=(0, 1 / GRID.max_weight))
    assert res.pvalue > 1e-5


def test_split_preserves_point_law():
    # After the first point x0 of the combined process, fully splitting
    # and advancing each half must reproduce the law of the original
    # process: sibling leaves (which own no point yet) see their first
    # point at x0 plus Exp(leaf rate), and the per-leaf counts of points
    # within a window behave like independent Poisson variables.
    T = 2.0
    offsets = []
    counts = []
    for d in range(2500):
        p = root(d=d)
        x0 = p.next_point()
        leaves = descend_fully(p)
        assert sorted((q.lower, q.upper) for q in leaves) == [
            (0, 1), (1, 2), (2, 3), (3, 4),
        ]
        assert sum(q.rate for q in leaves) == GRID.max_weight
        for q in leaves:
            if q is p:
                c = 1 if q.x <= T else 0  # the root point belongs to this leaf
            else:
                offsets.append(q.next_point() - x0)
                c = 1 if q.x <= T else 0
            while q.next_point() <= T:
                c += 1
            counts.append(c)
    res = stats.kstest(np.array(offsets), "expon")
    assert res.pvalue > 1e-5
    counts = np.array(counts, dtype=float)
    # Each leaf has rate 1, so counts on [0, T] are Poisson(T).
    n = counts.size
    assert abs(counts.mean() - T) < 5 * math.sqrt(T / n)
    assert abs(counts.var() - T) < 5 * math.sqrt(3 * T * T / n)


def test_component_assignment_is_uniform():
    m = 8
    counts = np.zeros(m)
    p = root(d=5, m=m)
    for _ in range(8000):
        p.next_point()
        counts[p.component - 1] += 1
    chi2 = ((counts - 1000.0) ** 2 / 1000.0).sum()
    assert chi2 < stats.chi2.ppf(1 - 1e-6, m - 1)


def test_works_on_the_f32_grid():
    g = single_precision_grid()
    p = PoissonProcess.for_element(7, 1.5, g, 4)
    p.next_point()
    assert p.x > 0
    sib = p.split()
    assert p.upper - p.lower + (sib.upper - sib.lower) == g.upper_index
    assert p.rate > 0 and sib.rate > 0


def test_sampler_config_propagates_to_siblings():
    cfg = RngConfig(exp_sampler="invcdf")
    p = root(d=3, config=cfg)
    p.next_point()
    sib = p.split()
    assert sib.generator.config == cfg
