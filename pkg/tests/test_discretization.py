import math
import struct

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bagminhash.discretization import (
    F32_MAX,
    F32_MAX_INDEX,
    binary_grid,
    explicit_grid,
    geometric_grid,
    grid_from_descriptor,
    single_precision_grid,
)
from bagminhash.errors import InvalidGridError, WeightOutOfRangeError


def f32_bits(x: float) -> int:
    return struct.unpack("<I", struct.pack("<f", np.float32(x)))[0]


def f32_from_bits(k: int) -> float:
    return float(np.frombuffer(struct.pack("<I", k), dtype=np.float32)[0])


def f32_round_down(w: float) -> float:
    """Largest float32 <= w, computed through numpy as an oracle."""
    x = np.float32(w)
    if float(x) > w:
        x = np.nextafter(x, np.float32(0.0))
    return float(x)


# --- explicit/binary grids --------------------------------------------------


def test_binary_grid_basics():
    g = binary_grid()
    assert g.upper_index == 1
    assert g.value_at(0) == 0.0
    assert g.value_at(1) == 1.0
    assert g.index_of(0.0) == 0
    assert g.index_of(0.9999) == 0
    assert g.index_of(1.0) == 1
    assert g.descriptor() == {"kind": "binary"}


def test_explicit_grid_validation():
    with pytest.raises(InvalidGridError):
        explicit_grid([0.0])
    with pytest.raises(InvalidGridError):
        explicit_grid([0.5, 1.0])
    with pytest.raises(InvalidGridError):
        explicit_grid([0.0, 1.0, 1.0])
    with pytest.raises(InvalidGridError):
        explicit_grid([0.0, 2.0, 1.0])
    with pytest.raises(InvalidGridError):
        explicit_grid([0.0, math.inf])
    with pytest.raises(InvalidGridError):
        explicit_grid([0.0, float("nan")])
    with pytest.raises(InvalidGridError):
        explicit_grid([0.0, 1e308])


def test_index_of_rounds_down():
    g = explicit_grid([0.0, 0.5, 1.0, 2.0])
    assert [g.index_of(w) for w in (0.0, 0.49, 0.5, 0.7, 1.0, 1.99, 2.0)] == [
        0, 0, 1, 1, 2, 2, 3,
    ]
    assert g.discretized(1.7) == 1.0


def test_weight_range_errors():
    g = explicit_grid([0.0, 1.0, 2.0])
    for bad in (-0.1, 2.0000001, math.inf, math.nan):
        with pytest.raises(WeightOutOfRangeError):
            g.index_of(bad)


def test_value_at_range_errors():
    g = binary_grid()
    with pytest.raises(IndexError):
        g.value_at(-1)
    with pytest.raises(IndexError):
        g.value_at(2)


@given(st.lists(st.floats(min_value=1e-6, max_value=1e6), min_size=1, max_size=30, unique=True))
@settings(max_examples=200, deadline=None)
def test_table_index_matches_linear_scan(raw):
    values = [0.0] + sorted(raw)
    g = explicit_grid(values)
    for w in list(values) + [v * 1.0000001 for v in raw] + [raw[0] / 2]:
        if not 0 <= w <= g.max_weight:
            continue
        expect = max(k for k in range(len(values)) if values[k] <= w)
        assert g.index_of(w) == expect


# --- float32 grid -----------------------------------------------------------


def test_f32_grid_constants():
    g = single_precision_grid()
    assert g.upper_index == F32_MAX_INDEX == 2139095039
    assert g.max_weight == F32_MAX
    assert g.index_of(1.0) == 1065353216
    assert g.value_at(0) == 0.0
    assert g.min_positive == 2.0**-149


@given(st.integers(min_value=0, max_value=F32_MAX_INDEX))
@settings(max_examples=2000, deadline=None)
def test_f32_value_at_is_bit_pattern(k):
    g = single_precision_grid()
    assert g.value_at(k) == f32_from_bits(k)


@given(st.integers(min_value=0, max_value=F32_MAX_INDEX))
@settings(max_examples=2000, deadline=None)
def test_f32_roundtrip_and_monotone(k):
    g = single_precision_grid()
    v = g.value_at(k)
    assert g.index_of(v) == k
    if k < F32_MAX_INDEX:
        assert g.value_at(k + 1) > v


@given(st.floats(min_value=0.0, max_value=F32_MAX, allow_nan=False))
@settings(max_examples=3000, deadline=None)
def test_f32_index_of_matches_numpy_round_down(w):
    g = single_precision_grid()
    expected = f32_round_down(w)
    k = g.index_of(w)
    assert g.value_at(k) == expected
    assert k == f32_bits(expected)


def test_f32_subnormal_region():
    g = single_precision_grid()
    tiny = 2.0**-149
    assert g.value_at(1) == tiny
    assert g.index_of(tiny) == 1
    assert g.index_of(tiny * 0.999) == 0
    assert g.index_of(2.0**-126) == 1 << 23  # first normal float32
    # Halfway through the subnormals.
    w = 1000.25 * tiny
    assert g.index_of(w) == 1000
    assert g.discretized(w) == 1000 * tiny


# --- geometric grids --------------------------------------------------------


def test_geometric_values():
    g = geometric_grid(0.5, 0.25, 4)
    assert g.upper_index == 4
    assert g.value_at(0) == 0.0
    assert g.value_at(1) == 0.5
    assert g.value_at(2) == pytest.approx(0.625)
    assert g.value_at(4) == pytest.approx(0.5 * 1.25**3)
    assert g.epsilon == 0.25


def test_geometric_validation():
    with pytest.raises(InvalidGridError):
        geometric_grid(0.0, 0.1, 5)
    with pytest.raises(InvalidGridError):
        geometric_grid(1.0, 0.0, 5)
    with pytest.raises(InvalidGridError):
        geometric_grid(1.0, -0.5, 5)
    with pytest.raises(InvalidGridError):
        geometric_grid(1.0, 0.1, 0)
    # Overflow and below-float-resolution ratios are both rejected.
    with pytest.raises(InvalidGridError):
        geometric_grid(1e300, 10.0, 100)
    with pytest.raises(InvalidGridError):
        geometric_grid(1.0, 1e-18, 5)


@given(
    st.floats(min_value=1e-3, max_value=1.0),
    st.floats(min_value=0.01, max_value=1.0),
    st.integers(min_value=2, max_value=200),
    st.floats(min_value=0.0, max_value=1.0),
)
@settings(max_examples=300, deadline=None)
def test_geometric_relative_error_bound(v1, eps, K, t):
    g = geometric_grid(v1, eps, K)
    # Any weight inside [v_1, v_K] is discretized within a (1+eps) factor.
    w = g.min_positive + t * (g.max_weight - g.min_positive)
    d = g.discretized(w)
    assert d <= w
    assert w <= d * (1.0 + eps) * (1.0 + 1e-12)


# --- descriptors ------------------------------------------------------------


def test_descriptor_roundtrip():
    grids = [
        binary_grid(),
        single_precision_grid(),
        geometric_grid(0.01, 0.1, 150),
        explicit_grid([0.0, 0.5, 1.0, 2.0]),
    ]
    for g in grids:
        h = grid_from_descriptor(g.descriptor())
        assert h == g
        assert h.descriptor() == g.descriptor()


def test_equality_is_by_construction():
    assert binary_grid() == binary_grid()
    assert binary_grid() != explicit_grid([0.0, 1.0])
    assert geometric_grid(0.1, 0.5, 3) != geometric_grid(0.1, 0.5, 4)
    assert single_precision_grid() == single_precision_grid()


def test_unknown_descriptor_rejected():
    with pytest.raises(InvalidGridError):
        grid_from_descriptor({"kind": "log2"})
