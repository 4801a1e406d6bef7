import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from bagminhash.hashing import xxh64
from bagminhash.rng import (
    DEFAULT_CONFIG,
    ZIG_F,
    ZIG_K,
    ZIG_R,
    ZIG_V,
    ZIG_W,
    ZIG_X,
    RngConfig,
    SeededGenerator,
    config_from_tag,
)


def gen(seed=b"test-seed", **kw):
    return SeededGenerator(seed, **kw)


# --- block stream -----------------------------------------------------------


def test_blocks_are_counter_hashes():
    g = gen(b"abc")
    assert g.next_u64() == xxh64(b"abc", 0)
    assert g.next_u64() == xxh64(b"abc", 1)
    assert g.next_u64() == xxh64(b"abc", 2)


def test_same_seed_same_stream():
    g1, g2 = gen(), gen()
    assert [g1.next_u64() for _ in range(10)] == [g2.next_u64() for _ in range(10)]


def test_seed_validation():
    with pytest.raises(ValueError):
        SeededGenerator(b"")
    with pytest.raises(ValueError):
        SeededGenerator(b"x" * 65)
    with pytest.raises(ValueError):
        SeededGenerator("not bytes")  # type: ignore[arg-type]
    SeededGenerator(b"x" * 64)  # boundary is allowed


# --- bit buffer -------------------------------------------------------------


def test_bits_come_from_blocks_lsb_first():
    g = gen()
    block = xxh64(g.seed_bytes, 0)
    bits = [g.uniform_bits(1) for _ in range(64)]
    assert sum(b << i for i, b in enumerate(bits)) == block
    # The 65th bit starts a fresh block.
    nxt = g.uniform_bits(1)
    assert nxt == xxh64(g.seed_bytes, 1) & 1


def test_multibit_reads_match_single_bits():
    g1, g2 = gen(), gen()
    for width in (3, 7, 1, 64, 13, 40, 64, 2):
        multi = g1.uniform_bits(width)
        single = sum(g2.uniform_bits(1) << i for i in range(width))
        assert multi == single


def test_doubles_bypass_the_bit_buffer():
    g = gen(b"layout")
    b0, b1, b2 = (xxh64(b"layout", c) for c in range(3))
    assert g.uniform_bits(3) == b0 & 0b111
    # uniform_double takes the whole next block, untouched by buffered bits.
    assert g.uniform_double() == ((b1 >> 12) + 0.5) * 2.0**-52
    # Buffered bits resume where they left off in block 0.
    assert g.uniform_bits(5) == (b0 >> 3) & 0b11111
    assert g.next_u64() == b2


def test_uniform_bits_range_checks():
    g = gen()
    for bad in (0, -1, 65):
        with pytest.raises(ValueError):
            g.uniform_bits(bad)


# --- uniform doubles --------------------------------------------------------


def test_uniform_double_open_interval():
    g = gen()
    xs = [g.uniform_double() for _ in range(20000)]
    assert all(0.0 < x < 1.0 for x in xs)
    assert abs(np.mean(xs) - 0.5) < 0.01


# --- exact Bernoulli --------------------------------------------------------


class _ScriptedBits(SeededGenerator):
    """Replays a fixed bit list; for white-box checks of the digit compare."""

    def __init__(self, bits):
        super().__init__(b"scripted")
        self.script = list(bits)

    def uniform_bits(self, bits):
        assert bits == 1
        return self.script.pop(0)


def test_bernoulli_digit_comparison():
    # p = 3/8 = 0.011 in binary.
    assert _ScriptedBits([1]).bernoulli(3.0, 8.0) is False
    assert _ScriptedBits([0, 0]).bernoulli(3.0, 8.0) is True
    assert _ScriptedBits([0, 1, 0]).bernoulli(3.0, 8.0) is True
    # Uniform hitting p exactly is the measure-zero tie; resolves to False.
    assert _ScriptedBits([0, 1, 1]).bernoulli(3.0, 8.0) is False


def test_bernoulli_endpoints_consume_nothing():
    g = gen()
    assert g.bernoulli(0.0, 5.0) is False
    assert g.bernoulli(5.0, 5.0) is True
    assert g._counter == 0


def test_bernoulli_validation():
    g = gen()
    for num, den in [(-0.1, 1.0), (1.5, 1.0), (1.0, 0.0), (1.0, -2.0), (1.0, math.inf), (math.nan, 1.0), (1.0, 1e308)]:
        with pytest.raises(ValueError):
            g.bernoulli(num, den)


@given(
    st.floats(min_value=0.0, max_value=1.0, allow_nan=False),
    st.floats(min_value=1e-300, max_value=1e300, allow_nan=False),
)
@settings(max_examples=200, deadline=None)
def test_bernoulli_always_terminates(p, den):
    g = gen(b"terminate")
    out = g.bernoulli(p * den if p * den <= den else den, den)
    assert out in (True, False)


def test_bernoulli_frequency():
    for p_num, p_den in [(1.0, 3.0), (0.7, 1.0), (1e-3, 1.0), (2.0, 7.0)]:
        g = gen(b"freq")
        n = 40000
        hits = sum(g.bernoulli(p_num, p_den) for _ in range(n))
        p = p_num / p_den
        sd = math.sqrt(p * (1 - p) * n)
        assert abs(hits - n * p) < 5 * sd + 1


def test_bernoulli_expected_bits_is_about_two():
    g = gen(b"bits")
    n = 20000
    for _ in range(n):
        g.bernoulli(1.0, 3.0)
    # Each draw eats ~2 bits in expectation, so ~2n/64 blocks.
    assert g._counter < 4 * n // 64 + 2


# --- uniform index ----------------------------------------------------------


def test_uniform_index_power_of_two_bit_cost():
    g = gen()
    draws = [g.uniform_index(256) for _ in range(8)]
    assert all(1 <= d <= 256 for d in draws)
    assert g._counter == 1  # 8 draws x 8 bits = exactly one block
    assert g._nbits == 0


def test_uniform_index_m1_consumes_nothing():
    g = gen()
    assert g.uniform_index(1) == 1
    assert g._counter == 0


def test_uniform_index_rejects_bad_m():
    with pytest.raises(ValueError):
        gen().uniform_index(0)


@pytest.mark.parametrize("m", [2, 3, 5, 16, 100])
def test_uniform_index_uniformity(m):
    g = gen(b"udist")
    n = 20000
    counts = np.zeros(m)
    for _ in range(n):
        counts[g.uniform_index(m) - 1] += 1
    chi2 = ((counts - n / m) ** 2 / (n / m)).sum()
    # df = m - 1; allow a wide quantile since the seed is fixed.
    assert chi2 < stats.chi2.ppf(1 - 1e-6, m - 1)


# --- exponential ------------------------------------------------------------


def test_ziggurat_tables_consistent():
    # Boundaries descend from the tail split to the forced top at zero.
    assert ZIG_X[0] == ZIG_R
    assert ZIG_X[255] == 0.0
    assert np.all(np.diff(ZIG_X) < 0)
    assert np.allclose(ZIG_F, np.exp(-ZIG_X))
    # Every layer, and the base strip plus tail, has the common area.
    for i in range(1, 256):
        area = ZIG_X[i - 1] * (ZIG_F[i] - ZIG_F[i - 1])
        assert area == pytest.approx(ZIG_V, rel=1e-7)
    base = ZIG_R * ZIG_F[0] + ZIG_F[0]
    assert base == pytest.approx(ZIG_V, rel=1e-9)
    assert ZIG_K[255] == 0  # top layer always takes the wedge test
    assert np.all(ZIG_W > 0)


@pytest.mark.parametrize("sampler", ["ziggurat", "invcdf"])
def test_exponential_distribution(sampler):
    g = gen(b"expks", config=RngConfig(exp_sampler=sampler))
    xs = np.array([g.exponential(1.0) for _ in range(200000)])
    assert np.all(xs > 0)
    res = stats.kstest(xs, "expon")
    assert res.pvalue > 1e-5
    assert abs(xs.mean() - 1.0) < 5 / math.sqrt(len(xs))


def test_exponential_tail_region_reachable():
    g = gen(b"tail", config=RngConfig(exp_sampler="ziggurat"))
    xs = [g.exponential(1.0) for _ in range(300000)]
    frac_tail = sum(x > ZIG_R for x in xs) / len(xs)
    expected = math.exp(-ZIG_R)
    assert frac_tail == pytest.approx(expected, rel=0.5)


def test_exponential_rate_scaling_is_exact_division():
    g1, g2 = gen(b"s"), gen(b"s")
    for _ in range(100):
        a = g1.exponential(1.0)
        b = g2.exponential(4.0)
        assert b == a / 4.0


def test_exponential_rate_validation():
    g = gen()
    for bad in (0.0, -1.0, math.inf, math.nan):
        with pytest.raises(ValueError):
            g.exponential(bad)


def test_sampler_choice_changes_stream_and_tag():
    gz = gen(config=RngConfig(exp_sampler="ziggurat"))
    gi = gen(config=RngConfig(exp_sampler="invcdf"))
    assert gz.exponential(1.0) != gi.exponential(1.0)
    assert gz.config.tag == "xxh64/ziggurat/v1"
    assert gi.config.tag == "xxh64/invcdf/v1"


# --- config -----------------------------------------------------------------


def test_config_tag_roundtrip():
    for cfg in (RngConfig(), RngConfig(exp_sampler="invcdf")):
        assert config_from_tag(cfg.tag) == cfg
    with pytest.raises(ValueError):
        config_from_tag("xxh64/ziggurat/v2")
    with pytest.raises(ValueError):
        RngConfig(exp_sampler="mersenne")


def test_default_config_is_ziggurat():
    assert DEFAULT_CONFIG.exp_sampler == "ziggurat"
    assert DEFAULT_CONFIG.sampler_id == 0
