import struct

import pytest
import xxhash
from hypothesis import given, settings
from hypothesis import strategies as st

from bagminhash import hashing
from bagminhash.hashing import xxh64

# Published xxHash64 vectors (seed 0).
KNOWN_DIGESTS = [
    (b"", 0, 0xEF46DB3751D8E999),
    (b"a", 0, 0xD24EC4F1A98C6E5B),
    (b"abc", 0, 0x44BC2CF5AD770999),
]


@pytest.mark.parametrize("data,seed,expected", KNOWN_DIGESTS)
def test_known_vectors(data, seed, expected):
    assert xxh64(data, seed) == expected


@given(st.binary(min_size=0, max_size=200), st.integers(min_value=0, max_value=2**64 - 1))
@settings(max_examples=500, deadline=None)
def test_matches_reference_library(data, seed):
    assert xxh64(data, seed) == xxhash.xxh64_intdigest(data, seed)


def test_covers_all_length_branches():
    # 0, tail-only, 4-byte chunk, 8-byte lane, and the >=32-byte block path,
    # including lengths that exercise every combination of leftovers.
    for n in list(range(0, 40)) + [63, 64, 65, 100]:
        data = bytes((7 * i + 3) % 256 for i in range(n))
        for seed in (0, 1, 0xDEADBEEF, 2**64 - 1):
            assert xxh64(data, seed) == xxhash.xxh64_intdigest(data, seed)


def test_seed_out_of_range_rejected():
    with pytest.raises(ValueError):
        xxh64(b"x", -1)
    with pytest.raises(ValueError):
        xxh64(b"x", 2**64)


def test_seed_encodings_are_disjoint():
    # Same numeric payload under different tags must give different bytes.
    seeds = [
        hashing.element_seed(5),
        hashing.level_pair_seed(5, 0),
        hashing.split_seed(0.0, 5),
        hashing.component_seed(0.0),
        hashing.icws_seed(5, 0),
        hashing.replication_seed(5, 0),
    ]
    assert len(set(seeds)) == len(seeds)
    for s in seeds:
        assert len(s) in (9, 17)
        assert 1 <= s[0] <= 6


def test_seed_encodings_layout():
    assert hashing.element_seed(0x0102030405060708) == bytes(
        [0x01, 0x08, 0x07, 0x06, 0x05, 0x04, 0x03, 0x02, 0x01]
    )
    assert hashing.level_pair_seed(1, 2) == b"\x02" + (1).to_bytes(8, "little") + (
        2
    ).to_bytes(8, "little")
    # The split seed keys on the bit pattern of the point.
    x = 1.5
    assert hashing.split_seed(x, 9)[1:9] == struct.pack("<d", x)
    assert hashing.split_seed(x, 9) != hashing.split_seed(-x, 9)


@given(st.integers(min_value=0, max_value=2**64 - 1))
@settings(max_examples=100, deadline=None)
def test_element_seed_roundtrip(d):
    s = hashing.element_seed(d)
    assert int.from_bytes(s[1:], "little") == d
