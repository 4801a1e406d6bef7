"""64-bit hashing and the seed encodings that derive every random stream.

All randomness in this package is counter-based: a generator hashes its
fixed seed bytes with an incrementing 64-bit hash seed (the counter) to
produce one 64-bit block per call.  The hash is xxHash64; it is implemented
here rather than taken from a binding because the compiled kernels need the
exact same function inlined, and because signature reproducibility is part
of the public contract, pinned by test vectors.

Seed byte strings are built from single-byte domain tags so that streams
from different contexts can never collide:

==================  =====================================  ======
tag                 payload                                length
==================  =====================================  ======
``TAG_ELEMENT``     element id (u64 LE)                    9
``TAG_LEVEL_PAIR``  element id, grid level (u64 LE each)   17
``TAG_SPLIT``       point bits (f64 LE), split index       17
``TAG_COMPONENT``   component value bits (f64 LE)          9
``TAG_ICWS``        element id, component index            17
``TAG_REPLICATION`` master seed, replication index         17
==================  =====================================  ======
"""

from __future__ import annotations

import struct

MASK64 = 0xFFFFFFFFFFFFFFFF

PRIME64_1 = 0x9E3779B185EBCA87
PRIME64_2 = 0xC2B2AE3D27D4EB4F
PRIME64_3 = 0x165667B19E3779F9
PRIME64_4 = 0x85EBCA77C2B2AE63
PRIME64_5 = 0x27D4EB2F165667C5

TAG_ELEMENT = 0x01
TAG_LEVEL_PAIR = 0x02
TAG_SPLIT = 0x03
TAG_COMPONENT = 0x04
TAG_ICWS = 0x05
TAG_REPLICATION = 0x06

MAX_SEED_BYTES = 64


def _rotl(x: int, r: int) -> int:
    return ((x << r) | (x >> (64 - r))) & MASK64


def _round(acc: int, lane: int) -> int:
    acc = (acc + lane * PRIME64_2) & MASK64
    return (_rotl(acc, 31) * PRIME64_1) & MASK64


def _merge_round(acc: int, val: int) -> int:
    acc ^= _round(0, val)
    return (acc * PRIME64_1 + PRIME64_4) & MASK64


def _avalanche(acc: int) -> int:
    acc ^= acc >> 33
    acc = (acc * PRIME64_2) & MASK64
    acc ^= acc >> 29
    acc = (acc * PRIME64_3) & MASK64
    acc ^= acc >> 32
    return acc


def xxh64(data: bytes, seed: int = 0) -> int:
    """xxHash64 of ``data`` with a 64-bit ``seed``, as an unsigned int."""
    if not 0 <= seed <= MASK64:
        raise ValueError("seed must be an unsigned 64-bit integer")
    n = len(data)
    i = 0
    if n >= 32:
        v1 = (seed + PRIME64_1 + PRIME64_2) & MASK64
        v2 = (seed + PRIME64_2) & MASK64
        v3 = seed
        v4 = (seed - PRIME64_1) & MASK64
        while i <= n - 32:
            v1 = _round(v1, int.from_bytes(data[i : i + 8], "little"))
            v2 = _round(v2, int.from_bytes(data[i + 8 : i + 16], "little"))
            v3 = _round(v3, int.from_bytes(data[i + 16 : i + 24], "little"))
            v4 = _round(v4, int.from_bytes(data[i + 24 : i + 32], "little"))
            i += 32
        acc = (_rotl(v1, 1) + _rotl(v2, 7) + _rotl(v3, 12) + _rotl(v4, 18)) & MASK64
        acc = _merge_round(acc, v1)
        acc = _merge_round(acc, v2)
        acc = _merge_round(acc, v3)
        acc = _merge_round(acc, v4)
    else:
        acc = (seed + PRIME64_5) & MASK64
    acc = (acc + n) & MASK64
    while i + 8 <= n:
        acc ^= _round(0, int.from_bytes(data[i : i + 8], "little"))
        acc = (_rotl(acc, 27) * PRIME64_1 + PRIME64_4) & MASK64
        i += 8
    if i + 4 <= n:
        acc ^= (int.from_bytes(data[i : i + 4], "little") * PRIME64_1) & MASK64
        acc = (_rotl(acc, 23) * PRIME64_2 + PRIME64_3) & MASK64
        i += 4
    while i < n:
        acc ^= (data[i] * PRIME64_5) & MASK64
        acc = (_rotl(acc, 11) * PRIME64_1) & MASK64
        i += 1
    return _avalanche(acc)


def element_seed(element_id: int) -> bytes:
    """Seed of the root point process of one bag element."""
    return struct.pack("<BQ", TAG_ELEMENT, element_id)


def level_pair_seed(element_id: int, level: int) -> bytes:
    """Seed of the elementary process for (element, grid level)."""
    return struct.pack("<BQQ", TAG_LEVEL_PAIR, element_id, level)


def split_seed(point: float, split_index: int) -> bytes:
    """Seed of the sibling process created by splitting at ``split_index``.

    The point value enters via its IEEE-754 bit pattern, so two splits at
    the same index but different points get distinct streams.
    """
    return struct.pack("<BdQ", TAG_SPLIT, point, split_index)


def component_seed(value: float) -> bytes:
    """Seed of the per-component stream used by the b-bit transform."""
    return struct.pack("<Bd", TAG_COMPONENT, value)


def icws_seed(element_id: int, component: int) -> bytes:
    """Seed of the per-(element, component) stream of the ICWS baseline."""
    return struct.pack("<BQQ", TAG_ICWS, element_id, component)


def replication_seed(master_seed: int, replication: int) -> bytes:
    """Seed of one replication of a verification or benchmark run."""
    return struct.pack("<BQQ", TAG_REPLICATION, master_seed, replication)
