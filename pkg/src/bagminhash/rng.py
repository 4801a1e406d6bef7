"""Counter-based random streams with exactly reproducible draw semantics.

A :class:`SeededGenerator` owns an immutable seed byte string and produces
64-bit blocks by hashing that seed with an incrementing counter.  On top of
the block stream it offers the draw kinds the signature algorithms need.
The order in which draws consume randomness is part of the public contract
(the compiled kernels replay it bit for bit):

* ``next_u64`` hashes and bumps the counter; it never touches the bit
  buffer.
* ``uniform_bits`` / ``uniform_index`` / ``bernoulli`` consume individual
  bits from a little-endian bit buffer that is refilled from ``next_u64``
  whenever it runs dry.
* ``uniform_double`` and ``exponential`` always take whole fresh blocks,
  bypassing the bit buffer.

``bernoulli(num, den)`` is exact: it compares a uniform bit stream against
the binary expansion of ``num / den`` digit by digit, using only arithmetic
that is error-free for IEEE doubles (doubling below the denominator, and
Sterbenz subtraction of the denominator from values in ``[den, 2 den)``).
``uniform_index`` is the Lumbroso fast dice roller, also exact.

Exponential draws default to a 256-layer ziggurat rejection sampler with a
53-bit value path; inverse-CDF sampling is available as an alternative via
:class:`RngConfig`.  The choice is recorded in the config tag that
signatures carry, since it changes the realized values.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .hashing import MAX_SEED_BYTES, xxh64

SAMPLER_ZIGGURAT = "ziggurat"
SAMPLER_INVCDF = "invcdf"

_SAMPLER_IDS = {SAMPLER_ZIGGURAT: 0, SAMPLER_INVCDF: 1}

# Tail split point and common layer area of the Exp(1) ziggurat.
ZIG_R = 7.69711747013104972
ZIG_V = 3.9496598225815571993e-3

_TWO53 = 9007199254740992.0  # 2.0 ** 53
_INV_TWO52 = 2.0 ** -52


def _build_exp_ziggurat() -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Tables for the Exp(1) ziggurat.

    ``x[i]`` are the layer boundaries, descending from the tail split at
    ``x[0] = ZIG_R`` to the forced top ``x[255] = 0``; ``f[i] = exp(-x[i])``.
    Layer ``i >= 1`` proposes uniformly on ``[0, x[i-1]]`` (width table
    ``w``), fast-accepts below ``x[i]`` (integer threshold table ``k``
    against a 53-bit draw), and otherwise tests the wedge.  Layer 0 is the
    base strip whose width folds in the tail area, so a proposal beyond
    ``ZIG_R`` falls through to the exact tail sampler.
    """
    x = np.empty(256)
    f = np.empty(256)
    x[0] = ZIG_R
    f[0] = math.exp(-ZIG_R)
    for i in range(1, 255):
        x[i] = -math.log(ZIG_V / x[i - 1] + f[i - 1])
        f[i] = math.exp(-x[i])
    x[255] = 0.0
    f[255] = 1.0
    w = np.empty(256)
    k = np.empty(256, dtype=np.uint64)
    base_width = ZIG_V / f[0]
    w[0] = base_width / _TWO53
    k[0] = int(_TWO53 * (ZIG_R / base_width))
    for i in range(1, 256):
        w[i] = x[i - 1] / _TWO53
        k[i] = int(_TWO53 * (x[i] / x[i - 1]))
    return w, k, f, x


ZIG_W, ZIG_K, ZIG_F, ZIG_X = _build_exp_ziggurat()


@dataclass(frozen=True)
class RngConfig:
    """Selects the exponential sampler; everything else is fixed."""

    exp_sampler: str = SAMPLER_ZIGGURAT

    def __post_init__(self) -> None:
        if self.exp_sampler not in _SAMPLER_IDS:
            raise ValueError(f"unknown exponential sampler: {self.exp_sampler!r}")

    @property
    def tag(self) -> str:
        return f"xxh64/{self.exp_sampler}/v1"

    @property
    def sampler_id(self) -> int:
        return _SAMPLER_IDS[self.exp_sampler]


DEFAULT_CONFIG = RngConfig()


def config_from_tag(tag: str) -> RngConfig:
    parts = tag.split("/")
    if len(parts) != 3 or parts[0] != "xxh64" or parts[2] != "v1":
        raise ValueError(f"unrecognized config tag: {tag!r}")
    return RngConfig(exp_sampler=parts[1])


class SeededGenerator:
    """Deterministic stream of draws derived from a fixed seed byte string."""

    __slots__ = ("seed_bytes", "_counter", "_buf", "_nbits", "_config")

    def __init__(self, seed_bytes: bytes, config: RngConfig = DEFAULT_CONFIG) -> None:
        if not isinstance(seed_bytes, (bytes, bytearray)):
            raise ValueError("seed must be a byte string")
        if not 1 <= len(seed_bytes) <= MAX_SEED_BYTES:
            raise ValueError(
                f"seed must be 1..{MAX_SEED_BYTES} bytes, got {len(seed_bytes)}"
            )
        self.seed_bytes = bytes(seed_bytes)
        self._counter = 0
        self._buf = 0
        self._nbits = 0
        self._config = config

    @property
    def config(self) -> RngConfig:
        return self._config

    def next_u64(self) -> int:
        value = xxh64(self.seed_bytes, self._counter)
        self._counter = (self._counter + 1) & 0xFFFFFFFFFFFFFFFF
        return value

    def uniform_bits(self, bits: int) -> int:
        """The next ``bits`` bits of the stream, little-endian, as an int."""
        if not 1 <= bits <= 64:
            raise ValueError("bit count must be in [1, 64]")
        result = 0
        got = 0
        while got < bits:
            if self._nbits == 0:
                self._buf = self.next_u64()
                self._nbits = 64
            take = min(bits - got, self._nbits)
            result |= (self._buf & ((1 << take) - 1)) << got
            self._buf >>= take
            self._nbits -= take
            got += take
        return result

    def uniform_double(self) -> float:
        """Uniform on the open interval (0, 1), 52-bit resolution.

        ``(j + 0.5) * 2**-52`` with a 52-bit ``j`` is exact and can reach
        neither endpoint; a 53-bit ``j`` would round ``j + 0.5`` and admit
        an exact 1.0.
        """
        return ((self.next_u64() >> 12) + 0.5) * _INV_TWO52

    def bernoulli(self, numerator: float, denominator: float) -> bool:
        """Exact Bernoulli(numerator / denominator) draw.

        Consumes one bit per matched digit of the binary expansion, two in
        expectation.  Ties (the uniform hitting the probability exactly)
        resolve to False, which only affects a measure-zero event.
        """
        if not (math.isfinite(denominator) and 0.0 < denominator <= 2.0**1023):
            raise ValueError("denominator must be positive, finite, and at most 2**1023")
        if not (numerator >= 0.0 and numerator <= denominator):
            raise ValueError("numerator must lie in [0, denominator]")
        if numerator == 0.0:
            return False
        if numerator == denominator:
            return True
        num = numerator
        while True:
            num *= 2.0
            if num >= denominator:
                digit = 1
                num -= denominator
            else:
                digit = 0
            if self.uniform_bits(1) != digit:
                return digit == 1
            if num == 0.0:
                return False

    def uniform_index(self, m: int) -> int:
        """Uniform draw from {1, ..., m} (fast dice roller; exact).

        Consumes exactly ``log2(m)`` bits when ``m`` is a power of two and
        none at all for ``m == 1``.
        """
        if m < 1:
            raise ValueError("m must be at least 1")
        if m == 1:
            return 1
        v = 1
        c = 0
        while True:
            v <<= 1
            c = (c << 1) | self.uniform_bits(1)
            if v >= m:
                if c < m:
                    return c + 1
                v -= m
                c -= m

    def _exp_unit(self) -> float:
        if self._config.sampler_id == 1:
            return -math.log(self.uniform_double())
        while True:
            u = self.next_u64()
            i = u & 255
            j = u >> 11
            x = j * ZIG_W[i]
            if j < ZIG_K[i]:
                if x > 0.0:
                    return x
                continue
            if i == 0:
                # Exact tail: Exp(1) conditioned on exceeding ZIG_R.
                return ZIG_R - math.log(self.uniform_double())
            if x > 0.0 and ZIG_F[i - 1] + self.uniform_double() * (
                ZIG_F[i] - ZIG_F[i - 1]
            ) < math.exp(-x):
                return x

    def exponential(self, rate: float) -> float:
        """Exponential draw with the given rate; strictly positive."""
        if not (math.isfinite(rate) and rate > 0.0):
            raise ValueError("rate must be positive and finite")
        return self._exp_unit() / rate
