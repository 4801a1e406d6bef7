"""Compiled kernels for the signature algorithms.

Everything in this module replays the draw semantics of
:mod:`bagminhash.rng`, :mod:`bagminhash.poisson`, and
:mod:`bagminhash.maxtracker` bit for bit; the cross-engine tests pin byte
equality against the pure-Python implementations.  Generator state is the
tuple (kind, a, b, ctr, buf, nb): the seed namespace tag, two 64-bit seed
payload words, the block counter, and the bit buffer with its fill level.
Poisson process records live in preallocated pools of parallel arrays that
grow by doubling; heaps store (key, tiebreak, record id) triples.

Unsigned arithmetic note: numba promotes uint64 combined with a signed
literal to a signed (or floating) type, so all hash arithmetic uses
explicitly typed uint64 constants.  Shifts and masks by literals are safe.
"""

from __future__ import annotations

import math

import numpy as np
from numba import njit

from . import hashing
from .rng import ZIG_F, ZIG_K, ZIG_R, ZIG_W

U64 = np.uint64

_P1 = U64(hashing.PRIME64_1)
_P2 = U64(hashing.PRIME64_2)
_P3 = U64(hashing.PRIME64_3)
_P4 = U64(hashing.PRIME64_4)
_P5 = U64(hashing.PRIME64_5)

TAG_ELEMENT = U64(hashing.TAG_ELEMENT)
TAG_LEVEL_PAIR = U64(hashing.TAG_LEVEL_PAIR)
TAG_SPLIT = U64(hashing.TAG_SPLIT)
TAG_COMPONENT = U64(hashing.TAG_COMPONENT)
TAG_ICWS = U64(hashing.TAG_ICWS)
TAG_REPLICATION = U64(hashing.TAG_REPLICATION)

_ZIG_R = float(ZIG_R)
_U0 = U64(0)
_U1 = U64(1)
_FULL = U64(0xFFFFFFFFFFFFFFFF)


# --- hashing -----------------------------------------------------------------


@njit(cache=True, inline="always")
def _rotl(x, r):
    return (x << U64(r)) | (x >> U64(64 - r))


@njit(cache=True, inline="always")
def _round0(lane):
    return _rotl(lane * _P2, 31) * _P1


@njit(cache=True, inline="always")
def _avalanche(acc):
    acc ^= acc >> U64(33)
    acc = acc * _P2
    acc ^= acc >> U64(29)
    acc = acc * _P3
    acc ^= acc >> U64(32)
    return acc


@njit(cache=True)
def _h9(tag, a, ctr):
    # xxh64 of the 9-byte message [tag][a LE] with seed ctr.
    acc = ctr + _P5 + U64(9)
    acc ^= _round0(tag | (a << U64(8)))
    acc = _rotl(acc, 27) * _P1 + _P4
    acc ^= (a >> U64(56)) * _P5
    acc = _rotl(acc, 11) * _P1
    return _avalanche(acc)


@njit(cache=True)
def _h17(tag, a, b, ctr):
    # xxh64 of the 17-byte message [tag][a LE][b LE] with seed ctr.
    acc = ctr + _P5 + U64(17)
    acc ^= _round0(tag | (a << U64(8)))
    acc = _rotl(acc, 27) * _P1 + _P4
    acc ^= _round0((a >> U64(56)) | (b << U64(8)))
    acc = _rotl(acc, 27) * _P1 + _P4
    acc ^= (b >> U64(56)) * _P5
    acc = _rotl(acc, 11) * _P1
    return _avalanche(acc)


@njit(cache=True, inline="always")
def _g_block(kind, a, b, ctr):
    if kind == TAG_ELEMENT or kind == TAG_COMPONENT:
        return _h9(kind, a, ctr)
    return _h17(kind, a, b, ctr)


# --- generator operations ----------------------------------------------------


@njit(cache=True, inline="always")
def _g_bit(kind, a, b, ctr, buf, nb):
    if nb == 0:
        buf = _g_block(kind, a, b, ctr)
        ctr += _U1
        nb = 64
    bit = buf & _U1
    buf >>= _U1
    nb -= 1
    return bit, ctr, buf, nb


@njit(cache=True)
def _g_bits(kind, a, b, ctr, buf, nb, count):
    result = _U0
    got = 0
    while got < count:
        if nb == 0:
            buf = _g_block(kind, a, b, ctr)
            ctr += _U1
            nb = 64
        take = count - got
        if take > nb:
            take = nb
        if take >= 64:
            result = buf
            buf = _U0
        else:
            result |= (buf & ((_U1 << U64(take)) - _U1)) << U64(got)
            buf >>= U64(take)
        nb -= take
        got += take
    return result, ctr, buf, nb


@njit(cache=True)
def _g_bernoulli(kind, a, b, ctr, buf, nb, num, den):
    if num <= 0.0:
        return False, ctr, buf, nb
    if num >= den:
        return True, ctr, buf, nb
    while True:
        num *= 2.0
        digit = num >= den
        if digit:
            num -= den
        bit, ctr, buf, nb = _g_bit(kind, a, b, ctr, buf, nb)
        if (bit != _U0) != digit:
            return digit, ctr, buf, nb
        if num == 0.0:
            return False, ctr, buf, nb


@njit(cache=True)
def _g_index(kind, a, b, ctr, buf, nb, m):
    # Uniform on {1..m}; exactly log2(m) bits for powers of two.
    if m == 1:
        return 1, ctr, buf, nb
    v = 1
    c = 0
    while True:
        v <<= 1
        bit, ctr, buf, nb = _g_bit(kind, a, b, ctr, buf, nb)
        c = (c << 1) | np.int64(bit)
        if v >= m:
            if c < m:
                return c + 1, ctr, buf, nb
            v -= m
            c -= m


@njit(cache=True, inline="always")
def _g_double(kind, a, b, ctr):
    u = _g_block(kind, a, b, ctr)
    ctr += _U1
    return (np.float64(u >> U64(12)) + 0.5) * 2.0**-52, ctr


@njit(cache=True)
def _g_exp_unit(kind, a, b, ctr, sampler, zw, zk, zf):
    if sampler == 1:
        u, ctr = _g_double(kind, a, b, ctr)
        return -math.log(u), ctr
    while True:
        blk = _g_block(kind, a, b, ctr)
        ctr += _U1
        i = np.int64(blk & U64(255))
        j = blk >> U64(11)
        x = np.float64(j) * zw[i]
        if j < zk[i]:
            if x > 0.0:
                return x, ctr
            continue
        if i == 0:
            u, ctr = _g_double(kind, a, b, ctr)
            return _ZIG_R - math.log(u), ctr
        u, ctr = _g_double(kind, a, b, ctr)
        if x > 0.0 and zf[i - 1] + u * (zf[i] - zf[i - 1]) < math.exp(-x):
            return x, ctr


# --- grid values -------------------------------------------------------------


@njit(cache=True, inline="always")
def _gval(gkind, gvals, k):
    # For the float32 grid, gvals holds the per-exponent scale (exact
    # powers of two), so the product below reproduces value_at exactly.
    if gkind == 0:
        return gvals[k]
    exponent = k >> 23
    mantissa = k & 0x7FFFFF
    if exponent == 0:
        return np.float64(mantissa) * gvals[0]
    return gvals[exponent] * (1.0 + np.float64(mantissa) * 2.0**-23)


# --- running max tree --------------------------------------------------------


@njit(cache=True)
def _tree_update(tree, m, leaf, x):
    # leaf is 1-based; tree[2m-1] is the root. Mirrors MaxTracker.update
    # for power-of-two m.
    i = leaf
    val = x
    while val < tree[i]:
        tree[i] = val
        i = m + (i + 1) // 2
        if i >= 2 * m:
            break
        left = tree[2 * (i - m) - 1]
        right = tree[2 * (i - m)]
        val = left if left > right else right


# --- record pool -------------------------------------------------------------

# F columns: 0 = current point x, 1 = element weight
# I columns: 0 = lower level, 1 = upper level, 2 = bit-buffer fill, 3 = component
# U columns: 0 = seed kind, 1 = seed word a, 2 = seed word b, 3 = counter, 4 = bit buffer


@njit(cache=True)
def _rec_next_point(F, I, U, rid, m, gkind, gvals, sampler, zw, zk, zf):
    rate = _gval(gkind, gvals, I[rid, 1]) - _gval(gkind, gvals, I[rid, 0])
    kind = U[rid, 0]
    a = U[rid, 1]
    b = U[rid, 2]
    ctr = U[rid, 3]
    e, ctr = _g_exp_unit(kind, a, b, ctr, sampler, zw, zk, zf)
    buf = U[rid, 4]
    nb = I[rid, 2]
    comp, ctr, buf, nb = _g_index(kind, a, b, ctr, buf, nb, m)
    F[rid, 0] = F[rid, 0] + e / rate
    I[rid, 3] = comp
    I[rid, 2] = nb
    U[rid, 3] = ctr
    U[rid, 4] = buf


@njit(cache=True)
def _rec_split(F, I, U, rid, sid, gkind, gvals, xf, xu):
    """Split record rid at its midpoint; sid becomes the sibling."""
    lower = I[rid, 0]
    upper = I[rid, 1]
    q = (lower + upper) // 2
    v_lower = _gval(gkind, gvals, lower)
    v_mid = _gval(gkind, gvals, q)
    v_upper = _gval(gkind, gvals, upper)
    kind = U[rid, 0]
    a = U[rid, 1]
    b = U[rid, 2]
    ctr = U[rid, 3]
    buf = U[rid, 4]
    nb = I[rid, 2]
    res, ctr, buf, nb = _g_bernoulli(
        kind, a, b, ctr, buf, nb, v_mid - v_lower, v_upper - v_lower
    )
    I[rid, 2] = nb
    U[rid, 3] = ctr
    U[rid, 4] = buf
    xf[0] = F[rid, 0]
    F[sid, 0] = F[rid, 0]
    F[sid, 1] = F[rid, 1]
    U[sid, 0] = TAG_SPLIT
    U[sid, 1] = xu[0]
    U[sid, 2] = U64(q)
    U[sid, 3] = _U0
    U[sid, 4] = _U0
    I[sid, 2] = 0
    I[sid, 3] = 0
    if res:
        I[sid, 0] = q
        I[sid, 1] = upper
        I[rid, 1] = q
    else:
        I[sid, 0] = lower
        I[sid, 1] = q
        I[rid, 0] = q


@njit(cache=True, inline="always")
def _partially_relevant(F, I, rid, gkind, gvals):
    return _gval(gkind, gvals, I[rid, 0] + 1) <= F[rid, 1]


@njit(cache=True, inline="always")
def _fully_relevant(F, I, rid, gkind, gvals):
    return _gval(gkind, gvals, I[rid, 1]) <= F[rid, 1]


# --- heaps -------------------------------------------------------------------


@njit(cache=True)
def _minheap_push(hx, hs, hr, hn, x, s, r):
    i = hn
    hx[i] = x
    hs[i] = s
    hr[i] = r
    while i > 0:
        p = (i - 1) >> 1
        if hx[p] > hx[i] or (hx[p] == hx[i] and hs[p] > hs[i]):
            hx[p], hx[i] = hx[i], hx[p]
            hs[p], hs[i] = hs[i], hs[p]
            hr[p], hr[i] = hr[i], hr[p]
            i = p
        else:
            break
    return hn + 1


@njit(cache=True)
def _minheap_pop(hx, hs, hr, hn):
    rid = hr[0]
    hn -= 1
    if hn > 0:
        hx[0] = hx[hn]
        hs[0] = hs[hn]
        hr[0] = hr[hn]
        i = 0
        while True:
            left = 2 * i + 1
            if left >= hn:
                break
            small = left
            right = left + 1
            if right < hn and (
                hx[right] < hx[left] or (hx[right] == hx[left] and hs[right] < hs[left])
            ):
                small = right
            if hx[small] < hx[i] or (hx[small] == hx[i] and hs[small] < hs[i]):
                hx[small], hx[i] = hx[i], hx[small]
                hs[small], hs[i] = hs[i], hs[small]
                hr[small], hr[i] = hr[i], hr[small]
                i = small
            else:
                break
    return rid, hn


@njit(cache=True)
def _maxheap_push(hx, hs, hr, hn, x, s, r):
    i = hn
    hx[i] = x
    hs[i] = s
    hr[i] = r
    while i > 0:
        p = (i - 1) >> 1
        if hx[p] < hx[i] or (hx[p] == hx[i] and hs[p] > hs[i]):
            hx[p], hx[i] = hx[i], hx[p]
            hs[p], hs[i] = hs[i], hs[p]
            hr[p], hr[i] = hr[i], hr[p]
            i = p
        else:
            break
    return hn + 1


@njit(cache=True)
def _maxheap_pop(hx, hs, hr, hn):
    rid = hr[0]
    hn -= 1
    if hn > 0:
        hx[0] = hx[hn]
        hs[0] = hs[hn]
        hr[0] = hr[hn]
        i = 0
        while True:
            left = 2 * i + 1
            if left >= hn:
                break
            big = left
            right = left + 1
            if right < hn and (
                hx[right] > hx[left] or (hx[right] == hx[left] and hs[right] < hs[left])
            ):
                big = right
            if hx[big] > hx[i] or (hx[big] == hx[i] and hs[big] < hs[i]):
                hx[big], hx[i] = hx[i], hx[big]
                hs[big], hs[i] = hs[i], hs[big]
                hr[big], hr[i] = hr[i], hr[big]
                i = big
            else:
                break
    return rid, hn


# --- signature kernels -------------------------------------------------------


@njit(cache=True)
def _naive_kernel(ids, weights, kmaxs, m, gkind, gvals, sampler, zw, zk, zf):
    h = np.full(m, np.inf)
    for ei in range(ids.size):
        d = ids[ei]
        for k in range(1, kmaxs[ei] + 1):
            rate = (_gval(gkind, gvals, k) - _gval(gkind, gvals, k - 1)) / m
            ctr = _U0
            for i in range(m):
                e, ctr = _g_exp_unit(TAG_LEVEL_PAIR, d, U64(k), ctr, sampler, zw, zk, zf)
                x = e / rate
                if x < h[i]:
                    h[i] = x
    return h


@njit(cache=True)
def _enhanced_kernel(ids, weights, kmaxs, m, gkind, gvals, sampler, zw, zk, zf):
    tree = np.full(2 * m, np.inf)
    root = 2 * m - 1
    for ei in range(ids.size):
        d = ids[ei]
        for k in range(1, kmaxs[ei] + 1):
            rate = _gval(gkind, gvals, k) - _gval(gkind, gvals, k - 1)
            b = U64(k)
            ctr = _U0
            buf = _U0
            nb = 0
            e, ctr = _g_exp_unit(TAG_LEVEL_PAIR, d, b, ctr, sampler, zw, zk, zf)
            x = e / rate
            comp, ctr, buf, nb = _g_index(TAG_LEVEL_PAIR, d, b, ctr, buf, nb, m)
            while x <= tree[root]:
                _tree_update(tree, m, comp, x)
                e, ctr = _g_exp_unit(TAG_LEVEL_PAIR, d, b, ctr, sampler, zw, zk, zf)
                x = x + e / rate
                comp, ctr, buf, nb = _g_index(TAG_LEVEL_PAIR, d, b, ctr, buf, nb, m)
    return tree[1 : m + 1].copy()


@njit(cache=True)
def _bmh1_kernel(ids, weights, m, gkind, gvals, gupper, sampler, zw, zk, zf):
    tree = np.full(2 * m, np.inf)
    root = 2 * m - 1
    v1 = _gval(gkind, gvals, 1)
    cap = 256
    F = np.empty((cap, 2))
    I = np.empty((cap, 4), dtype=np.int64)
    U = np.empty((cap, 5), dtype=np.uint64)
    hx = np.empty(cap)
    hs = np.empty(cap, dtype=np.int64)
    hr = np.empty(cap, dtype=np.int64)
    xf = np.empty(1)
    xu = xf.view(np.uint64)
    peak = 0
    for ei in range(ids.size):
        w = weights[ei]
        if w < v1:
            continue
        nrec = 1
        hn = 0
        seq = 0
        cur = 0
        F[0, 0] = 0.0
        F[0, 1] = w
        I[0, 0] = 0
        I[0, 1] = gupper
        I[0, 2] = 0
        I[0, 3] = 0
        U[0, 0] = TAG_ELEMENT
        U[0, 1] = ids[ei]
        U[0, 2] = _U0
        U[0, 3] = _U0
        U[0, 4] = _U0
        _rec_next_point(F, I, U, 0, m, gkind, gvals, sampler, zw, zk, zf)
        if _fully_relevant(F, I, 0, gkind, gvals):
            _tree_update(tree, m, I[0, 3], F[0, 0])
        while F[cur, 0] <= tree[root]:
            while I[cur, 0] + 1 < I[cur, 1] and _partially_relevant(F, I, cur, gkind, gvals):
                if nrec == cap:
                    cap2 = cap * 2
                    F2 = np.empty((cap2, 2))
                    F2[:cap] = F
                    F = F2
                    I2 = np.empty((cap2, 4), dtype=np.int64)
                    I2[:cap] = I
                    I = I2
                    U2 = np.empty((cap2, 5), dtype=np.uint64)
                    U2[:cap] = U
                    U = U2
                    hx2 = np.empty(cap2)
                    hx2[:cap] = hx
                    hx = hx2
                    hs2 = np.empty(cap2, dtype=np.int64)
                    hs2[:cap] = hs
                    hs = hs2
                    hr2 = np.empty(cap2, dtype=np.int64)
                    hr2[:cap] = hr
                    hr = hr2
                    cap = cap2
                sid = nrec
                nrec += 1
                _rec_split(F, I, U, cur, sid, gkind, gvals, xf, xu)
                if _fully_relevant(F, I, cur, gkind, gvals):
                    _tree_update(tree, m, I[cur, 3], F[cur, 0])
                if _partially_relevant(F, I, sid, gkind, gvals):
                    _rec_next_point(F, I, U, sid, m, gkind, gvals, sampler, zw, zk, zf)
                    if _fully_relevant(F, I, sid, gkind, gvals):
                        _tree_update(tree, m, I[sid, 3], F[sid, 0])
                    if F[sid, 0] <= tree[root]:
                        hn = _minheap_push(hx, hs, hr, hn, F[sid, 0], seq, sid)
                        seq += 1
                        if hn + 1 > peak:
                            peak = hn + 1
            if _fully_relevant(F, I, cur, gkind, gvals):
                _rec_next_point(F, I, U, cur, m, gkind, gvals, sampler, zw, zk, zf)
                _tree_update(tree, m, I[cur, 3], F[cur, 0])
                if F[cur, 0] <= tree[root]:
                    hn = _minheap_push(hx, hs, hr, hn, F[cur, 0], seq, cur)
                    seq += 1
                    if hn + 1 > peak:
                        peak = hn + 1
            if hn == 0:
                break
            cur, hn = _minheap_pop(hx, hs, hr, hn)
    return tree[1 : m + 1].copy(), peak


@njit(cache=True)
def _bmh2_kernel(ids, weights, m, gkind, gvals, gupper, sampler, zw, zk, zf):
    tree = np.full(2 * m, np.inf)
    root = 2 * m - 1
    v1 = _gval(gkind, gvals, 1)
    cap = 256
    F = np.empty((cap, 2))
    I = np.empty((cap, 4), dtype=np.int64)
    U = np.empty((cap, 5), dtype=np.uint64)
    fl = np.empty(cap, dtype=np.int64)
    fn = 0
    nrec = 0
    hx = np.empty(cap)
    hs = np.empty(cap, dtype=np.int64)
    hr = np.empty(cap, dtype=np.int64)
    hn = 0
    bcap = 256
    bx = np.empty(bcap)
    bs = np.empty(bcap, dtype=np.int64)
    br = np.empty(bcap, dtype=np.int64)
    bn = 0
    bufseq = 0
    xf = np.empty(1)
    xu = xf.view(np.uint64)
    peak = 0
    for ei in range(ids.size):
        w = weights[ei]
        if w < v1:
            continue
        hn = 0
        seq = 0
        # allocate the root record
        if fn > 0:
            fn -= 1
            cur = fl[fn]
        else:
            if nrec == cap:
                cap2 = cap * 2
                F2 = np.empty((cap2, 2))
                F2[:cap] = F
                F = F2
                I2 = np.empty((cap2, 4), dtype=np.int64)
                I2[:cap] = I
                I = I2
                U2 = np.empty((cap2, 5), dtype=np.uint64)
                U2[:cap] = U
                U = U2
                fl2 = np.empty(cap2, dtype=np.int64)
                fl2[:cap] = fl
                fl = fl2
                hx2 = np.empty(cap2)
                hx2[:cap] = hx
                hx = hx2
                hs2 = np.empty(cap2, dtype=np.int64)
                hs2[:cap] = hs
                hs = hs2
                hr2 = np.empty(cap2, dtype=np.int64)
                hr2[:cap] = hr
                hr = hr2
                cap = cap2
            cur = nrec
            nrec += 1
        F[cur, 0] = 0.0
        F[cur, 1] = w
        I[cur, 0] = 0
        I[cur, 1] = gupper
        I[cur, 2] = 0
        I[cur, 3] = 0
        U[cur, 0] = TAG_ELEMENT
        U[cur, 1] = ids[ei]
        U[cur, 2] = _U0
        U[cur, 3] = _U0
        U[cur, 4] = _U0
        _rec_next_point(F, I, U, cur, m, gkind, gvals, sampler, zw, zk, zf)
        if _fully_relevant(F, I, cur, gkind, gvals):
            _tree_update(tree, m, I[cur, 3], F[cur, 0])
        cur_live = True
        while F[cur, 0] <= tree[root]:
            while (
                I[cur, 0] + 1 < I[cur, 1]
                and _partially_relevant(F, I, cur, gkind, gvals)
                and not _fully_relevant(F, I, cur, gkind, gvals)
            ):
                if fn > 0:
                    fn -= 1
                    sid = fl[fn]
                else:
                    if nrec == cap:
                        cap2 = cap * 2
                        F2 = np.empty((cap2, 2))
                        F2[:cap] = F
                        F = F2
                        I2 = np.empty((cap2, 4), dtype=np.int64)
                        I2[:cap] = I
                        I = I2
                        U2 = np.empty((cap2, 5), dtype=np.uint64)
                        U2[:cap] = U
                        U = U2
                        fl2 = np.empty(cap2, dtype=np.int64)
                        fl2[:cap] = fl
                        fl = fl2
                        hx2 = np.empty(cap2)
                        hx2[:cap] = hx
                        hx = hx2
                        hs2 = np.empty(cap2, dtype=np.int64)
                        hs2[:cap] = hs
                        hs = hs2
                        hr2 = np.empty(cap2, dtype=np.int64)
                        hr2[:cap] = hr
                        hr = hr2
                        cap = cap2
                    sid = nrec
                    nrec += 1
                _rec_split(F, I, U, cur, sid, gkind, gvals, xf, xu)
                if _fully_relevant(F, I, cur, gkind, gvals):
                    _tree_update(tree, m, I[cur, 3], F[cur, 0])
                if _partially_relevant(F, I, sid, gkind, gvals):
                    _rec_next_point(F, I, U, sid, m, gkind, gvals, sampler, zw, zk, zf)
                    if _fully_relevant(F, I, sid, gkind, gvals):
                        _tree_update(tree, m, I[sid, 3], F[sid, 0])
                    if F[sid, 0] <= tree[root]:
                        hn = _minheap_push(hx, hs, hr, hn, F[sid, 0], seq, sid)
                        seq += 1
                        if hn + bn + 1 > peak:
                            peak = hn + bn + 1
                    else:
                        fl[fn] = sid
                        fn += 1
                else:
                    fl[fn] = sid
                    fn += 1
            if _fully_relevant(F, I, cur, gkind, gvals):
                hn = _minheap_push(hx, hs, hr, hn, F[cur, 0], seq, cur)
                seq += 1
                if hn + bn + 1 > peak:
                    peak = hn + bn + 1
                cur_live = False  # ownership moved into the heap
                break
            # current record is exhausted
            fl[fn] = cur
            fn += 1
            cur_live = False
            if hn == 0:
                break
            cur, hn = _minheap_pop(hx, hs, hr, hn)
            cur_live = True
        if cur_live:
            # left the loop on x > h_max; the current record is dead
            fl[fn] = cur
            fn += 1
        # drain the per-element heap (ascending) into the global buffer
        hmax = tree[root]
        while hn > 0:
            rid, hn = _minheap_pop(hx, hs, hr, hn)
            if F[rid, 0] <= hmax:
                if bn == bcap:
                    bcap2 = bcap * 2
                    bx2 = np.empty(bcap2)
                    bx2[:bcap] = bx
                    bx = bx2
                    bs2 = np.empty(bcap2, dtype=np.int64)
                    bs2[:bcap] = bs
                    bs = bs2
                    br2 = np.empty(bcap2, dtype=np.int64)
                    br2[:bcap] = br
                    br = br2
                    bcap = bcap2
                bn = _maxheap_push(bx, bs, br, bn, F[rid, 0], bufseq, rid)
                bufseq += 1
                if hn + bn + 1 > peak:
                    peak = hn + bn + 1
            else:
                fl[fn] = rid
                fn += 1
        # eager eviction of buffered records beyond the current max
        while bn > 0 and bx[0] > hmax:
            rid, bn = _maxheap_pop(bx, bs, br, bn)
            fl[fn] = rid
            fn += 1
    # phase two: move surviving buffer entries into one min-heap
    hn = 0
    seq = 0
    hmax = tree[root]
    while bn > 0:
        rid, bn = _maxheap_pop(bx, bs, br, bn)
        if F[rid, 0] <= hmax:
            if hn == hx.size:
                cap2 = hx.size * 2
                hx2 = np.empty(cap2)
                hx2[: hx.size] = hx
                hx = hx2
                hs2 = np.empty(cap2, dtype=np.int64)
                hs2[: hs.size] = hs
                hs = hs2
                hr2 = np.empty(cap2, dtype=np.int64)
                hr2[: hr.size] = hr
                hr = hr2
            hn = _minheap_push(hx, hs, hr, hn, F[rid, 0], seq, rid)
            seq += 1
    while hn > 0:
        cur, hn = _minheap_pop(hx, hs, hr, hn)
        if F[cur, 0] > tree[root]:
            break
        while I[cur, 0] + 1 < I[cur, 1] and _partially_relevant(F, I, cur, gkind, gvals):
            if fn > 0:
                fn -= 1
                sid = fl[fn]
            else:
                if nrec == cap:
                    cap2 = cap * 2
                    F2 = np.empty((cap2, 2))
                    F2[:cap] = F
                    F = F2
                    I2 = np.empty((cap2, 4), dtype=np.int64)
                    I2[:cap] = I
                    I = I2
                    U2 = np.empty((cap2, 5), dtype=np.uint64)
                    U2[:cap] = U
                    U = U2
                    fl2 = np.empty(cap2, dtype=np.int64)
                    fl2[:cap] = fl
                    fl = fl2
                    cap = cap2
                sid = nrec
                nrec += 1
            if hn + 1 >= hx.size:
                cap2 = hx.size * 2
                hx2 = np.empty(cap2)
                hx2[: hx.size] = hx
                hx = hx2
                hs2 = np.empty(cap2, dtype=np.int64)
                hs2[: hs.size] = hs
                hs = hs2
                hr2 = np.empty(cap2, dtype=np.int64)
                hr2[: hr.size] = hr
                hr = hr2
            _rec_split(F, I, U, cur, sid, gkind, gvals, xf, xu)
            if _fully_relevant(F, I, cur, gkind, gvals):
                _tree_update(tree, m, I[cur, 3], F[cur, 0])
            if _partially_relevant(F, I, sid, gkind, gvals):
                _rec_next_point(F, I, U, sid, m, gkind, gvals, sampler, zw, zk, zf)
                if _fully_relevant(F, I, sid, gkind, gvals):
                    _tree_update(tree, m, I[sid, 3], F[sid, 0])
                if F[sid, 0] <= tree[root]:
                    hn = _minheap_push(hx, hs, hr, hn, F[sid, 0], seq, sid)
                    seq += 1
                    if hn + bn + 1 > peak:
                        peak = hn + bn + 1
                else:
                    fl[fn] = sid
                    fn += 1
            else:
                fl[fn] = sid
                fn += 1
        if _fully_relevant(F, I, cur, gkind, gvals):
            _rec_next_point(F, I, U, cur, m, gkind, gvals, sampler, zw, zk, zf)
            _tree_update(tree, m, I[cur, 3], F[cur, 0])
            if F[cur, 0] <= tree[root]:
                if hn >= hx.size:
                    cap2 = hx.size * 2
                    hx2 = np.empty(cap2)
                    hx2[: hx.size] = hx
                    hx = hx2
                    hs2 = np.empty(cap2, dtype=np.int64)
                    hs2[: hs.size] = hs
                    hs = hs2
                    hr2 = np.empty(cap2, dtype=np.int64)
                    hr2[: hr.size] = hr
                    hr = hr2
                hn = _minheap_push(hx, hs, hr, hn, F[cur, 0], seq, cur)
                seq += 1
            else:
                fl[fn] = cur
                fn += 1
        else:
            fl[fn] = cur
            fn += 1
    return tree[1 : m + 1].copy(), peak


@njit(cache=True)
def _bbit_kernel(values, b):
    out = np.empty(values.size, dtype=np.uint64)
    xf = np.empty(1)
    xu = xf.view(np.uint64)
    for i in range(values.size):
        xf[0] = values[i]
        bits, ctr, buf, nb = _g_bits(TAG_COMPONENT, xu[0], _U0, _U0, _U0, 0, b)
        out[i] = bits
    return out


@njit(cache=True)
def _icws_kernel(ids, weights, m, sampler, zw, zk, zf):
    keys = np.zeros(m, dtype=np.uint64)
    levels = np.zeros(m, dtype=np.int64)
    best = np.full(m, np.inf)
    for ei in range(ids.size):
        w = weights[ei]
        if w == 0.0:
            continue
        logw = math.log(w)
        d = ids[ei]
        for q in range(m):
            b = U64(q)
            ctr = _U0
            e1, ctr = _g_exp_unit(TAG_ICWS, d, b, ctr, sampler, zw, zk, zf)
            e2, ctr = _g_exp_unit(TAG_ICWS, d, b, ctr, sampler, zw, zk, zf)
            r = e1 + e2
            c1, ctr = _g_exp_unit(TAG_ICWS, d, b, ctr, sampler, zw, zk, zf)
            c2, ctr = _g_exp_unit(TAG_ICWS, d, b, ctr, sampler, zw, zk, zf)
            c = c1 + c2
            beta, ctr = _g_double(TAG_ICWS, d, b, ctr)
            t = math.floor(logw / r + beta)
            ln_y = r * (t - beta)
            ln_a = math.log(c) - ln_y - r
            if ln_a < best[q]:
                best[q] = ln_a
                keys[q] = d
                levels[q] = np.int64(t)
    return keys, levels


@njit(cache=True)
def _kindex(gkind, gvals, gupper, w):
    # index_of: the largest level whose value does not exceed w.
    if gkind == 0:
        lo = 0
        hi = gupper
        while lo < hi:
            mid = (lo + hi + 1) >> 1
            if gvals[mid] <= w:
                lo = mid
            else:
                hi = mid - 1
        return np.int64(lo)
    if w == 0.0:
        return np.int64(0)
    frac, e = math.frexp(w)
    if e < -125:
        return np.int64(math.floor(w * 2.0**149))
    mant = np.int64(math.floor((2.0 * frac - 1.0) * 8388608.0))
    return ((np.int64(e) - 1 + 127) << 23) | mant


@njit(cache=True)
def _instantiate(master, rep, wa, wb):
    """Fresh random ids for each weight pair, bags built and shuffled.

    Replays the harness's per-replication generator: one block per id
    (redrawn on the astronomically unlikely duplicate), then a Fisher-
    Yates shuffle of each bag drawing from the same stream.
    """
    npairs = wa.size
    ids = np.empty(npairs, dtype=np.uint64)
    ctr = _U0
    buf = _U0
    nb = 0
    for i in range(npairs):
        while True:
            d = _g_block(TAG_REPLICATION, master, rep, ctr)
            ctr += _U1
            dup = False
            for t in range(i):
                if ids[t] == d:
                    dup = True
                    break
            if not dup:
                break
        ids[i] = d
    na = 0
    nbag = 0
    for i in range(npairs):
        if wa[i] > 0.0:
            na += 1
        if wb[i] > 0.0:
            nbag += 1
    ids_a = np.empty(na, dtype=np.uint64)
    w_a = np.empty(na)
    ids_b = np.empty(nbag, dtype=np.uint64)
    w_b = np.empty(nbag)
    ia = 0
    ib = 0
    for i in range(npairs):
        if wa[i] > 0.0:
            ids_a[ia] = ids[i]
            w_a[ia] = wa[i]
            ia += 1
        if wb[i] > 0.0:
            ids_b[ib] = ids[i]
            w_b[ib] = wb[i]
            ib += 1
    for i in range(na - 1, 0, -1):
        j, ctr, buf, nb = _g_index(TAG_REPLICATION, master, rep, ctr, buf, nb, i + 1)
        j -= 1
        ids_a[i], ids_a[j] = ids_a[j], ids_a[i]
        w_a[i], w_a[j] = w_a[j], w_a[i]
    for i in range(nbag - 1, 0, -1):
        j, ctr, buf, nb = _g_index(TAG_REPLICATION, master, rep, ctr, buf, nb, i + 1)
        j -= 1
        ids_b[i], ids_b[j] = ids_b[j], ids_b[i]
        w_b[i], w_b[j] = w_b[j], w_b[i]
    return ids_a, w_a, ids_b, w_b


@njit(cache=True)
def _verify_batch(algo, wa, wb, m, n_reps, master, gkind, gvals, gupper, sampler, zw, zk, zf, bs):
    """Per-replication signature match counts (and b-bit match counts)."""
    matches = np.zeros(n_reps, dtype=np.int64)
    bmatches = np.zeros((n_reps, bs.size), dtype=np.int64)
    for rep in range(n_reps):
        ids_a, w_a, ids_b, w_b = _instantiate(master, U64(rep), wa, wb)
        if algo == 4:
            ka, la = _icws_kernel(ids_a, w_a, m, sampler, zw, zk, zf)
            kb, lb = _icws_kernel(ids_b, w_b, m, sampler, zw, zk, zf)
            cnt = 0
            for i in range(m):
                if ka[i] == kb[i] and la[i] == lb[i]:
                    cnt += 1
            matches[rep] = cnt
            continue
        if algo <= 1:
            kma = np.empty(ids_a.size, dtype=np.int64)
            for i in range(ids_a.size):
                kma[i] = _kindex(gkind, gvals, gupper, w_a[i])
            kmb = np.empty(ids_b.size, dtype=np.int64)
            for i in range(ids_b.size):
                kmb[i] = _kindex(gkind, gvals, gupper, w_b[i])
            if algo == 0:
                va = _naive_kernel(ids_a, w_a, kma, m, gkind, gvals, sampler, zw, zk, zf)
                vb = _naive_kernel(ids_b, w_b, kmb, m, gkind, gvals, sampler, zw, zk, zf)
            else:
                va = _enhanced_kernel(ids_a, w_a, kma, m, gkind, gvals, sampler, zw, zk, zf)
                vb = _enhanced_kernel(ids_b, w_b, kmb, m, gkind, gvals, sampler, zw, zk, zf)
        elif algo == 2:
            va, _pa = _bmh1_kernel(ids_a, w_a, m, gkind, gvals, gupper, sampler, zw, zk, zf)
            vb, _pb = _bmh1_kernel(ids_b, w_b, m, gkind, gvals, gupper, sampler, zw, zk, zf)
        else:
            va, _pa = _bmh2_kernel(ids_a, w_a, m, gkind, gvals, gupper, sampler, zw, zk, zf)
            vb, _pb = _bmh2_kernel(ids_b, w_b, m, gkind, gvals, gupper, sampler, zw, zk, zf)
        cnt = 0
        for i in range(m):
            if va[i] == vb[i]:
                cnt += 1
        matches[rep] = cnt
        for bi in range(bs.size):
            ta = _bbit_kernel(va, bs[bi])
            tb = _bbit_kernel(vb, bs[bi])
            c2 = 0
            for i in range(m):
                if ta[i] == tb[i]:
                    c2 += 1
            bmatches[rep, bi] = c2
    return matches, bmatches


@njit(cache=True)
def _random_bag_kernel(master, rep, n, sampler, zw, zk, zf):
    # One element per iteration: id from a whole block, then an Exp(1)
    # weight; mirrors the harness's python-side generator usage.
    ids = np.empty(n, dtype=np.uint64)
    weights = np.empty(n, dtype=np.float64)
    ctr = _U0
    for i in range(n):
        ids[i] = _g_block(TAG_REPLICATION, master, rep, ctr)
        ctr += _U1
        e, ctr = _g_exp_unit(TAG_REPLICATION, master, rep, ctr, sampler, zw, zk, zf)
        weights[i] = e
    return ids, weights


# --- python-facing drivers ---------------------------------------------------


def _tables():
    return ZIG_W, ZIG_K, ZIG_F


def run_real(algo: str, bag, grid, m: int, config):
    """Dispatch to a compiled kernel; returns (values, peak record count)."""
    gkind, gvals, gupper = grid.kernel_form()
    zw, zk, zf = _tables()
    sampler = config.sampler_id
    ids = bag.ids
    weights = bag.weights
    if algo in ("naive", "enhanced"):
        v1 = grid.min_positive
        kmaxs = np.array(
            [grid.index_of(float(w)) if w >= v1 else 0 for w in weights],
            dtype=np.int64,
        )
        if algo == "naive":
            values = _naive_kernel(ids, weights, kmaxs, m, gkind, gvals, sampler, zw, zk, zf)
        else:
            values = _enhanced_kernel(ids, weights, kmaxs, m, gkind, gvals, sampler, zw, zk, zf)
        return values, 0
    if algo == "bmh1":
        return _bmh1_kernel(ids, weights, m, gkind, gvals, gupper, sampler, zw, zk, zf)
    if algo == "bmh2":
        return _bmh2_kernel(ids, weights, m, gkind, gvals, gupper, sampler, zw, zk, zf)
    raise ValueError(f"unknown algorithm: {algo!r}")


def run_bbit(values: np.ndarray, b: int) -> np.ndarray:
    return _bbit_kernel(values, b)


def kernel_index_of(gkind, gvals, gupper, w: float) -> int:
    return int(_kindex(gkind, gvals, gupper, float(w)))


def kernel_value_at(gkind, gvals, k: int) -> float:
    return float(_gval(gkind, gvals, np.int64(k)))


def run_icws(bag, m: int, config):
    zw, zk, zf = _tables()
    return _icws_kernel(bag.ids, bag.weights, m, config.sampler_id, zw, zk, zf)


def random_bag(master: int, rep: int, n: int, config):
    zw, zk, zf = _tables()
    return _random_bag_kernel(U64(master), U64(rep), n, config.sampler_id, zw, zk, zf)


_ALGO_IDS = {"naive": 0, "enhanced": 1, "bmh1": 2, "bmh2": 3, "icws": 4}


def instantiate(master: int, rep: int, wa, wb):
    wa = np.ascontiguousarray(wa, dtype=np.float64)
    wb = np.ascontiguousarray(wb, dtype=np.float64)
    return _instantiate(U64(master), U64(rep), wa, wb)


def verify_batch(algorithm: str, wa, wb, m: int, n_reps: int, master: int, grid, config, bs=()):
    """Match counts over ``n_reps`` instantiations; returns (matches, bbit matches)."""
    if grid is None:
        gkind, gvals, gupper = 0, np.array([0.0, 1.0]), 1
    else:
        gkind, gvals, gupper = grid.kernel_form()
    zw, zk, zf = _tables()
    return _verify_batch(
        _ALGO_IDS[algorithm],
        np.ascontiguousarray(wa, dtype=np.float64),
        np.ascontiguousarray(wb, dtype=np.float64),
        m,
        n_reps,
        U64(master),
        gkind,
        gvals,
        gupper,
        config.sampler_id,
        zw,
        zk,
        zf,
        np.asarray(bs, dtype=np.int64),
    )
