"""Numba Monte Carlo cores.

All kernels draw randomness from a splitmix64 counter stream whose state
for trial i is derived from the master seed as mix(seed ^ mix(i + 1)).
Any partition of the trial range therefore yields bit-identical results,
which is what makes the worker count irrelevant to the statistics.

Direction encoding (shared with the pure-Python walker): draw
u in {0, ..., 2d-1}; u maps to sign * e_{u//2 + 1} with even u = +1.

Kernels take a contiguous trial range [lo, hi) and either return success
counts (as a (within half horizon, within horizon) pair, the half-horizon
count being the truncation-bias proxy) or fill per-trial output arrays.
"""

from __future__ import annotations

import numpy as np
from numba import njit

U64 = np.uint64
GOLDEN = U64(0x9E3779B97F4A7C15)

# Per-axis displacement tables for Z^3; directions 0..5.
DX3 = np.array([1, -1, 0, 0, 0, 0], dtype=np.int64)
DY3 = np.array([0, 0, 1, -1, 0, 0], dtype=np.int64)
DZ3 = np.array([0, 0, 0, 0, 1, -1], dtype=np.int64)

# Coordinate packing for generic point-set membership: 21 bits per
# coordinate, offset so coordinates in (-2^20, 2^20) pack injectively.
PACK_OFFSET = 1 << 20


@njit(cache=True, nogil=True, inline="always")
def _mix64(z):
    z = (z ^ (z >> U64(30))) * U64(0xBF58476D1CE4E5B9)
    z = (z ^ (z >> U64(27))) * U64(0x94D049BB133111EB)
    return z ^ (z >> U64(31))


@njit(cache=True, nogil=True, inline="always")
def _stream_state(seed, trial):
    return _mix64(U64(seed) ^ _mix64(U64(trial) + U64(1)))


@njit(cache=True, nogil=True, inline="always")
def _draw(state, nsides):
    # state is the pre-incremented counter; returns direction in [0, nsides).
    r = _mix64(state)
    return np.int64((r >> U64(32)) * U64(nsides) >> U64(32))


def pack_key(x: int, y: int, z: int) -> int:
    """Pack a Z^3 point into one int64 (|coord| < 2^20 required)."""
    for c in (x, y, z):
        if not -PACK_OFFSET < c < PACK_OFFSET:
            raise ValueError(f"coordinate {c} out of packing range")
    return ((x + PACK_OFFSET) << 42) | ((y + PACK_OFFSET) << 21) | (z + PACK_OFFSET)


@njit(cache=True, nogil=True, inline="always")
def _key_of(x, y, z):
    return ((x + PACK_OFFSET) << 42) | ((y + PACK_OFFSET) << 21) | (z + PACK_OFFSET)


@njit(cache=True, nogil=True, inline="always")
def _in_sorted(keys, key):
    lo = 0
    hi = keys.shape[0]
    while lo < hi:
        mid = (lo + hi) >> 1
        if keys[mid] < key:
            lo = mid + 1
        else:
            hi = mid
    return lo < keys.shape[0] and keys[lo] == key


@njit(cache=True, nogil=True)
def return_diag3(lo, hi, seed, horizon, sx, sy, sz, bitmap):
    """First-return count into a diagonal subset of Z^3.

    bitmap[m] != 0 marks (m, m, m) as a target, 0 <= m < len(bitmap).
    Returns (successes within horizon//2, successes within horizon).
    """
    half = horizon // 2
    cap = bitmap.shape[0] - 1
    succ_half = 0
    succ_full = 0
    for t in range(lo, hi):
        st = _stream_state(seed, t)
        x = sx
        y = sy
        z = sz
        for n in range(1, horizon + 1):
            st = st + GOLDEN
            u = _draw(st, 6)
            x += DX3[u]
            y += DY3[u]
            z += DZ3[u]
            if x == y and y == z and 0 <= x <= cap and bitmap[x]:
                succ_full += 1
                if n <= half:
                    succ_half += 1
                break
    return succ_half, succ_full


@njit(cache=True, nogil=True)
def return_generic(lo, hi, seed, horizon, d, sx, sy, sz, keys,
                   bx0, bx1, by0, by1, bz0, bz1):
    """First-return count into an arbitrary small point set in Z^d, d <= 3.

    Unused coordinates stay 0 (points must be padded accordingly).  keys is
    the sorted packed-key array of the target; the bounding box prunes the
    binary search.
    """
    half = horizon // 2
    nsides = 2 * d
    succ_half = 0
    succ_full = 0
    for t in range(lo, hi):
        st = _stream_state(seed, t)
        x = sx
        y = sy
        z = sz
        for n in range(1, horizon + 1):
            st = st + GOLDEN
            u = _draw(st, nsides)
            axis = u >> 1
            step = np.int64(1) if (u & 1) == 0 else np.int64(-1)
            if axis == 0:
                x += step
            elif axis == 1:
                y += step
            else:
                z += step
            if bx0 <= x <= bx1 and by0 <= y <= by1 and bz0 <= z <= bz1:
                if _in_sorted(keys, _key_of(x, y, z)):
                    succ_full += 1
                    if n <= half:
                        succ_half += 1
                    break
    return succ_half, succ_full


@njit(cache=True, nogil=True)
def cover_small3(lo, hi, seed, horizon, sx, sy, sz, tx, ty, tz,
                 bx0, bx1, by0, by1, bz0, bz1):
    """Cover count for a target of at most 64 points in Z^3.

    The start position counts as visited at step 0.  Returns
    (covered within horizon//2, covered within horizon).
    """
    half = horizon // 2
    npts = tx.shape[0]
    full = (np.uint64(1) << np.uint64(npts)) - np.uint64(1) if npts < 64 \
        else np.uint64(0xFFFFFFFFFFFFFFFF)
    succ_half = 0
    succ_full = 0
    for t in range(lo, hi):
        st = _stream_state(seed, t)
        x = sx
        y = sy
        z = sz
        mask = np.uint64(0)
        for j in range(npts):
            if x == tx[j] and y == ty[j] and z == tz[j]:
                mask |= np.uint64(1) << np.uint64(j)
        if mask == full:
            succ_half += 1
            succ_full += 1
            continue
        for n in range(1, horizon + 1):
            st = st + GOLDEN
            u = _draw(st, 6)
            x += DX3[u]
            y += DY3[u]
            z += DZ3[u]
            if bx0 <= x <= bx1 and by0 <= y <= by1 and bz0 <= z <= bz1:
                for j in range(npts):
                    if x == tx[j] and y == ty[j] and z == tz[j]:
                        mask |= np.uint64(1) << np.uint64(j)
                if mask == full:
                    succ_full += 1
                    if n <= half:
                        succ_half += 1
                    break
    return succ_half, succ_full


@njit(cache=True, nogil=True)
def cover_series3(lo, hi, seed, horizon, i_max):
    """Per-trial largest diagonal prefix D_i covered within the horizon.

    One 3-d walk per trial from the origin; hist[p] counts trials whose
    largest fully covered prefix is D_p (p = -1 never happens: the origin
    is covered at step 0).  Success counts for each i follow by suffix sum.
    """
    hist = np.zeros(i_max + 1, dtype=np.int64)
    covered = np.zeros(i_max + 1, dtype=np.uint8)
    for t in range(lo, hi):
        st = _stream_state(seed, t)
        covered[:] = 0
        covered[0] = 1
        remaining = i_max
        x = np.int64(0)
        y = np.int64(0)
        z = np.int64(0)
        for n in range(horizon):
            st = st + GOLDEN
            u = _draw(st, 6)
            x += DX3[u]
            y += DY3[u]
            z += DZ3[u]
            if x == y and y == z and 0 <= x <= i_max and covered[x] == 0:
                covered[x] = 1
                remaining -= 1
                if remaining == 0:
                    break
        prefix = i_max
        for m in range(i_max + 1):
            if covered[m] == 0:
                prefix = m - 1
                break
        hist[prefix] += 1
    return hist


@njit(cache=True, nogil=True)
def diagonal_return_times(lo, hi, seed, horizon, d, out):
    """First time a d-dim walk (d in {3, 4}) returns to the exact diagonal.

    Writes the first step n >= 1 with all coordinates equal into out[t]
    (-1 if none within the horizon).  This is the first return of the
    coordinate-difference walk to the zero vector.
    """
    nsides = 2 * d
    for t in range(lo, hi):
        st = _stream_state(seed, t)
        c0 = np.int64(0)
        c1 = np.int64(0)
        c2 = np.int64(0)
        c3 = np.int64(0)
        hit = np.int64(-1)
        for n in range(1, horizon + 1):
            st = st + GOLDEN
            u = _draw(st, nsides)
            axis = u >> 1
            step = np.int64(1) if (u & 1) == 0 else np.int64(-1)
            if axis == 0:
                c0 += step
            elif axis == 1:
                c1 += step
            elif axis == 2:
                c2 += step
            else:
                c3 += step
            if c0 == c1 and c1 == c2 and (d == 3 or c2 == c3):
                hit = n
                break
        out[t] = hit
    return 0


@njit(cache=True, nogil=True)
def zwalk_cover(lo, hi, seed, base_cap, m_max, z_budget, covered_out, zsteps_out):
    """Interval cover by the diagonal-visit walk.

    Walks Z^3 from the origin; every visit to the diagonal emits its common
    coordinate m (the start counts as the z-step 0 emission of 0).  A trial
    succeeds once {0, ..., m_max} is fully emitted.  Stops at base_cap base
    steps or after z_budget emissions past the initial one.
    """
    covered = np.zeros(m_max + 1, dtype=np.uint8)
    for t in range(lo, hi):
        st = _stream_state(seed, t)
        covered[:] = 0
        covered[0] = 1
        remaining = m_max
        zn = np.int64(0)  # index of the latest emission
        x = np.int64(0)
        y = np.int64(0)
        z = np.int64(0)
        ok = remaining == 0
        for n in range(base_cap):
            if ok or zn >= z_budget:
                break
            st = st + GOLDEN
            u = _draw(st, 6)
            x += DX3[u]
            y += DY3[u]
            z += DZ3[u]
            if x == y and y == z:
                zn += 1
                if 0 <= x <= m_max and covered[x] == 0:
                    covered[x] = 1
                    remaining -= 1
                    if remaining == 0:
                        ok = True
        covered_out[t] = 1 if ok else 0
        zsteps_out[t] = zn
    return 0
