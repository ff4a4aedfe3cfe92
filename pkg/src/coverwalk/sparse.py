"""The sparse transient diagonal subset of Z^3 and its numeric companions.

The subset is built from the index sequence

    n_k = ceil( sum_{i=1}^{k} (ln i)^{1+eps} ),   n_1 = 0,

whose points (n_k, n_k, n_k) thin out just fast enough to make the set
transient for 3-d simple random walk.  This module computes the sequence
exactly (compensated summation plus a near-integer ceiling guard), the
counting function C_N, the dyadic annular slices used by the Wiener-test
estimate, the log-power integrals and tail sums appearing in the proofs,
and the non-uniformly-transient counterexample set.

log means natural logarithm throughout.
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass

from scipy.integrate import quad

from .lattice import Point, PointSet, point_set

# Partial sums within this distance of an integer are snapped to it before
# the ceiling, so float noise cannot shift n_k by one.
NEAR_INTEGER_GUARD = 1e-9


def _guarded_ceil(s: float) -> int:
    r = round(s)
    if abs(s - r) <= NEAR_INTEGER_GUARD:
        return int(r)
    return math.ceil(s)


class SparseDiagonal:
    """Memoized generator for the sequence n_k and counter C_N at a fixed eps.

    Partial sums S(k) = sum_{i<=k} (ln i)^{1+eps} are accumulated with
    Kahan summation and grown on demand under a lock; reads of already
    memoized entries are safe concurrently.
    """

    def __init__(self, epsilon: float):
        if not epsilon > 0:
            raise ValueError(f"epsilon must be > 0, got {epsilon}")
        self.epsilon = float(epsilon)
        self._sums = [0.0]  # S(1) = 0; index j holds S(j+1)
        self._n = [0]  # n_1 = 0
        self._comp = 0.0  # Kahan compensation carried across extensions
        self._lock = threading.Lock()

    def _ensure(self, k: int) -> None:
        if k <= len(self._sums):
            return
        with self._lock:
            s = self._sums[-1]
            c = self._comp
            for i in range(len(self._sums) + 1, k + 1):
                term = math.log(i) ** (1.0 + self.epsilon)
                y = term - c
                t = s + y
                c = (t - s) - y
                s = t
                self._sums.append(s)
                self._n.append(_guarded_ceil(s))
            self._comp = c

    def partial_sum(self, k: int) -> float:
        """S(k) = sum_{i=1}^{k} (ln i)^{1+eps}."""
        if k < 1:
            raise ValueError(f"k must be >= 1, got {k}")
        self._ensure(k)
        return self._sums[k - 1]

    def n_k(self, k: int) -> int:
        if k < 1:
            raise ValueError(f"k must be >= 1, got {k}")
        self._ensure(k)
        return self._n[k - 1]

    def c_n(self, N: int) -> int:
        """Largest k with n_k <= N (the size of the sparse set up to N)."""
        if N < 0:
            raise ValueError(f"N must be >= 0, got {N}")
        # n_k is non-decreasing and unbounded: grow until past N, then
        # binary search the memoized table.
        k = max(len(self._n), 2)
        while True:
            self._ensure(k)
            if self._n[k - 1] > N:
                break
            k *= 2
        lo, hi = 1, k  # n_lo <= N always (n_1 = 0), n_hi > N
        while hi - lo > 1:
            mid = (lo + hi) // 2
            if self._n[mid - 1] <= N:
                lo = mid
            else:
                hi = mid
        return lo


_CACHE: dict[float, SparseDiagonal] = {}
_CACHE_LOCK = threading.Lock()


def sequence(epsilon: float) -> SparseDiagonal:
    """Shared memoized SparseDiagonal for the given eps."""
    key = float(epsilon)
    with _CACHE_LOCK:
        if key not in _CACHE:
            _CACHE[key] = SparseDiagonal(key)
        return _CACHE[key]


def log_power_sum(k: int, epsilon: float) -> float:
    return sequence(epsilon).partial_sum(k)


def n_k(k: int, epsilon: float) -> int:
    return sequence(epsilon).n_k(k)


def c_n(N: int, epsilon: float) -> int:
    return sequence(epsilon).c_n(N)


def lemma_lower_bound(N: int, epsilon: float) -> float:
    """Proved lower bound for C_N: 2^{-1-eps} * N / (ln N)^{1+eps}."""
    if N < 2:
        raise ValueError(f"N must be >= 2, got {N}")
    return 2.0 ** (-1.0 - epsilon) * N * math.log(N) ** (-1.0 - epsilon)


def sparse_points(N: int, epsilon: float) -> PointSet:
    """The sparse diagonal points {(n_k, n_k, n_k) : n_k <= N}."""
    if N < 0:
        raise ValueError(f"N must be >= 0, got {N}")
    seq = sequence(epsilon)
    count = seq.c_n(N)
    return point_set((seq.n_k(k),) * 3 for k in range(1, count + 1))


@dataclass(frozen=True)
class AnnularSlice:
    """Sparse-diagonal points in the L2 annulus (2^{k-1}, 2^k]."""

    k: int
    points: PointSet


def annular_slices(k_max: int, epsilon: float) -> list[AnnularSlice]:
    """Slices A_k, k = 1..k_max, of the sparse set over dyadic L2 annuli.

    Membership of (m, m, m) in annulus k is the exact integer condition
    4^{k-1} < 3 m^2 <= 4^k, so boundary points never float-drift between
    slices.
    """
    if k_max < 1:
        raise ValueError(f"k_max must be >= 1, got {k_max}")
    # Largest diagonal coordinate inside radius 2^{k_max}.
    outer = 4**k_max
    m_cap = math.isqrt(outer // 3)
    while 3 * (m_cap + 1) ** 2 <= outer:
        m_cap += 1
    seq = sequence(epsilon)
    count = seq.c_n(m_cap)
    values = [seq.n_k(k) for k in range(1, count + 1)]
    slices = []
    for k in range(1, k_max + 1):
        lo, hi = 4 ** (k - 1), 4**k
        members = [(m,) * 3 for m in values if lo < 3 * m * m <= hi]
        slices.append(AnnularSlice(k, PointSet(frozenset(members))))
    return slices


def integral_log_power(a: float, b: float, epsilon: float) -> float:
    """Integral of (ln x)^{1+eps} over [a, b] by adaptive quadrature."""
    if a < 1:
        raise ValueError(f"lower limit must be >= 1, got {a}")
    if b < a:
        raise ValueError(f"upper limit {b} below lower limit {a}")
    if b == a:
        return 0.0
    val, _err = quad(lambda x: math.log(x) ** (1.0 + epsilon), a, b,
                     epsrel=1e-10, epsabs=1e-12, limit=200)
    return val


def tail_sum_before(k: int, epsilon: float) -> float:
    """sum_{i=1}^{k-1} 1 / integral_i^k (ln x)^{1+eps} dx."""
    if k < 2:
        raise ValueError(f"k must be >= 2, got {k}")
    return sum(1.0 / integral_log_power(i, k, epsilon) for i in range(1, k))


def tail_sum_after(k: int, i_max: int, epsilon: float) -> float:
    """Truncation of sum_{i>k} 1 / integral_k^i (ln x)^{1+eps} dx at i_max."""
    if k < 1 or i_max <= k:
        raise ValueError(f"need i_max > k >= 1, got k={k}, i_max={i_max}")
    return sum(1.0 / integral_log_power(k, i, epsilon) for i in range(k + 1, i_max + 1))


def tail_truncation_bound(i_max: int, epsilon: float) -> float:
    """Analytic majorant for the tail dropped by tail_sum_after.

    The dropped terms are dominated by 2^{2+eps} sum_{i>i_max} 1/(i (ln i)^{1+eps}),
    which integral comparison bounds by 2^{2+eps} / (eps (ln i_max)^eps).
    """
    if i_max < 3:
        raise ValueError(f"i_max must be >= 3, got {i_max}")
    return 2.0 ** (2.0 + epsilon) / (epsilon * math.log(i_max) ** epsilon)


def counterexample_cluster(k: int) -> PointSet:
    """One cluster of the non-uniform-return counterexample: four columns of
    height 2k+1 around the axis point (2^k, 0, 0) plus that point itself."""
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    x = 2**k
    pts = {(x, 0, 0)}
    for n in range(-k, k + 1):
        pts.update({(x, 1, n), (x, -1, n), (x + 1, 0, n), (x - 1, 0, n)})
    return PointSet(frozenset(pts))


@dataclass(frozen=True)
class PrefixEnumeration:
    """Exhaustive k-step prefix census from the axis point (2^k, 0, 0)."""

    k: int
    total: int  # 6^k
    avoiding: int  # prefixes with no visit to the set at steps 1..k
    avoiding_off_axis: int  # avoiding prefixes using a non-(+/- e_3) step
    escape_bound: float  # 3^{-k}, valid when avoiding_off_axis == 0

    @property
    def forced(self) -> bool:
        return self.avoiding_off_axis == 0


def forced_prefix_enumeration(k: int) -> PrefixEnumeration:
    """Enumerate all 6^k step prefixes from (2^k, 0, 0) against the
    counterexample set.

    When every set-avoiding prefix moves only along the z-axis, at most 2^k
    of the 6^k prefixes can avoid the set, so the escape probability is at
    most 3^{-k}.  Exact (cost 6^k); keep k <= 6.
    """
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    if k > 6:
        raise ValueError(f"exact enumeration rejected for k > 6 (cost 6^k), got {k}")
    # Clusters beyond k + 2 are more than k steps away from (2^k, 0, 0).
    members = counterexample_set(k + 2).members
    steps = [(1, 0, 0), (-1, 0, 0), (0, 1, 0), (0, -1, 0), (0, 0, 1), (0, 0, -1)]
    start = (2**k, 0, 0)
    avoiding = 0
    off_axis = 0

    def rec(x: int, y: int, z: int, depth: int, used_off_axis: bool):
        nonlocal avoiding, off_axis
        if depth == k:
            avoiding += 1
            if used_off_axis:
                off_axis += 1
            return
        for dx, dy, dz in steps:
            nx, ny, nz = x + dx, y + dy, z + dz
            if (nx, ny, nz) in members:
                continue
            rec(nx, ny, nz, depth + 1, used_off_axis or dz == 0)

    rec(*start, 0, False)
    return PrefixEnumeration(k, 6**k, avoiding, off_axis, 3.0**-k)


def counterexample_set(k_max: int) -> PointSet:
    """Union of the counterexample clusters for k = 1..k_max.

    The set is transient, but escaping from (2^k, 0, 0) forces the first k
    steps along the z-axis, so return probabilities approach 1 along k.
    """
    if k_max < 1:
        raise ValueError(f"k_max must be >= 1, got {k_max}")
    members: set[Point] = set()
    for k in range(1, k_max + 1):
        members.update(counterexample_cluster(k).members)
    return PointSet(frozenset(members))
