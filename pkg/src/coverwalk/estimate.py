"""Reproducible Monte Carlo estimators for the covering experiments.

Every estimator derives an independent splitmix64 substream per trial from
the master seed, so the success count is a pure function of the parameters
no matter how the trial range is split across workers.  All infinite-time
events are horizon-truncated; each estimate carries the success count at
half the horizon as a truncation-bias proxy (returns are underestimated,
escapes overestimated).

Confidence intervals are Wilson score intervals, clamped to [0, 1].
"""

from __future__ import annotations

import csv
import json
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

import numpy as np
from scipy.stats import norm

from . import kernels, sparse
from .lattice import Point, PointSet, origin, point_set
from .walk import WalkStream, child_seed, cover_completion

DEFAULT_LEVEL = 0.95


def wilson_interval(successes: int, trials: int, level: float) -> tuple[float, float]:
    """Wilson score interval for a binomial proportion, clamped to [0, 1]."""
    if trials < 1:
        raise ValueError(f"trials must be >= 1, got {trials}")
    if not 0 <= successes <= trials:
        raise ValueError(f"successes {successes} outside [0, {trials}]")
    if not 0.0 < level < 1.0:
        raise ValueError(f"level must be in (0, 1), got {level}")
    z = norm.ppf(0.5 + level / 2.0)
    p = successes / trials
    z2 = z * z
    denom = 1.0 + z2 / trials
    center = (p + z2 / (2.0 * trials)) / denom
    margin = z * math.sqrt((p * (1.0 - p) + z2 / (4.0 * trials)) / trials) / denom
    return max(0.0, center - margin), min(1.0, center + margin)


@dataclass(frozen=True)
class Estimate:
    """A Monte Carlo probability estimate with its provenance."""

    trials: int
    successes: int
    p_hat: float
    ci_low: float
    ci_high: float
    horizon: int
    master_seed: int
    level: float = DEFAULT_LEVEL
    successes_half: Optional[int] = None  # successes within horizon // 2

    @classmethod
    def from_counts(cls, successes: int, trials: int, horizon: int, master_seed: int,
                    level: float = DEFAULT_LEVEL,
                    successes_half: Optional[int] = None) -> "Estimate":
        lo, hi = wilson_interval(successes, trials, level)
        return cls(trials, successes, successes / trials, lo, hi, horizon,
                   master_seed, level, successes_half)

    @property
    def bias_delta(self) -> Optional[float]:
        """p_hat change from horizon//2 to horizon (truncation-bias proxy)."""
        if self.successes_half is None:
            return None
        return (self.successes - self.successes_half) / self.trials

    def complement(self) -> "Estimate":
        half = None if self.successes_half is None else self.trials - self.successes_half
        return Estimate.from_counts(self.trials - self.successes, self.trials,
                                    self.horizon, self.master_seed, self.level, half)


@dataclass(frozen=True)
class SeriesEstimate:
    """Estimates (or plain reals) indexed by an increasing integer parameter."""

    entries: tuple
    meta: dict

    def __post_init__(self):
        idx = [i for i, _ in self.entries]
        if any(b <= a for a, b in zip(idx, idx[1:])):
            raise ValueError("series indices must be strictly increasing")

    def indices(self) -> list[int]:
        return [i for i, _ in self.entries]

    def values(self) -> list:
        return [v for _, v in self.entries]


# ---------------------------------------------------------------------------
# chunked kernel drivers

def _seed64(seed: int) -> np.uint64:
    return np.uint64(seed & 0xFFFFFFFFFFFFFFFF)


def _chunks(trials: int, workers: int):
    workers = max(1, min(workers, trials))
    size = (trials + workers - 1) // workers
    for lo in range(0, trials, size):
        yield lo, min(lo + size, trials)


def _run_counts(kernel, trials: int, workers: int, *args) -> tuple[int, int]:
    if workers <= 1:
        h, f = kernel(0, trials, *args)
        return int(h), int(f)
    with ThreadPoolExecutor(max_workers=workers) as ex:
        futures = [ex.submit(kernel, lo, hi, *args) for lo, hi in _chunks(trials, workers)]
        half = full = 0
        for fut in futures:
            h, f = fut.result()
            half += int(h)
            full += int(f)
        return half, full


def _run_fill(kernel, trials: int, workers: int, *args) -> None:
    # Kernels writing per-trial output arrays; chunks touch disjoint slices.
    if workers <= 1:
        kernel(0, trials, *args)
        return
    with ThreadPoolExecutor(max_workers=workers) as ex:
        futures = [ex.submit(kernel, lo, hi, *args) for lo, hi in _chunks(trials, workers)]
        for fut in futures:
            fut.result()


# ---------------------------------------------------------------------------
# target dispatch

def _diag_bitmap(target: PointSet) -> Optional[np.ndarray]:
    """Bitmap over the common coordinate if every target point is a
    non-negative diagonal point of Z^3, else None."""
    if len(target) == 0 or target.dimension != 3:
        return None
    ms = []
    for p in target:
        if not (p[0] == p[1] == p[2]) or p[0] < 0:
            return None
        ms.append(p[0])
    bitmap = np.zeros(max(ms) + 1, dtype=np.uint8)
    bitmap[ms] = 1
    return bitmap


def _packed_target(target: PointSet, d: int):
    """Sorted packed keys plus bounding box for the generic kernel (d <= 3)."""
    pts = [tuple(p) + (0,) * (3 - d) for p in target]
    keys = np.array(sorted(kernels.pack_key(*p) for p in pts), dtype=np.int64)
    arr = np.array(pts, dtype=np.int64)
    bbox = []
    for j in range(3):
        bbox += [int(arr[:, j].min()), int(arr[:, j].max())]
    return keys, bbox


def _return_counts(start: Point, target: PointSet, horizon: int, trials: int,
                   master_seed: int, workers: int) -> tuple[int, int]:
    if len(target) == 0:
        return 0, 0
    d = len(start)
    if len(target) and target.dimension != d:
        raise ValueError("start and target dimensions differ")
    bitmap = _diag_bitmap(target)
    if bitmap is not None:
        sx, sy, sz = start
        return _run_counts(kernels.return_diag3, trials, workers,
                           _seed64(master_seed), horizon, sx, sy, sz, bitmap)
    if d > 3:
        raise ValueError("generic point-set targets support d <= 3")
    keys, bbox = _packed_target(target, d)
    s = tuple(start) + (0,) * (3 - d)
    return _run_counts(kernels.return_generic, trials, workers,
                       _seed64(master_seed), horizon, d, s[0], s[1], s[2], keys, *bbox)


# ---------------------------------------------------------------------------
# estimators

def estimate_return(start: Point, target: PointSet, horizon: int, trials: int,
                    master_seed: int, level: float = DEFAULT_LEVEL,
                    workers: int = 1) -> Estimate:
    """Probability that the first visit to `target` at a step >= 1 happens
    within the horizon (the first-return event when start is in the target)."""
    if horizon < 1:
        raise ValueError(f"horizon must be >= 1, got {horizon}")
    half, full = _return_counts(start, target, horizon, trials, master_seed, workers)
    return Estimate.from_counts(full, trials, horizon, master_seed, level, half)


def estimate_escape(x: Point, target: PointSet, horizon: int, trials: int,
                    master_seed: int, level: float = DEFAULT_LEVEL,
                    workers: int = 1) -> Estimate:
    """Probability of no visit to `target` in steps 1..horizon.

    Exact complement of estimate_return under the same seeds and horizon.
    """
    return estimate_return(x, target, horizon, trials, master_seed, level,
                           workers).complement()


def estimate_cover(target: PointSet, start: Point, horizon: int, trials: int,
                   master_seed: int, level: float = DEFAULT_LEVEL,
                   workers: int = 1) -> Estimate:
    """Probability that a walk from `start` covers every target point within
    the horizon (the start position counts as visited at step 0)."""
    if horizon < 0:
        raise ValueError(f"horizon must be >= 0, got {horizon}")
    d = len(start)
    if len(target) == 0:
        return Estimate.from_counts(trials, trials, horizon, master_seed, level, trials)
    if target.dimension != d:
        raise ValueError("start and target dimensions differ")
    if d == 3 and len(target) <= 64:
        pts = np.array(target.sorted_points(), dtype=np.int64)
        bbox = []
        for j in range(3):
            bbox += [int(pts[:, j].min()), int(pts[:, j].max())]
        half, full = _run_counts(
            kernels.cover_small3, trials, workers, _seed64(master_seed), horizon,
            start[0], start[1], start[2],
            np.ascontiguousarray(pts[:, 0]), np.ascontiguousarray(pts[:, 1]),
            np.ascontiguousarray(pts[:, 2]), *bbox)
        return Estimate.from_counts(full, trials, horizon, master_seed, level, half)
    # Fallback for other dimensions / large targets: streamed per trial.
    full = half = 0
    for t in range(trials):
        stream = WalkStream(d, master_seed, trial=t, start=start)
        step = cover_completion(stream, target, horizon)
        if step is not None:
            full += 1
            if step <= horizon // 2:
                half += 1
    return Estimate.from_counts(full, trials, horizon, master_seed, level, half)


def cover_series(i_max: int, horizon: int, trials: int, master_seed: int,
                 level: float = DEFAULT_LEVEL, workers: int = 1) -> SeriesEstimate:
    """Cover probabilities of the diagonal prefixes D_0, ..., D_{i_max} by a
    single 3-d walk per trial (common random numbers across i)."""
    if i_max < 1:
        raise ValueError(f"i_max must be >= 1, got {i_max}")
    if workers <= 1:
        hist = kernels.cover_series3(0, trials, _seed64(master_seed), horizon, i_max)
    else:
        hist = np.zeros(i_max + 1, dtype=np.int64)
        with ThreadPoolExecutor(max_workers=workers) as ex:
            futures = [ex.submit(kernels.cover_series3, lo, hi, _seed64(master_seed),
                                 horizon, i_max)
                       for lo, hi in _chunks(trials, workers)]
            for fut in futures:
                hist += fut.result()
    successes = np.cumsum(hist[::-1])[::-1]  # trials whose covered prefix >= i
    entries = tuple(
        (i, Estimate.from_counts(int(successes[i]), trials, horizon, master_seed, level))
        for i in range(i_max + 1))
    return SeriesEstimate(entries, {"horizon": horizon, "trials": trials,
                                    "master_seed": master_seed, "d": 3})


@dataclass(frozen=True)
class CapacityEstimate:
    """Capacity as the sum of per-point escape probabilities."""

    value: float
    half_width: float
    bias_delta: float  # summed escape change from horizon//2 to horizon
    n_points: int
    horizon: int
    trials_per_point: int
    master_seed: int


def capacity_estimate(target: PointSet, horizon: int, trials_per_point: int,
                      master_seed: int, level: float = DEFAULT_LEVEL,
                      workers: int = 1) -> CapacityEstimate:
    """Escape-probability form of capacity for 3-d SRW, horizon-truncated.

    Truncation biases every escape probability (and hence the capacity)
    upward; bias_delta reports the summed half-to-full horizon shift.
    """
    if len(target) == 0:
        raise ValueError("capacity needs a non-empty target")
    if target.dimension != 3:
        raise ValueError("capacity estimator is specific to Z^3")
    total = 0.0
    var = 0.0
    delta = 0.0
    for i, p in enumerate(target.sorted_points()):
        est = estimate_escape(p, target, horizon, trials_per_point,
                              child_seed(master_seed, i), level, workers)
        total += est.p_hat
        var += ((est.ci_high - est.ci_low) / 2.0) ** 2
        delta += est.bias_delta
    return CapacityEstimate(total, math.sqrt(var), delta, len(target), horizon,
                            trials_per_point, master_seed)


def wiener_partial_sum(k_max: int, epsilon: float, horizon: int,
                       trials_per_point: int, master_seed: int,
                       level: float = DEFAULT_LEVEL, workers: int = 1) -> SeriesEstimate:
    """Summands 2^{-k} cap(A_k) of the Wiener-test series over dyadic annular
    slices of the sparse diagonal, with the running partial sum in meta."""
    if k_max < 1:
        raise ValueError(f"k_max must be >= 1, got {k_max}")
    slices = sparse.annular_slices(k_max, epsilon)
    entries = []
    sizes, caps, cap_errs, running, ceilings = [], [], [], [], []
    acc = 0.0
    for sl in slices:
        size = len(sl.points)
        if size == 0:
            cap = err = 0.0
        else:
            ce = capacity_estimate(sl.points, horizon, trials_per_point,
                                   child_seed(master_seed, sl.k), level, workers)
            cap, err = ce.value, ce.half_width
        summand = 2.0 ** (-sl.k) * cap
        acc += summand
        entries.append((sl.k, summand))
        sizes.append(size)
        caps.append(cap)
        cap_errs.append(err)
        running.append(acc)
        ceilings.append(2.0 ** (-sl.k) * size)
    return SeriesEstimate(tuple(entries), {
        "epsilon": epsilon, "horizon": horizon, "trials_per_point": trials_per_point,
        "master_seed": master_seed, "slice_sizes": sizes, "capacities": caps,
        "capacity_half_widths": cap_errs, "running_sum": running,
        "summand_ceilings": ceilings})


def polya_baseline(horizon: int, trials: int, master_seed: int,
                   level: float = DEFAULT_LEVEL, workers: int = 1) -> Estimate:
    """Truncated estimate of the 3-d self-return probability (about 0.3405)."""
    o = origin(3)
    return estimate_return(o, point_set([o]), horizon, trials, master_seed,
                           level, workers)


def return_profile(k_range: Sequence[int], epsilon: float, horizon: int,
                   trials: int, master_seed: int, level: float = DEFAULT_LEVEL,
                   workers: int = 1, cap_factor: int = 10) -> SeriesEstimate:
    """Return probability into the sparse diagonal from each start (n_k,)*3.

    The infinite set is represented by its points up to n_{cap_factor * max k};
    anything beyond is out of reach within the tested horizons with more than
    negligible probability (the C/|x-y| hitting bound quantifies this).
    """
    ks = sorted(set(int(k) for k in k_range))
    if not ks or ks[0] < 1:
        raise ValueError("k_range must be non-empty with k >= 1")
    seq = sparse.sequence(epsilon)
    cap_value = seq.n_k(cap_factor * ks[-1])
    target = sparse.sparse_points(cap_value, epsilon)
    entries = []
    for k in ks:
        start = (seq.n_k(k),) * 3
        est = estimate_return(start, target, horizon, trials,
                              child_seed(master_seed, k), level, workers)
        entries.append((k, est))
    return SeriesEstimate(tuple(entries), {
        "epsilon": epsilon, "horizon": horizon, "trials": trials,
        "master_seed": master_seed, "target_cap": cap_value,
        "target_size": len(target)})


def diagonal_return_times(d: int, horizon: int, trials: int, master_seed: int,
                          workers: int = 1) -> np.ndarray:
    """Per-trial first step at which all d coordinates coincide again
    (equivalently, first return of the difference walk to the zero vector);
    -1 when it does not happen within the horizon."""
    if d not in (3, 4):
        raise ValueError(f"diagonal-return kernel supports d in {{3, 4}}, got {d}")
    times = np.empty(trials, dtype=np.int64)
    _run_fill(kernels.diagonal_return_times, trials, workers,
              _seed64(master_seed), horizon, d, times)
    return times


def diagonal_return_probability(d: int, horizon: int, trials: int, master_seed: int,
                                level: float = DEFAULT_LEVEL,
                                workers: int = 1) -> Estimate:
    """Probability the difference walk of a d-dim SRW returns to the zero
    vector within the horizon (recurrent for d = 3, transient for d >= 4)."""
    if d < 3:
        raise ValueError(f"d must be >= 3, got {d}")
    times = diagonal_return_times(d, horizon, trials, master_seed, workers)
    hit = times >= 0
    full = int(np.count_nonzero(hit))
    half = int(np.count_nonzero(hit & (times <= horizon // 2)))
    return Estimate.from_counts(full, trials, horizon, master_seed, level, half)


@dataclass(frozen=True)
class ZCoverStats:
    """Achieved z-step statistics for the interval-cover experiment."""

    z_steps_mean: float
    z_steps_max: int
    z_budget: int
    base_step_cap: int


def interval_cover_z_detail(N: int, base_step_cap: int, trials: int,
                            master_seed: int, level: float = DEFAULT_LEVEL,
                            workers: int = 1) -> tuple[Estimate, ZCoverStats]:
    """Fraction of trials whose diagonal-visit values cover {0..floor(N/3)}.

    Trials stop at base_step_cap base-walk steps or N^3 z-steps, whichever
    comes first; the conjectured N^3 z-step budget is far out of desk reach,
    so results are exploratory lower bounds for the cover probability.
    """
    if N < 2:
        raise ValueError(f"N must be >= 2, got {N}")
    m_max = N // 3
    z_budget = N**3
    covered = np.zeros(trials, dtype=np.uint8)
    zsteps = np.zeros(trials, dtype=np.int64)
    _run_fill(kernels.zwalk_cover, trials, workers, _seed64(master_seed), base_step_cap,
              m_max, z_budget, covered, zsteps)
    est = Estimate.from_counts(int(covered.sum()), trials, base_step_cap,
                               master_seed, level)
    stats = ZCoverStats(float(zsteps.mean()), int(zsteps.max()), z_budget,
                        base_step_cap)
    return est, stats


def interval_cover_z(N: int, base_step_cap: int, trials: int, master_seed: int,
                     level: float = DEFAULT_LEVEL, workers: int = 1) -> Estimate:
    est, _ = interval_cover_z_detail(N, base_step_cap, trials, master_seed,
                                     level, workers)
    return est


# ---------------------------------------------------------------------------
# fits and serialization

def loglinear_fit(indices: Sequence[int], p_hats: Sequence[float]) -> tuple[float, float, float]:
    """Least-squares line through (i, ln p_i) for p_i > 0: (slope, intercept, R^2)."""
    xs = np.array([i for i, p in zip(indices, p_hats) if p > 0.0], dtype=float)
    ys = np.array([math.log(p) for p in p_hats if p > 0.0])
    if xs.size < 2:
        raise ValueError("need at least two positive probabilities to fit")
    slope, intercept = np.polyfit(xs, ys, 1)
    resid = ys - (slope * xs + intercept)
    ss_res = float(np.sum(resid**2))
    ss_tot = float(np.sum((ys - ys.mean()) ** 2))
    r2 = 1.0 if ss_tot == 0.0 else 1.0 - ss_res / ss_tot
    return float(slope), float(intercept), r2


CSV_FIELDS = ["experiment", "epsilon", "N_or_k", "d", "horizon", "trials",
              "successes", "p_hat", "ci_low", "ci_high", "master_seed"]


def result_row(experiment: str, epsilon: Optional[float], n_or_k: int, d: int,
               est: Estimate) -> dict:
    return {
        "experiment": experiment,
        "epsilon": "" if epsilon is None else f"{epsilon:g}",
        "N_or_k": n_or_k,
        "d": d,
        "horizon": est.horizon,
        "trials": est.trials,
        "successes": est.successes,
        "p_hat": f"{est.p_hat:.8f}",
        "ci_low": f"{est.ci_low:.8f}",
        "ci_high": f"{est.ci_high:.8f}",
        "master_seed": est.master_seed,
    }


def write_results_csv(path, rows: Iterable[dict]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=CSV_FIELDS)
        writer.writeheader()
        for row in rows:
            writer.writerow({k: row.get(k, "") for k in CSV_FIELDS})


def write_results_json(path, rows: Sequence[dict], wall_seconds: float,
                       bias_deltas: Optional[Sequence[Optional[float]]] = None) -> None:
    payload = {
        "wall_seconds": wall_seconds,
        "results": [dict(row) for row in rows],
    }
    if bias_deltas is not None:
        for row, delta in zip(payload["results"], bias_deltas):
            row["bias_delta"] = delta
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


class Stopwatch:
    def __enter__(self):
        self._t0 = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.seconds = time.perf_counter() - self._t0
        return False
