"""Acceptance gate: the shipped guarantees, one test (and one PASS/FAIL
line) per criterion.

Heavy Monte Carlo artifacts (the k = 1..20 return profile and its
baseline) are computed once per module and shared.  All runs use the
documented default master seed, so every number below is reproducible
with the CLI.
"""

import json
import math
import random

import pytest

from coverwalk import cli, estimate as est, lattice, sparse
from coverwalk.walk import child_seed

SEED = cli.DEFAULT_SEED


def check(num: int, name: str, ok: bool, detail: str = ""):
    print(f"[criterion {num:02d}] {name}: {'PASS' if ok else 'FAIL'}  {detail}")
    assert ok, f"criterion {num:02d} ({name}): {detail}"


# ---------------------------------------------------------------------------
# shared heavy fixtures

PROFILE_KS = range(1, 21)
PROFILE_HORIZON = 10**6
PROFILE_TRIALS = 10**4


@pytest.fixture(scope="module")
def profile():
    return est.return_profile(PROFILE_KS, 0.5, PROFILE_HORIZON, PROFILE_TRIALS,
                              SEED)


@pytest.fixture(scope="module")
def polya_full():
    return est.polya_baseline(PROFILE_HORIZON, PROFILE_TRIALS, SEED)


@pytest.fixture(scope="module")
def polya_truncated():
    return est.polya_baseline(10**5, 10**5, SEED)


@pytest.fixture(scope="module")
def figure_series():
    return est.cover_series(9, 5000, 10**5, SEED)


# ---------------------------------------------------------------------------
# criteria

def test_criterion_01_exact_sequence_suite():
    """n_1, n_2 anchors; strict growth; counter consistency; lower bound."""
    ok = True
    detail = []
    for eps in (0.25, 0.5, 1.0):
        seq = sparse.sequence(eps)
        if seq.n_k(1) != 0 or seq.n_k(2) != 1:
            ok = False
            detail.append(f"anchor failure at eps={eps}")
        ns = [seq.n_k(k) for k in range(1, 10**5 + 1)]
        if any(b <= a for a, b in zip(ns[1:], ns[2:])):
            ok = False
            detail.append(f"non-strict growth at eps={eps}")
        # C_N bracket n_{C_N} <= N < n_{C_N + 1} for N = 0..1e5 by a
        # single pointer sweep over the memoized table
        limit = 10**5
        c = 1
        for N in range(0, limit + 1):
            while seq.n_k(c + 1) <= N:
                c += 1
            if not (seq.n_k(c) <= N < seq.n_k(c + 1)):
                ok = False
                detail.append(f"counter bracket broken at N={N}, eps={eps}")
                break
            if N >= 2 and not c > sparse.lemma_lower_bound(N, eps):
                ok = False
                detail.append(f"lower bound broken at N={N}, eps={eps}")
                break
    check(1, "exact sequence suite", ok, "; ".join(detail))


def test_criterion_02_increment_integral_bound():
    """n_{k2} - n_{k1} >= half the log-power integral, sampled pair grid."""
    rng = random.Random(0)
    violations = 0
    checked = 0
    for eps in (0.5, 1.0):
        seq = sparse.sequence(eps)
        ns = [seq.n_k(k) for k in range(1, 10**4 + 1)]
        for _ in range(10**4):
            k2 = rng.randint(8, 10**4)
            k1 = rng.randint(1, k2 - 1)
            checked += 1
            lhs = ns[k2 - 1] - ns[k1 - 1]
            if lhs < 0.5 * sparse.integral_log_power(k1, k2, eps):
                violations += 1
    check(2, "increment integral bound", violations == 0,
          f"{violations} violations in {checked} sampled pairs")


def test_criterion_03_self_return_oracle(polya_truncated):
    """Truncated self-return probability sits just under the known 0.3405."""
    p = polya_truncated.p_hat
    check(3, "self-return oracle", 0.330 <= p <= 0.345, f"p_hat={p:.4f}")


def test_criterion_04_cover_decay_figure(figure_series):
    """Cover probability of diagonal prefixes: strict decay, log-linear."""
    ps = [e.p_hat for e in figure_series.values()]
    strict = all(a > b for a, b in zip(ps[1:], ps[2:]))
    slope, intercept, r2 = est.loglinear_fit(figure_series.indices()[1:], ps[1:])
    ok = strict and r2 >= 0.97
    check(4, "cover decay figure", ok,
          f"strict={strict} slope={slope:.3f} R2={r2:.4f}")


def test_criterion_05_counterexample_exact():
    """Exhaustive prefixes: avoiding the trap set forces pure z-axis moves."""
    bad = [k for k in range(1, 7)
           if not sparse.forced_prefix_enumeration(k).forced]
    check(5, "counterexample exact enumeration", not bad,
          f"off-axis avoiding prefixes at k={bad}" if bad else "k=1..6 all forced")


def test_criterion_06_return_profile_bounds(profile, polya_full):
    """Sparse-set return probabilities stay far from 1 and above baseline."""
    ps = [e.p_hat for e in profile.values()]
    uppers = [e.ci_high for e in profile.values()]
    floor = polya_full.p_hat - 0.03
    ok = (max(ps) <= 0.90 and max(uppers) <= 0.92 and min(ps) >= floor)
    check(6, "return profile bounds", ok,
          f"p range [{min(ps):.4f}, {max(ps):.4f}] max upper {max(uppers):.4f} "
          f"baseline {polya_full.p_hat:.4f}")


def test_criterion_07_profile_limit_consistency(profile, polya_full):
    """Tail of the profile near the self-return baseline, smoothed decay."""
    ps = [e.p_hat for e in profile.values()]
    tail = ps[14:20]
    deviation = abs(sum(tail) / len(tail) - polya_full.p_hat)
    smoothed = [sum(ps[i:i + 3]) / 3 for i in range(len(ps) - 2)]
    non_increasing = all(a >= b for a, b in zip(smoothed, smoothed[1:]))
    ok = deviation <= 0.10 and non_increasing
    check(7, "profile limit consistency", ok,
          f"tail deviation {deviation:.4f} (limit 0.10), "
          f"smoothed non-increasing {non_increasing}")


def test_criterion_08_wiener_convergence():
    """Summands capped by cardinality; late increments negligible."""
    series = est.wiener_partial_sum(12, 0.5, 10**5, 10**3, SEED)
    sizes = series.meta["slice_sizes"]
    ceiling_ok = all(s <= 2.0 ** (-k) * n + 1e-12
                     for (k, s), n in zip(series.entries, sizes))
    last_increment = series.entries[-1][1]
    ok = ceiling_ok and last_increment < 0.01
    check(8, "wiener convergence", ok,
          f"ceilings {ceiling_ok}, k=12 increment {last_increment:.4f} (limit 0.01)")


def test_criterion_09_staircase_beats_axis():
    """Staircase cover probability >= straight-path probability (paired seeds)."""
    N, horizon, trials = 4, 5000, 10**6
    stair = est.estimate_cover(lattice.staircase_path(3, N).trace(),
                               lattice.origin(3), horizon, trials, SEED,
                               level=0.99)
    axis = est.estimate_cover(lattice.axis_path(3, N).trace(),
                              lattice.origin(3), horizon, trials, SEED,
                              level=0.99)
    joint = math.hypot(stair.ci_high - stair.ci_low, axis.ci_high - axis.ci_low)
    ok = stair.p_hat >= axis.p_hat - joint
    check(9, "staircase beats axis", ok,
          f"staircase {stair.p_hat:.5f} axis {axis.p_hat:.5f} joint99 {joint:.5f}")


def test_criterion_10_transience_signal():
    """Diagonal-return saturates for d=4 (transient), not for d=3."""
    trials = 2 * 10**4
    p4_a = est.diagonal_return_probability(4, 10**5, trials, SEED).p_hat
    p4_b = est.diagonal_return_probability(4, 10**6, trials, SEED).p_hat
    p3_a = est.diagonal_return_probability(3, 10**5, trials, SEED).p_hat
    p3_b = est.diagonal_return_probability(3, 10**6, trials, SEED).p_hat
    d4_ok = abs(p4_b - p4_a) < 0.01 and p4_b <= 0.98
    d3_ok = abs(p3_b - p3_a) >= 0.01 or p3_b >= 0.9
    check(10, "transience signal", d4_ok and d3_ok,
          f"d4 {p4_a:.4f}->{p4_b:.4f}, d3 {p3_a:.4f}->{p3_b:.4f}")


def test_criterion_11_reproducibility(profile, polya_truncated, figure_series,
                                      tmp_path):
    """Worker count never changes success counts; manifests agree."""
    ok = True
    detail = []
    # self-return oracle, 8 workers
    rerun3 = est.polya_baseline(10**5, 10**5, SEED, workers=8)
    if (rerun3.successes, rerun3.successes_half) != (
            polya_truncated.successes, polya_truncated.successes_half):
        ok = False
        detail.append("self-return counts differ across workers")
    # cover series, 8 workers
    rerun4 = est.cover_series(9, 5000, 10**5, SEED, workers=8)
    if [e.successes for e in rerun4.values()] != [
            e.successes for e in figure_series.values()]:
        ok = False
        detail.append("cover-series counts differ across workers")
    # return profile, 8 workers
    rerun6 = est.return_profile(PROFILE_KS, 0.5, PROFILE_HORIZON, PROFILE_TRIALS,
                                SEED, workers=8)
    if [e.successes for e in rerun6.values()] != [
            e.successes for e in profile.values()]:
        ok = False
        detail.append("return-profile counts differ across workers")
    # CLI manifests: identical output checksums for 1 vs 8 workers
    outs = []
    for w in (1, 8):
        out = tmp_path / f"w{w}"
        code = cli.main(["figure5", "--trials", "20000", "--workers", str(w),
                         "--out", str(out)])
        if code != 0:
            ok = False
            detail.append(f"figure5 exited {code} with workers={w}")
        outs.append(json.loads((out / "manifest.json").read_text())["outputs"])
    if outs[0] != outs[1]:
        ok = False
        detail.append("manifest checksums differ across workers")
    check(11, "reproducibility", ok, "; ".join(detail) or "all reruns identical")
