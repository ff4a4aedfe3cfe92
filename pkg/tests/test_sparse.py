"""Sparse diagonal sequence, counting function, integrals, counterexample set.

Numeric reference values below were frozen from independent computations:
math.fsum for the log-power partial sums and the closed-form antiderivative
x((ln x)^2 - 2 ln x + 2) for the eps = 1 integrals.
"""

import math

import pytest
from hypothesis import given, settings, strategies as st

from coverwalk import sparse


# ---------------------------------------------------------------------------
# sequence n_k and counter C_N

FROZEN_NK = {
    0.25: [0, 1, 2, 4, 6, 8, 10, 12, 15, 18],
    0.5: [0, 1, 2, 4, 6, 8, 11, 14, 17, 21],
    1.0: [0, 1, 2, 4, 7, 10, 14, 18, 23, 28],
}


@pytest.mark.parametrize("eps", sorted(FROZEN_NK))
def test_n_k_first_ten(eps):
    assert [sparse.n_k(k, eps) for k in range(1, 11)] == FROZEN_NK[eps]


def test_n2_is_one_for_all_eps():
    for eps in (0.25, 0.5, 1.0, 2.0):
        assert sparse.n_k(1, eps) == 0
        assert sparse.n_k(2, eps) == 1


def test_partial_sum_examples():
    assert sparse.log_power_sum(1, 0.5) == 0.0
    assert sparse.log_power_sum(3, 1.0) == pytest.approx(
        math.log(2) ** 2 + math.log(3) ** 2, rel=1e-12)


def test_c_n_examples_eps_one():
    assert sparse.c_n(0, 1.0) == 1
    assert sparse.c_n(2, 1.0) == 3
    assert sparse.c_n(7, 1.0) == 5


@given(N=st.integers(0, 3000), eps=st.sampled_from([0.25, 0.5, 1.0]))
@settings(max_examples=60, deadline=None)
def test_c_n_bracket_property(N, eps):
    c = sparse.c_n(N, eps)
    assert sparse.n_k(c, eps) <= N < sparse.n_k(c + 1, eps)


def test_lemma_lower_bound_values_and_validity():
    assert sparse.lemma_lower_bound(100, 0.5) == pytest.approx(3.5775563246, rel=1e-9)
    assert sparse.lemma_lower_bound(10, 1.0) == pytest.approx(0.4715292425, rel=1e-9)
    for eps in (0.25, 0.5, 1.0):
        for N in range(2, 2000):
            assert sparse.c_n(N, eps) > sparse.lemma_lower_bound(N, eps)
    with pytest.raises(ValueError):
        sparse.lemma_lower_bound(1, 0.5)


def test_sparse_points():
    pts = sparse.sparse_points(7, 1.0)
    assert pts.members == {(0, 0, 0), (1, 1, 1), (2, 2, 2), (4, 4, 4), (7, 7, 7)}
    assert sparse.sparse_points(0, 1.0).members == {(0, 0, 0)}


def test_annular_slices_exact_boundaries():
    # (m,m,m) sits in slice k iff 4^{k-1} < 3 m^2 <= 4^k
    slices = sparse.annular_slices(3, 1.0)
    assert [s.k for s in slices] == [1, 2, 3]
    assert slices[0].points.members == {(1, 1, 1)}
    assert slices[1].points.members == {(2, 2, 2)}
    assert slices[2].points.members == {(4, 4, 4)}


def test_annular_slice_union_is_consistent():
    slices = sparse.annular_slices(8, 0.5)
    seen = set()
    for s in slices:
        assert not (seen & s.points.members)  # disjoint
        seen |= s.points.members
        for (m, _, _) in s.points:
            assert 4 ** (s.k - 1) < 3 * m * m <= 4**s.k


# ---------------------------------------------------------------------------
# integrals and tail sums

def test_integral_log_power_closed_form():
    # for eps = 1 the antiderivative is x((ln x)^2 - 2 ln x + 2)
    assert sparse.integral_log_power(1, math.e, 1.0) == pytest.approx(
        math.e - 2.0, rel=1e-9)
    assert sparse.integral_log_power(1, 3, 1.0) == pytest.approx(
        1.0291731504, rel=1e-9)
    assert sparse.integral_log_power(2, 3, 1.0) == pytest.approx(
        0.8408558448, rel=1e-9)
    assert sparse.integral_log_power(5, 5, 0.5) == 0.0


def test_tail_sum_before_matches_closed_form():
    # 1/int_1^3 + 1/int_2^3 with the eps = 1 closed form above
    assert sparse.tail_sum_before(3, 1.0) == pytest.approx(2.1609182906, rel=1e-8)


def test_tail_sum_after_monotone_in_truncation():
    a = sparse.tail_sum_after(3, 20, 1.0)
    b = sparse.tail_sum_after(3, 40, 1.0)
    assert b > a > 0


def test_tail_truncation_bound_dominates_dropped_tail():
    # extending the truncation adds less than the analytic majorant predicts
    eps = 0.5
    base = sparse.tail_sum_after(3, 100, eps)
    extended = sparse.tail_sum_after(3, 400, eps)
    assert extended - base < sparse.tail_truncation_bound(100, eps)


def test_sequence_increment_integral_bound_sample():
    # n_{k2} - n_{k1} >= 1/2 * int_{k1}^{k2} (ln x)^{1+eps} dx for k2 >= 8
    for eps in (0.5, 1.0):
        for k1, k2 in [(1, 8), (3, 12), (8, 50), (20, 200)]:
            lhs = sparse.n_k(k2, eps) - sparse.n_k(k1, eps)
            assert lhs >= 0.5 * sparse.integral_log_power(k1, k2, eps)


# ---------------------------------------------------------------------------
# counterexample set

def test_cluster_shape():
    c1 = sparse.counterexample_cluster(1)
    assert len(c1) == 13
    assert (2, 0, 0) in c1
    assert (2, 1, -1) in c1 and (2, 1, 1) in c1
    assert (1, 0, 0) in c1 and (3, 0, 0) in c1
    assert (2, 2, 0) not in c1
    assert len(sparse.counterexample_cluster(2)) == 21


def test_counterexample_set_union_sizes():
    # clusters 1 and 2 share the three points (3, 0, n), n in {-1, 0, 1}
    assert len(sparse.counterexample_set(1)) == 13
    assert len(sparse.counterexample_set(2)) == 31
    assert len(sparse.counterexample_set(3)) == 60
    shared = {(3, 0, -1), (3, 0, 0), (3, 0, 1)}
    assert shared <= sparse.counterexample_cluster(1).members
    assert shared <= sparse.counterexample_cluster(2).members


def test_forced_prefix_enumeration_small():
    e1 = sparse.forced_prefix_enumeration(1)
    assert (e1.total, e1.avoiding, e1.avoiding_off_axis) == (6, 2, 0)
    assert e1.forced and e1.escape_bound == pytest.approx(1 / 3)
    e3 = sparse.forced_prefix_enumeration(3)
    assert (e3.total, e3.avoiding, e3.avoiding_off_axis) == (216, 4, 0)


def test_forced_prefix_enumeration_rejects_large_k():
    with pytest.raises(ValueError):
        sparse.forced_prefix_enumeration(7)


def test_argument_validation():
    with pytest.raises(ValueError):
        sparse.SparseDiagonal(0.0)
    with pytest.raises(ValueError):
        sparse.n_k(0, 0.5)
    with pytest.raises(ValueError):
        sparse.c_n(-1, 0.5)
    with pytest.raises(ValueError):
        sparse.integral_log_power(0.5, 2, 0.5)
    with pytest.raises(ValueError):
        sparse.tail_sum_before(1, 0.5)
    with pytest.raises(ValueError):
        sparse.counterexample_set(0)
