import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import stats

from rankreg.errors import DegenerateDistribution, InvalidInput
from rankreg.ranks import (
    EXACT_TOL,
    IdentifiedSet,
    Jitter,
    StepCDF,
    compute_ranks,
    ecdf,
    fan_park_bounds,
    generalized_inverse,
    has_ties,
    mixture,
    project_to_cdf,
    rank_ate,
    rank_ate_pairs,
    sup_distance,
)

small_ints = st.lists(st.integers(-5, 5), min_size=1, max_size=30)
floats = st.floats(-1e6, 1e6, allow_nan=False, allow_infinity=False)


def distinct_floats(min_size=1, max_size=30):
    return st.lists(floats, min_size=min_size, max_size=max_size, unique=True)


class TestComputeRanks:
    def test_permutation(self):
        assert compute_ranks([3.0, 1.0, 2.0]).ranks.tolist() == [3, 1, 2]

    def test_single(self):
        assert compute_ranks([5.0]).ranks.tolist() == [1]

    def test_ties_take_max_rank(self):
        assert compute_ranks([1.0, 1.0]).ranks.tolist() == [2, 2]

    def test_empty_rejected(self):
        with pytest.raises(InvalidInput):
            compute_ranks([])

    def test_jitter_breaks_ties_reproducibly(self):
        vals = [1.0, 1.0, 2.0, 2.0, 2.0]
        a = compute_ranks(vals, Jitter(seed=7, epsilon=1e-6))
        b = compute_ranks(vals, Jitter(seed=7, epsilon=1e-6))
        assert sorted(a.ranks.tolist()) == [1, 2, 3, 4, 5]
        assert a.ranks.tolist() == b.ranks.tolist()

    def test_jitter_needs_positive_epsilon(self):
        with pytest.raises(InvalidInput):
            Jitter(seed=1, epsilon=0.0)

    def test_unknown_policy(self):
        with pytest.raises(InvalidInput):
            compute_ranks([1.0], "average")

    @given(small_ints)
    def test_ecdf_times_n_is_rank(self, vals):
        r = compute_ranks(vals).ranks
        f = ecdf(vals)
        assert np.array_equal(np.round(len(vals) * f.evaluate(np.array(vals, dtype=float))), r)

    @given(distinct_floats())
    def test_tie_free_ranks_are_a_permutation(self, vals):
        assert sorted(compute_ranks(vals).ranks.tolist()) == list(range(1, len(vals) + 1))


class TestEcdf:
    def test_two_point(self):
        f = ecdf([1.0, 2.0])
        assert f.evaluate(1.0) == 0.5
        assert f.evaluate(2.0) == 1.0
        assert f.evaluate(0.0) == 0.0

    def test_single(self):
        assert ecdf([7.0]).evaluate(7.0) == 1.0

    def test_right_continuous_between_points(self):
        f = ecdf([1.0, 2.0, 3.0, 4.0])
        assert f.evaluate(2.5) == 0.5
        assert f.left_limit(2.0) == 0.25

    def test_empty_rejected(self):
        with pytest.raises(InvalidInput):
            ecdf([])

    def test_invalid_stepcdf(self):
        with pytest.raises(InvalidInput):
            StepCDF(np.array([1.0, 2.0]), np.array([0.6, 0.5]))
        with pytest.raises(InvalidInput):
            StepCDF(np.array([2.0, 1.0]), np.array([0.5, 1.0]))
        with pytest.raises(InvalidInput):
            StepCDF(np.array([1.0, 2.0]), np.array([0.5, 0.9]))


class TestRankAte:
    def test_same_sample_counts_ties_fully(self):
        # (1/4) * #{(i, j): z_j <= z_i} - 1/2 with z = [1, 2]
        assert rank_ate(ecdf([1, 2]), ecdf([1, 2])) == pytest.approx(0.25, abs=1e-15)

    def test_dominating(self):
        assert rank_ate(ecdf([10, 20]), ecdf([1, 2])) == 0.5

    def test_gaussian_shift(self):
        rng = np.random.default_rng(0)
        a = rng.normal(1, 1, 100_000)
        b = rng.normal(0, 1, 100_000)
        target = stats.norm.cdf(1 / math.sqrt(2)) - 0.5
        assert abs(rank_ate(ecdf(a), ecdf(b)) - target) < 0.01

    def test_pairs_examples(self):
        assert rank_ate_pairs([2], [1]) == 0.5
        assert rank_ate_pairs([1], [2]) == -0.5
        assert rank_ate_pairs([1, 3], [2, 4]) == -0.25

    def test_pairs_empty(self):
        with pytest.raises(InvalidInput):
            rank_ate_pairs([], [1.0])

    @given(small_ints, small_ints)
    def test_matches_pairs_with_ties(self, a, b):
        assert abs(rank_ate(ecdf(a), ecdf(b)) - rank_ate_pairs(a, b)) <= 1e-12

    @given(small_ints, small_ints)
    def test_range(self, a, b):
        assert -0.5 <= rank_ate(ecdf(a), ecdf(b)) <= 0.5

    @given(distinct_floats(2, 20))
    def test_anti_symmetry_disjoint(self, vals):
        k = len(vals) // 2
        a, b = vals[:k] or vals[:1], vals[k:]
        if set(a) & set(b):
            return
        assert abs(rank_ate_pairs(a, b) + rank_ate_pairs(b, a)) <= EXACT_TOL

    @given(small_ints, small_ints)
    def test_invariance_under_increasing_map(self, a, b):
        f = lambda v: np.exp(np.asarray(v, dtype=float) / 3.0) + 2.0 * np.asarray(v, dtype=float) ** 3
        assert rank_ate_pairs(f(a), f(b)) == rank_ate_pairs(a, b)

    @given(small_ints, small_ints, small_ints, st.integers(0, 10))
    def test_linearity_first_argument(self, a, a2, b, k):
        alpha = k / 10
        f1, f1b, f0 = ecdf(a), ecdf(a2), ecdf(b)
        lhs = rank_ate(mixture([(alpha, f1), (1 - alpha, f1b)]), f0)
        rhs = alpha * rank_ate(f1, f0) + (1 - alpha) * rank_ate(f1b, f0)
        assert abs(lhs - rhs) <= 1e-12

    @given(small_ints, small_ints, small_ints, st.integers(0, 10))
    def test_linearity_second_argument(self, a, b, b2, k):
        alpha = k / 10
        f1, f0, f0b = ecdf(a), ecdf(b), ecdf(b2)
        lhs = rank_ate(f1, mixture([(alpha, f0), (1 - alpha, f0b)]))
        rhs = alpha * rank_ate(f1, f0) + (1 - alpha) * rank_ate(f1, f0b)
        assert abs(lhs - rhs) <= 1e-12

    @given(distinct_floats(2, 24), st.integers(0, 10))
    def test_partial_additivity_step(self, vals, k):
        # a step CDF ties with itself: tau_r(F, F) = 1/(2m) for m equal atoms,
        # so the identity picks up that self-tie correction
        zeta = k / 10
        half = len(vals) // 2
        a, b = vals[:half], vals[half:]
        f1, f0 = ecdf(a), ecdf(b)
        ref = mixture([(zeta, f1), (1 - zeta, f0)])
        lhs = rank_ate(f1, ref) - rank_ate(f0, ref)
        correction = zeta / (2 * len(a)) - (1 - zeta) / (2 * len(b))
        assert abs(lhs - rank_ate(f1, f0) - correction) <= EXACT_TOL

    def test_self_tie(self):
        assert rank_ate(ecdf([1.0, 2.0, 3.0]), ecdf([1.0, 2.0, 3.0])) == pytest.approx(1 / 6, abs=EXACT_TOL)


class TestMixture:
    def test_identity(self):
        f = ecdf([1.0, 3.0, 3.0])
        m = mixture([(1.0, f)])
        assert np.array_equal(m.support, f.support) and np.allclose(m.cum, f.cum, atol=1e-15)

    def test_two_points(self):
        m = mixture([(0.5, ecdf([0.0])), (0.5, ecdf([1.0]))])
        assert m.evaluate(0.0) == 0.5 and m.evaluate(1.0) == 1.0

    def test_bad_weights(self):
        with pytest.raises(InvalidInput):
            mixture([(0.6, ecdf([0.0])), (0.6, ecdf([1.0]))])
        with pytest.raises(InvalidInput):
            mixture([(-0.5, ecdf([0.0])), (1.5, ecdf([1.0]))])


class TestGeneralizedInverse:
    def test_examples(self):
        f = ecdf([1, 2, 3])
        assert generalized_inverse(f, 0.5) == 2
        assert generalized_inverse(f, 1.0) == 3
        assert generalized_inverse(ecdf([5]), 0.2) == 5
        assert generalized_inverse(f, 0.0) == 1

    def test_exact_level_hits_the_atom(self):
        f = ecdf([1, 2, 3])
        assert generalized_inverse(f, 1 / 3) == 1

    def test_out_of_range(self):
        with pytest.raises(InvalidInput):
            generalized_inverse(ecdf([1]), 1.5)
        with pytest.raises(InvalidInput):
            generalized_inverse(ecdf([1]), -0.1)

    @given(small_ints, st.floats(0, 1))
    def test_inf_definition(self, vals, u):
        f = ecdf(vals)
        q = generalized_inverse(f, u)
        assert f.evaluate(q) >= u - 1e-12
        below = f.support[f.support < q]
        assert below.size == 0 or f.evaluate(below[-1]) < u - 1e-12 or u == 0


class TestFanPark:
    def test_identical(self):
        b = fan_park_bounds(ecdf([1, 2, 3]), ecdf([1, 2, 3]))
        assert (b.lower, b.upper) == (-0.5, 0.5)

    def test_point_identified(self):
        b = fan_park_bounds(ecdf([10, 20]), ecdf([1, 2]))
        assert (b.lower, b.upper) == (0.5, 0.5)

    @given(st.lists(st.tuples(st.integers(-4, 4), st.integers(-4, 4)), min_size=1, max_size=40))
    def test_contains_every_empirical_coupling(self, pairs):
        y1 = np.array([p[0] for p in pairs], dtype=float)
        y0 = np.array([p[1] for p in pairs], dtype=float)
        tau_star = float(np.mean(y1 >= y0)) - 0.5
        assert fan_park_bounds(ecdf(y1), ecdf(y0)).contains(tau_star)

    def test_identified_set_order(self):
        with pytest.raises(InvalidInput):
            IdentifiedSet(0.2, 0.1)


class TestProjectToCdf:
    def test_fixed_point(self):
        f = project_to_cdf([1, 2, 3], [0.2, 0.5, 1.0])
        assert np.allclose(f.cum, [0.2, 0.5, 1.0], atol=1e-15)

    def test_pooling(self):
        f = project_to_cdf([1, 2, 3], [0.5, 0.3, 1.0])
        assert np.allclose(f.cum, [0.4, 0.4, 1.0], atol=1e-15)

    def test_clip(self):
        f = project_to_cdf([1, 2, 3], [-0.1, 0.6, 1.1])
        assert np.allclose(f.cum, [0.0, 0.6, 1.0], atol=1e-15)

    def test_degenerate(self):
        with pytest.raises(DegenerateDistribution):
            project_to_cdf([1, 2], [-0.3, -0.1])

    @given(st.lists(st.floats(-2, 2), min_size=1, max_size=40))
    def test_always_valid(self, raw):
        support = np.arange(len(raw), dtype=float)
        if max(np.clip(raw, 0, None)) == 0 and np.mean(raw) <= 0:
            return
        try:
            f = project_to_cdf(support, raw)
        except DegenerateDistribution:
            return
        assert np.all(np.diff(f.cum) >= 0) and f.cum[0] >= 0 and f.cum[-1] == 1.0


def test_has_ties():
    assert has_ties([1, 2, 2]) and not has_ties([1, 2, 3])


def test_sup_distance_shrinks():
    rng = np.random.default_rng(3)
    d = [sup_distance(ecdf(rng.normal(size=n)), stats.norm.cdf) for n in (100, 10_000)]
    assert d[1] < d[0] and d[1] < 0.03
