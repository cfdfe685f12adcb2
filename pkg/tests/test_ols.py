import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import stats

from rankreg.data import Estimate, Sample
from rankreg.errors import EstimationError, InvalidInput, NoVariation, OverlapViolation, SingularDesign, TiesPresent
from rankreg.ols import (
    TreatmentTransform,
    confounded_weights,
    normalization_kappa,
    ols_solve,
    rank_ols_cov,
    rank_ols_general,
    rank_ols_nocov,
    rank_ols_refgroup,
)
from rankreg.ranks import EXACT_TOL


def binary_sample(draw_y, w):
    return Sample(y=draw_y, w=w)


@st.composite
def tie_free_binary(draw, min_n=4, max_n=60):
    n = draw(st.integers(min_n, max_n))
    y = draw(st.lists(st.floats(-1e3, 1e3, allow_nan=False), min_size=n, max_size=n, unique=True))
    w = draw(st.lists(st.integers(0, 1), min_size=n, max_size=n))
    w[0], w[1] = 0, 1
    return Sample(y=y, w=w)


class TestOlsSolve:
    def test_mean(self):
        assert ols_solve(np.ones((3, 1)), [1, 2, 3]) == pytest.approx([2.0])

    def test_saturated(self):
        x = np.column_stack([np.ones(4), [0, 0, 1, 1]])
        assert ols_solve(x, [0, 0, 1, 1]) == pytest.approx([0.0, 1.0], abs=1e-12)

    def test_normal_equations(self, rng):
        x = rng.normal(size=(200, 4))
        y = rng.normal(size=200)
        coef = ols_solve(x, y)
        assert np.allclose(coef, np.linalg.solve(x.T @ x, x.T @ y), atol=1e-8)
        assert np.max(np.abs(x.T @ (y - x @ coef))) < 1e-8 * np.abs(x.T @ y).max()

    def test_singular(self):
        x = np.column_stack([np.ones(5), np.arange(5), 2 * np.arange(5)])
        with pytest.raises(SingularDesign) as exc:
            ols_solve(x, np.arange(5.0))
        assert exc.value.smallest_singular_value < 1e-8

    def test_too_few_rows(self):
        with pytest.raises(SingularDesign):
            ols_solve(np.ones((1, 2)), [1.0])


class TestNocov:
    def test_blocked(self):
        est = rank_ols_nocov(Sample(y=[1, 2, 3, 4], w=[0, 0, 1, 1]))
        assert est.value == 0.5 and est.estimand == "rank-ATE"
        assert est.diagnostics == {"n1": 2, "n0": 2}

    def test_interleaved(self):
        assert rank_ols_nocov(Sample(y=[1, 2, 3, 4], w=[0, 1, 0, 1])).value == 0.25

    def test_constant_w(self):
        with pytest.raises(NoVariation):
            rank_ols_nocov(Sample(y=[1, 2, 3], w=[1, 1, 1]))

    @given(tie_free_binary())
    def test_matches_solver(self, s):
        r = np.argsort(np.argsort(s.y)) + 1.0
        coef = ols_solve(np.column_stack([np.ones(s.n), s.w]), r / s.n)
        assert abs(coef[1] - rank_ols_nocov(s).value) <= 1e-10

    @given(tie_free_binary())
    def test_label_swap(self, s):
        swapped = Sample(y=s.y, w=1 - s.w)
        assert abs(rank_ols_nocov(s).value + rank_ols_nocov(swapped).value) <= EXACT_TOL


class TestRefgroup:
    def test_examples(self):
        s = Sample(y=[1, 2, 3, 4], w=[0, 0, 1, 1])
        assert rank_ols_refgroup(s, "treated").value == pytest.approx(0.75, abs=EXACT_TOL)
        assert rank_ols_refgroup(s, "control").value == pytest.approx(0.25, abs=EXACT_TOL)

    def test_ties(self):
        with pytest.raises(TiesPresent):
            rank_ols_refgroup(Sample(y=[1, 1, 2, 3], w=[0, 1, 0, 1]), "treated")

    def test_bad_ref(self):
        with pytest.raises(InvalidInput):
            rank_ols_refgroup(Sample(y=[1, 2], w=[0, 1]), "all")

    @given(tie_free_binary())
    def test_identities(self, s):
        base = rank_ols_nocov(s).value
        n1 = int(s.w.sum())
        n0 = s.n - n1
        t = rank_ols_refgroup(s, "treated").value
        c = rank_ols_refgroup(s, "control").value
        assert abs(t - base - 1 / (2 * n1)) <= EXACT_TOL
        assert abs(base - c - 1 / (2 * n0)) <= EXACT_TOL
        assert abs(t - c - 1 / (2 * n1) - 1 / (2 * n0)) <= EXACT_TOL


class TestCov:
    def test_balanced_covariate(self):
        y = [3.0, 1.0, 4.0, 1.5, 5.0, 9.0, 2.0, 6.0]
        w = [0, 0, 0, 0, 1, 1, 1, 1]
        x = [1.0, -1.0, 2.0, -2.0, 1.0, -1.0, 2.0, -2.0]  # zero covariance with w
        s = Sample(y=y, w=w, x=x)
        base = rank_ols_nocov(s).value
        assert abs(rank_ols_cov(Sample(y=y, w=w, x=x)).value - base) <= 1e-10
        assert abs(rank_ols_cov(s, interact=True).value - base) <= 1e-10

    def test_no_covariates(self):
        s = Sample(y=[1, 2, 3, 4], w=[0, 0, 1, 1])
        assert rank_ols_cov(s).value == rank_ols_nocov(s).value

    def test_singular(self):
        s = Sample(y=[1, 2, 3, 4], w=[0, 0, 1, 1], x=[0, 0, 1, 1])
        with pytest.raises(SingularDesign):
            rank_ols_cov(s)

    def test_interaction_uses_full_sample_mean(self, rng):
        n = 50
        x = rng.normal(size=(n, 2))
        w = (rng.random(n) < 0.5).astype(float)
        y = rng.normal(size=n) + w + x[:, 0]
        r = (np.argsort(np.argsort(y)) + 1.0) / n
        design = np.column_stack([np.ones(n), w, x, w[:, None] * (x - x.mean(axis=0))])
        expect = np.linalg.lstsq(design, r, rcond=None)[0][1]
        assert abs(rank_ols_cov(Sample(y=y, w=w, x=x), interact=True).value - expect) < 1e-10


class TestTransforms:
    def test_validation(self):
        with pytest.raises(InvalidInput):
            TreatmentTransform("dichotomize_at", threshold=1.2)
        with pytest.raises(InvalidInput):
            TreatmentTransform("step", breakpoints=(0.5, 0.2))
        with pytest.raises(InvalidInput):
            TreatmentTransform("custom")
        with pytest.raises(InvalidInput):
            TreatmentTransform("spline")

    def test_dichotomize_is_strict(self):
        h = TreatmentTransform.dichotomize(0.5).apply([1.0, 2.0, 3.0, 4.0])
        assert h.tolist() == [0.0, 0.0, 1.0, 1.0]

    def test_step(self):
        h = TreatmentTransform("step", breakpoints=(0.25, 0.5, 0.75)).apply([4.0, 3.0, 2.0, 1.0])
        assert h.tolist() == [3.0, 2.0, 1.0, 0.0]

    def test_custom_missing_value(self):
        t = TreatmentTransform("custom", table={0.0: 0.0, 1.0: 2.0})
        with pytest.raises(InvalidInput):
            t.apply([0.0, 3.0])


class TestGeneral:
    def test_binary_identity_reduces(self):
        s = Sample(y=[1, 5, 3, 4, 2, 6], w=[0, 1, 0, 1, 0, 1])
        est = rank_ols_general(s, TreatmentTransform())
        assert abs(est.value - rank_ols_nocov(s).value) <= 1e-12

    def test_rank_rank_is_spearman(self, rng):
        w = rng.normal(size=300)
        y = w + rng.normal(size=300)
        est = rank_ols_general(Sample(y=y, w=w), TreatmentTransform("rank"))
        # with tie-free data both rank vectors have the same variance, so the slope is the correlation
        assert abs(est.value - stats.spearmanr(w, y).statistic) < 1e-10

    def test_constant_transform(self):
        s = Sample(y=[1, 2, 3, 4], w=[1, 1, 1, 1])
        with pytest.raises(NoVariation):
            rank_ols_general(s, TreatmentTransform())

    def test_normalized_records_kappa(self):
        s = Sample(y=[1, 5, 3, 4, 2, 6], w=[1, 2, 3, 4, 5, 6])
        est = rank_ols_general(s, TreatmentTransform("rank", normalize=True))
        assert est.diagnostics["kappa"] == pytest.approx(2.0, abs=EXACT_TOL)
        raw = rank_ols_general(s, TreatmentTransform("rank"))
        assert est.value == pytest.approx(raw.value / 2, abs=1e-12)


def _kappa_brute(w, h):
    num = den = 0.0
    for i in range(len(w)):
        for j in range(len(w)):
            if i != j and w[i] > w[j]:
                num += h[i] - h[j]
                den += (h[i] - h[j]) ** 2
    return num / den


class TestKappa:
    def test_binary_identity(self):
        assert normalization_kappa([0, 1, 1, 0, 1], TreatmentTransform()) == 1.0

    def test_rank_tie_free(self):
        for n in (2, 3, 10, 57):
            w = np.random.default_rng(n).permutation(n).astype(float)
            assert abs(normalization_kappa(w, TreatmentTransform("rank")) - 2.0) <= EXACT_TOL

    def test_tabulated_four_points(self):
        w = [0.0, 1.0, 2.0, 3.0]
        table = {0.0: 0.0, 1.0: 0.3, 2.0: 1.5, 3.0: 1.6}
        t = TreatmentTransform("custom", table=table)
        assert abs(normalization_kappa(w, t) - _kappa_brute(w, [table[v] for v in w])) <= EXACT_TOL

    def test_constant(self):
        with pytest.raises(NoVariation):
            normalization_kappa([1.0, 1.0, 1.0], TreatmentTransform())

    @given(st.lists(st.integers(0, 6), min_size=2, max_size=80), st.sampled_from(["identity", "rank", "step"]))
    def test_sorted_path_matches_pairs(self, w, kind):
        t = TreatmentTransform(kind, breakpoints=(0.3, 0.6)) if kind == "step" else TreatmentTransform(kind)
        try:
            ref = normalization_kappa(w, t, method="pairs")
        except NoVariation:
            with pytest.raises(NoVariation):
                normalization_kappa(w, t, method="sorted")
            return
        assert abs(normalization_kappa(w, t, method="sorted") - ref) <= EXACT_TOL


class TestConfoundedWeights:
    def test_constant_propensity(self):
        x = np.ones((5, 1))
        out = confounded_weights(x, [0.4] * 5)
        assert np.allclose(out.pi_tilde, 0.4) and np.allclose(out.weights, 0.24)

    def test_saturated_binary(self):
        level = np.array([0, 0, 1, 1, 1, 0])
        x = np.column_stack([np.ones(6), level])
        pi = np.where(level == 1, 0.7, 0.3)
        out = confounded_weights(x, pi)
        assert np.allclose(out.pi_tilde, pi, atol=1e-12)
        assert np.allclose(out.weights, 0.21, atol=1e-12)
        assert not out.has_negative

    def test_nonlinear_propensity_can_go_negative(self):
        xv = np.array([0.0, 1.0, 2.0])
        x = np.column_stack([np.ones(3), xv])
        out = confounded_weights(x, [0.98, 0.02, 0.98])
        pi = np.array([0.98, 0.02, 0.98])
        assert np.allclose(out.weights, pi * (1 - out.pi_tilde))
        # a U-shaped propensity has a flat linear projection, so no sign flip here
        assert np.allclose(out.pi_tilde, np.mean(pi))
        # concave propensity: the linear fit overshoots 1 at the top point
        out = confounded_weights(x, [0.5, 0.99, 0.99])
        assert out.pi_tilde[2] > 1 and out.weights[2] < 0
        assert out.has_negative and out.diagnostics["projection_outside_unit_interval"]

    def test_overlap(self):
        with pytest.raises(OverlapViolation):
            confounded_weights(np.ones((2, 1)), [0.5, 0.999])


def test_estimate_rejects_nan():
    with pytest.raises(EstimationError):
        Estimate(float("nan"), "x", "y", 2)


@given(tie_free_binary(), st.sampled_from(["cube", "exp", "affine"]))
def test_monotone_invariance(s, kind):
    f = {"cube": lambda v: v ** 3, "exp": lambda v: np.exp(v / 500.0), "affine": lambda v: 3 * v - 7}[kind]
    fy = f(s.y)
    if np.unique(fy).size != s.n:
        return  # the map collapsed distinct floats; invariance needs strict monotonicity in floating point
    t = Sample(y=fy, w=s.w)
    assert rank_ols_nocov(t).value == rank_ols_nocov(s).value
    assert rank_ols_refgroup(t, "treated").value == rank_ols_refgroup(s, "treated").value
    assert rank_ols_general(t, TreatmentTransform()).value == rank_ols_general(s, TreatmentTransform()).value
