import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from rankreg.data import PanelSample
from rankreg.did import check_rank_parallel_trend, cic_counterfactual, rank_did, rank_mdid
from rankreg.errors import DegenerateDistribution, InvalidInput, NoVariation
from rankreg.ranks import EXACT_TOL, StepCDF, ecdf, sup_distance
from rankreg.simlab import generate, oracle_estimand, tau_r
from rankreg.simlab.fixtures import fixture

MAPS = {"cube": lambda v: v ** 3, "exp": np.exp, "affine": lambda v: 2 * v - 7}


def panel(rng, n=200):
    w = (rng.random(n) < 0.5).astype(float)
    u = rng.normal(size=n) + w
    return PanelSample(y0=u, y1=u + 0.5 * w + 0.3 * rng.normal(size=n), w=w)


class TestRankDid:
    def test_static_outcomes_give_zero(self, rng):
        y = rng.normal(size=30)
        w = np.r_[np.ones(15), np.zeros(15)]
        for ref in ("all", "treated", "control"):
            assert rank_did(PanelSample(y0=y, y1=y, w=w), ref).value == 0.0

    def test_hand_panel(self):
        p = PanelSample(y0=[1, 2, 3, 4], y1=[4, 3, 2, 1], w=[1, 1, 0, 0])
        assert rank_did(p).value == pytest.approx(1.0, abs=EXACT_TOL)

    def test_single_group(self):
        with pytest.raises(NoVariation):
            rank_did(PanelSample(y0=[1, 2], y1=[2, 3], w=[1, 1]))

    def test_bad_ref(self, rng):
        with pytest.raises(InvalidInput):
            rank_did(panel(rng), "pooled")

    @given(st.sampled_from(sorted(MAPS)), st.sampled_from(sorted(MAPS)), st.integers(0, 2**16))
    def test_period_specific_monotone_invariance(self, g0, g1, seed):
        p = panel(np.random.default_rng(seed), 60)
        q = PanelSample(y0=MAPS[g0](p.y0), y1=MAPS[g1](p.y1), w=p.w)
        for ref in ("all", "treated", "control"):
            assert rank_did(p, ref).value == rank_did(q, ref).value
        assert rank_mdid(p, cic_counterfactual(p)).value == pytest.approx(
            rank_mdid(q, cic_counterfactual(q)).value, abs=1e-12)


class TestCic:
    def test_identical_groups_return_control_post(self):
        pre = [1.0, 2.0, 3.0, 4.0]
        p = PanelSample(y0=pre + pre, y1=[5, 6, 7, 8, 10, 20, 30, 40], w=[1] * 4 + [0] * 4)
        cf = cic_counterfactual(p)
        post = ecdf([10, 20, 30, 40])
        assert np.array_equal(cf.support, post.support)
        assert np.allclose(cf.cum, post.cum, atol=1e-12)

    def test_hand_composition(self):
        # control pre {1,2,3}, control post {10,20,30}, treated pre {0.5,1.5,2.5}
        p = PanelSample(y0=[0.5, 1.5, 2.5, 1, 2, 3], y1=[0, 0, 0, 10, 20, 30], w=[1, 1, 1, 0, 0, 0])
        cf = cic_counterfactual(p)
        assert cf.support.tolist() == [10.0, 20.0, 30.0]
        assert np.allclose(cf.cum, [1 / 3, 2 / 3, 1.0], atol=1e-12)

    def test_rank_mdid_with_known_counterfactual(self):
        p = PanelSample(y0=[1, 2, 3, 4], y1=[15, 25, 10, 30], w=[1, 1, 0, 0])
        cf = StepCDF(np.array([10.0, 20.0, 30.0]), np.array([0.25, 0.5, 1.0]))
        # post: treated 0.25, 0.5; control 0.25, 1.0. pre ranks 1/4..4/4
        expected = (0.375 - 0.375) - (0.625 - 0.875)
        assert rank_mdid(p, cf).value == pytest.approx(expected, abs=EXACT_TOL)

    def test_degenerate_control(self):
        p = PanelSample(y0=[1, 2, 5, 5], y1=[1, 2, 3, 4], w=[1, 1, 0, 0])
        with pytest.raises(DegenerateDistribution):
            cic_counterfactual(p)

    def test_recovers_counterfactual_law(self):
        spec = fixture("panel_cic")
        p = generate(spec, 20_000, stream=(7,))
        truth = spec.model().law(1, 0, 1)
        assert sup_distance(cic_counterfactual(p), truth.cdf) < 0.03


class TestParallelTrends:
    def _sides(self, name):
        m = fixture(name).model()
        L = m.law
        return check_rank_parallel_trend(L(1, 0, 1), L(1, 0, 0), L(0, 0, 1), L(0, 0, 0), tau=tau_r)

    def test_holds_under_cic_model(self):
        lhs, rhs = self._sides("panel_cic")
        assert lhs == pytest.approx(rhs, abs=1e-3)

    def test_violation_detected(self):
        lhs, rhs = self._sides("panel_trend_violation")
        assert abs(lhs - rhs) > 0.05

    def test_alternative_trend_fails_where_rank_trend_holds(self):
        spec = fixture("panel_cic")
        gap = oracle_estimand(spec, "alt_pt_lhs").value - oracle_estimand(spec, "alt_pt_rhs").value
        assert abs(gap) > 0.05

    def test_did_limit_differs_from_att(self):
        spec = fixture("panel_cic")
        att = oracle_estimand(spec, "rank_att").value
        did = oracle_estimand(spec, "did_limit").value
        assert att - did > 0.1

    def test_step_cdf_default(self):
        f = ecdf([1.0, 2.0])
        assert check_rank_parallel_trend(f, f, f, f) == (0.25, 0.25)
