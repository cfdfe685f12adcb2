"""Frozen named designs and the per-theorem run plan used by ``simulate``.

The separating designs (IV sign reversal, DiD, RDD) came out of small grid
scans; their oracle gaps are pinned in the tests.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from ..errors import InvalidSpec
from .dgp import DgpSpec

FIXTURES: dict[str, DgpSpec] = {
    spec.name: spec
    for spec in [
        DgpSpec("gaussian_shift", "randomized_binary", {"mu1": 1.0, "mu0": 0.0}, seed=101),
        DgpSpec("null_effect", "randomized_binary", {"mu1": 0.0, "mu0": 0.0}, seed=102),
        DgpSpec("prognostic_covariates", "randomized_binary",
                {"mu1": 1.0, "mu0": 0.0, "gamma1": [0.6, 0.5], "gamma0": [0.6, 0.5]}, seed=103),
        DgpSpec("exponential_dominance", "coupled_potentials",
                {"law1": {"loc": 0.2, "noise": "exponential"}, "law0": {"loc": 0.0, "noise": "exponential"},
                 "coupling": "comonotone"}, seed=104),
        # outcome means vary only mildly with the covariate, so the exact
        # projection limit stays close to the weighted conditional average
        DgpSpec("confounded_mild", "confounded_binary",
                {"px": [0.3, 0.4, 0.3], "pi_x": [0.2, 0.5, 0.8],
                 "mu1_x": [1.0, 1.1, 1.2], "mu0_x": [0.0, 0.1, 0.2]}, seed=105),
        DgpSpec("confounded_separated", "confounded_binary",
                {"px": [0.5, 0.5], "pi_x": [0.3, 0.7], "mu1_x": [1.0, 4.0], "mu0_x": [0.0, 3.0]}, seed=106),
        DgpSpec("dose_three_level", "general_treatment",
                {"levels": [0.0, 1.0, 2.0], "probs": [0.3, 0.4, 0.3], "mu_levels": [0.0, 0.5, 1.0]}, seed=107),
        DgpSpec("dose_continuous", "general_treatment", {"mu_slope": 1.0}, seed=108),
        DgpSpec("iv_sign_reversal", "iv_types",
                {"shares": [0.3, 0.3, 0.4], "pz": 0.5, "y1_a": [-1.0, 0.2], "y0_n": [0.0, 0.2],
                 "y1_c": [0.5, 3.0], "y0_c": [0.0, 0.3]}, seed=109),
        DgpSpec("iv_full_compliance", "iv_types",
                {"shares": [0.0, 0.0, 1.0], "y1_c": [1.0, 1.0], "y0_c": [0.0, 1.0]}, seed=110),
        DgpSpec("panel_cic", "panel_cic",
                {"mu_u1": 1.5, "mu_u0": 0.0, "f0": "identity", "f1": "cube", "delta": 1.0}, seed=111),
        DgpSpec("panel_null", "panel_cic",
                {"mu_u1": 1.5, "mu_u0": 0.0, "f0": "identity", "f1": "cube", "delta": 0.0}, seed=112),
        DgpSpec("panel_trend_violation", "panel_cic",
                {"mu_u1": 1.5, "mu_u0": 0.0, "f0": "identity", "f1": "cube", "delta": 1.0,
                 "trend_shift": 0.5}, seed=113),
        DgpSpec("rdd_jump", "rdd_sharp",
                {"a1": 0.5, "b1": 1.0, "s1": 0.5, "a0": 0.0, "b0": 1.0, "s0": 0.5}, seed=114),
        DgpSpec("rdd_flat", "rdd_sharp",
                {"a1": 0.0, "b1": 0.0, "s1": 1.0, "a0": 0.0, "b0": 0.0, "s0": 1.0}, seed=115),
        DgpSpec("comonotone_shift", "coupled_potentials",
                {"law1": {"loc": 1.0}, "law0": {"loc": 0.0}, "coupling": "comonotone"}, seed=116),
        DgpSpec("independent_shift", "coupled_potentials",
                {"law1": {"loc": 1.0}, "law0": {"loc": 0.0}, "coupling": "independent"}, seed=117),
        DgpSpec("hand_paradox", "coupled_potentials",
                {"law0": {"loc": 0.0}, "coupling": "hand", "q": 0.1, "big": 5.0, "small": 0.1}, seed=118),
    ]
}

RDD_OPTIONS = {"bandwidth_constant": 0.2, "kernel": "triangular"}


@dataclass(frozen=True)
class PlannedRun:
    fixture: str
    estimator: str
    options: dict = field(default_factory=dict)
    oracle: str | None = None


@dataclass(frozen=True)
class TheoremPlan:
    runs: tuple
    ns: tuple
    reps: int


THEOREM_PLANS: dict[str, TheoremPlan] = {
    "1": TheoremPlan((PlannedRun("gaussian_shift", "rank_ols_nocov"),), (500, 2000, 8000, 32000), 50),
    "2": TheoremPlan((PlannedRun("gaussian_shift", "rank_ols_treated"),
                      PlannedRun("gaussian_shift", "rank_ols_control")), (500, 2000, 8000), 20),
    "3": TheoremPlan((PlannedRun("prognostic_covariates", "rank_ols_cov"),
                      PlannedRun("prognostic_covariates", "rank_ols_cov_interact")), (2000, 8000, 32000), 20),
    "4": TheoremPlan((PlannedRun("confounded_mild", "rank_ols_cov", oracle="weighted_conditional_rank_ate"),
                      PlannedRun("confounded_mild", "rank_ols_cov", oracle="ols_projection_limit")),
                     (2000, 8000, 32000), 20),
    "5": TheoremPlan((PlannedRun("dose_three_level", "rank_ols_general"),
                      PlannedRun("dose_continuous", "rank_ols_median_split")), (2000, 8000, 32000), 20),
    "6": TheoremPlan((PlannedRun("iv_sign_reversal", "rank_2sls_all"),
                      PlannedRun("iv_sign_reversal", "rank_2sls_treated"),
                      PlannedRun("iv_sign_reversal", "rank_2sls_control")), (5000, 20000), 10),
    "7": TheoremPlan(tuple(PlannedRun("iv_sign_reversal", "rank_2sls_complier", {"zeta": z})
                           for z in (0.0, 0.5, 1.0)), (5000, 20000), 10),
    "9": TheoremPlan((PlannedRun("panel_cic", "rank_did"),), (2000, 8000, 20000), 10),
    "10": TheoremPlan((PlannedRun("panel_cic", "rank_mdid_cic"),), (2000, 8000, 20000), 10),
    "11": TheoremPlan((PlannedRun("rdd_jump", "rank_rdd_all", RDD_OPTIONS),), (5000, 20000), 10),
    "12": TheoremPlan((PlannedRun("rdd_jump", "rank_mrdd", RDD_OPTIONS),), (5000, 20000), 10),
}


def fixture(name: str) -> DgpSpec:
    if name not in FIXTURES:
        raise InvalidSpec(f"unknown fixture {name!r}; choose from {sorted(FIXTURES)}")
    return FIXTURES[name]


def theorem_plan(key: str) -> TheoremPlan:
    if key not in THEOREM_PLANS:
        raise InvalidSpec(f"no simulation plan for theorem {key!r}; choose from {sorted(THEOREM_PLANS, key=int)}")
    return THEOREM_PLANS[key]
