"""Rank regressions for treatment effects: OLS, 2SLS, DiD and sharp RDD on ranks."""

from .data import Estimate, PanelSample, Sample
from .did import cic_counterfactual, check_rank_parallel_trend, rank_did, rank_mdid
from .errors import RankRegError
from .iv import estimate_complier_cdfs, estimate_complier_shares, rank_2sls, rank_2sls_complier
from .ols import (
    TreatmentTransform,
    confounded_weights,
    normalization_kappa,
    rank_ols_cov,
    rank_ols_general,
    rank_ols_nocov,
    rank_ols_refgroup,
)
from .ranks import (
    IdentifiedSet,
    Jitter,
    StepCDF,
    compute_ranks,
    ecdf,
    fan_park_bounds,
    generalized_inverse,
    project_to_cdf,
    rank_ate,
    rank_ate_pairs,
)
from .rdd import Kernel, RddConfig, kernel_weight, rank_mrdd, rank_rdd

__version__ = "0.1.0"

__all__ = [
    "Estimate", "PanelSample", "Sample", "RankRegError",
    "cic_counterfactual", "check_rank_parallel_trend", "rank_did", "rank_mdid",
    "estimate_complier_cdfs", "estimate_complier_shares", "rank_2sls", "rank_2sls_complier",
    "TreatmentTransform", "confounded_weights", "normalization_kappa", "rank_ols_cov",
    "rank_ols_general", "rank_ols_nocov", "rank_ols_refgroup",
    "IdentifiedSet", "Jitter", "StepCDF", "compute_ranks", "ecdf", "fan_park_bounds",
    "generalized_inverse", "project_to_cdf", "rank_ate", "rank_ate_pairs",
    "Kernel", "RddConfig", "kernel_weight", "rank_mrdd", "rank_rdd",
]
