"""Rank difference-in-differences and changes-in-changes counterfactual ranking."""

from __future__ import annotations

from typing import Callable, Optional

import numpy as np

from .data import Estimate, PanelSample, require_both_groups
from .errors import DegenerateDistribution, InvalidInput
from .ranks import StepCDF, count_le, ecdf, generalized_inverse, project_to_cdf, rank_ate

DID_ESTIMAND = "tau_r(F_Y1(1)|W=1, F_Y1(0)|W=0) - tau_r(F_Y1(0)|W=1, F_Y1(0)|W=0)"
ATT_ESTIMAND = "rank-ATT"


def _period_ranks(values: np.ndarray, w: np.ndarray, ref: str) -> np.ndarray:
    if ref == "all":
        return count_le(values, values) / values.size
    group = w == (1 if ref == "treated" else 0)
    return count_le(values[group], values) / group.sum()


def _double_difference(post: np.ndarray, pre: np.ndarray, w: np.ndarray) -> float:
    treated = w == 1
    delta = post - pre
    return float(delta[treated].mean() - delta[~treated].mean())


def rank_did(p: PanelSample, ref: str = "all") -> Estimate:
    """Double difference of mean normalized within-period ranks.

    ``ref`` selects the ranking reference within each period: all units, or
    only the treated / control group (normalized by that group's size).
    """
    if ref not in ("all", "treated", "control"):
        raise InvalidInput("ref must be 'all', 'treated' or 'control'")
    n1, n0 = require_both_groups(p.w, "w")
    post = _period_ranks(p.y1, p.w, ref)
    pre = _period_ranks(p.y0, p.w, ref)
    value = _double_difference(post, pre, p.w)
    return Estimate(value, f"rank_did_{ref}", DID_ESTIMAND, p.n, {"n1": n1, "n0": n0, "ref": ref})


def cic_counterfactual(p: PanelSample) -> StepCDF:
    """Changes-in-changes estimate of the treated group's untreated post-period CDF.

    On the control post-period support ``y``, evaluates
    ``F_{Y0|W=1}(Q_{Y0|W=0}(F_{Y1|W=0}(y)))``.
    """
    require_both_groups(p.w, "w")
    treated = p.w == 1
    f_pre_treated = ecdf(p.y0[treated])
    f_pre_control = ecdf(p.y0[~treated])
    f_post_control = ecdf(p.y1[~treated])
    if f_pre_control.support.size < 2 or f_post_control.support.size < 2:
        raise DegenerateDistribution("control distributions must have at least two support points")
    u = f_post_control.cum
    q = generalized_inverse(f_pre_control, u)
    values = f_pre_treated.evaluate(q)
    return project_to_cdf(f_post_control.support, values)


def rank_mdid(p: PanelSample, counterfactual: StepCDF) -> Estimate:
    """Rank-DiD with post-period outcomes ranked against a counterfactual CDF.

    ``counterfactual`` estimates the untreated post-period distribution of the
    treated group, e.g. from :func:`cic_counterfactual` or an oracle.
    """
    n1, n0 = require_both_groups(p.w, "w")
    post = np.asarray(counterfactual.evaluate(p.y1), dtype=float)
    pre = count_le(p.y0, p.y0) / p.n
    value = _double_difference(post, pre, p.w)
    return Estimate(value, "rank_mdid", ATT_ESTIMAND, p.n, {"n1": n1, "n0": n0})


def check_rank_parallel_trend(
    f_post_treated,
    f_post_control,
    f_pre_treated,
    f_pre_control,
    tau: Optional[Callable] = None,
) -> tuple[float, float]:
    """Both sides of the rank parallel-trend condition on untreated outcomes.

    Returns ``(tau_r(F_Y1(0)|W=1, F_Y1(0)|W=0), tau_r(F_Y0(0)|W=1, F_Y0(0)|W=0))``.
    The counterfactual ``F_Y1(0)|W=1`` is unobservable, so this only makes
    sense on oracle distributions. ``tau`` defaults to the step-CDF rank-ATE;
    pass a continuous-distribution version for oracle laws.
    """
    tau = rank_ate if tau is None else tau
    return float(tau(f_post_treated, f_post_control)), float(tau(f_pre_treated, f_pre_control))
