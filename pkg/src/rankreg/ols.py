"""Rank-OLS estimators: binary treatment, covariates, general treatment transforms."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Optional, Sequence

import numpy as np

from .data import Estimate, Sample, require_both_groups
from .errors import InvalidInput, NoVariation, OverlapViolation, SingularDesign, TiesPresent
from .ranks import compute_ranks, count_le, has_ties

SINGULAR_RTOL = 1e-10
KAPPA_PAIRS_MAX_N = 3000

TRANSFORM_KINDS = ("identity", "rank", "dichotomize_at", "step", "custom")


def _lstsq(design: np.ndarray, response: np.ndarray) -> tuple[np.ndarray, float]:
    design = np.asarray(design, dtype=float)
    response = np.asarray(response, dtype=float)
    if design.ndim == 1:
        design = design[:, None]
    n, p = design.shape
    if response.shape != (n,):
        raise InvalidInput("response length must match design rows")
    if n < p:
        raise SingularDesign(f"design has {n} rows but {p} columns")
    sv = np.linalg.svd(design, compute_uv=False)
    if sv[0] == 0 or sv[-1] / sv[0] < SINGULAR_RTOL:
        raise SingularDesign(
            f"design is rank deficient (smallest singular value {sv[-1]:.3g})",
            smallest_singular_value=float(sv[-1]),
        )
    q, r = np.linalg.qr(design)
    coef = np.linalg.solve(r, q.T @ response)
    return coef, float(sv[0] / sv[-1])


def ols_solve(design, response) -> np.ndarray:
    """Least-squares coefficients via a QR factorization.

    Raises :class:`SingularDesign` when the ratio of smallest to largest
    singular value drops below 1e-10.
    """
    return _lstsq(design, response)[0]


def _normalized_ranks(y: np.ndarray) -> np.ndarray:
    return compute_ranks(y).normalized


def rank_ols_nocov(s: Sample) -> Estimate:
    """Difference in mean normalized ranks ``R_i/n`` between treated and control."""
    n1, n0 = require_both_groups(s.w, "w")
    r = _normalized_ranks(s.y)
    treated = s.w == 1
    value = r[treated].mean() - r[~treated].mean()
    return Estimate(value, "rank_ols_nocov", "rank-ATE", s.n, {"n1": n1, "n0": n0})


def rank_ols_refgroup(s: Sample, ref: str) -> Estimate:
    """Rank-OLS with outcomes ranked only among the treated or control units.

    The rank of every unit is ``#{j in group : Y_j <= Y_i}`` normalized by the
    group size. On tie-free data the result differs from
    :func:`rank_ols_nocov` by exactly ``+1/(2 n1)`` (treated) or
    ``-1/(2 n0)`` (control).
    """
    if ref not in ("treated", "control"):
        raise InvalidInput("ref must be 'treated' or 'control'")
    n1, n0 = require_both_groups(s.w, "w")
    if has_ties(s.y):
        raise TiesPresent("reference-group identities require tie-free outcomes")
    group = s.w == (1 if ref == "treated" else 0)
    r = count_le(s.y[group], s.y) / group.sum()
    treated = s.w == 1
    value = r[treated].mean() - r[~treated].mean()
    return Estimate(value, f"rank_ols_ref_{ref}", "rank-ATE", s.n, {"n1": n1, "n0": n0, "ref": ref})


def rank_ols_cov(s: Sample, interact: bool = False) -> Estimate:
    """Rank-OLS adjusting for covariates, optionally with treatment interactions.

    With ``interact=True`` the regressors are ``1, W, X, W * (X - Xbar)``,
    where ``Xbar`` is the full-sample covariate mean.
    """
    if s.n_covariates == 0:
        est = rank_ols_nocov(s)
        est.estimator = "rank_ols_int" if interact else "rank_ols_cov"
        return est
    n1, n0 = require_both_groups(s.w, "w")
    r = _normalized_ranks(s.y)
    cols = [np.ones(s.n), s.w, s.x]
    if interact:
        cols.append(s.w[:, None] * (s.x - s.x.mean(axis=0)))
    coef, cond = _lstsq(np.column_stack(cols), r)
    return Estimate(
        coef[1],
        "rank_ols_int" if interact else "rank_ols_cov",
        "rank-ATE",
        s.n,
        {"n1": n1, "n0": n0, "d": s.n_covariates, "condition_number": cond},
    )


@dataclass(frozen=True)
class TreatmentTransform:
    """Data-dependent transform ``h_n`` applied to the treatment.

    ``rank`` maps W to its normalized rank ``R^W/n``; ``dichotomize_at(t)``
    to ``1{R^W/n > t}``; ``step(b_1 < ... < b_k)`` to ``sum_k 1{R^W/n > b_k}``
    (quantile-bin coarsening on the rank scale); ``custom`` looks each W value
    up in ``table``. ``normalize`` rescales by the U-statistic factor kappa.
    """

    kind: str = "identity"
    threshold: Optional[float] = None
    breakpoints: tuple = ()
    table: Optional[Mapping[float, float]] = None
    normalize: bool = False

    def __post_init__(self):
        if self.kind not in TRANSFORM_KINDS:
            raise InvalidInput(f"unknown transform kind {self.kind!r}")
        if self.kind == "dichotomize_at":
            if self.threshold is None or not 0 < self.threshold < 1:
                raise InvalidInput("dichotomize_at threshold must lie in (0, 1)")
        if self.kind == "step":
            b = np.asarray(self.breakpoints, dtype=float)
            if b.size == 0 or np.any(np.diff(b) <= 0) or b[0] <= 0 or b[-1] >= 1:
                raise InvalidInput("step breakpoints must be increasing within (0, 1)")
            object.__setattr__(self, "breakpoints", tuple(float(v) for v in b))
        if self.kind == "custom" and not self.table:
            raise InvalidInput("custom transform needs a lookup table")

    @classmethod
    def dichotomize(cls, threshold: float = 0.5, normalize: bool = False) -> "TreatmentTransform":
        return cls("dichotomize_at", threshold=threshold, normalize=normalize)

    def apply(self, w) -> np.ndarray:
        """``h_n(W_i)`` for every unit, before any kappa normalization."""
        w = np.asarray(w, dtype=float)
        if self.kind == "identity":
            return w.copy()
        if self.kind == "custom":
            try:
                return np.array([float(self.table[v]) for v in w.tolist()])
            except KeyError as exc:
                raise InvalidInput(f"treatment value {exc.args[0]!r} missing from table") from None
        r = count_le(w, w) / w.size
        if self.kind == "rank":
            return r
        if self.kind == "dichotomize_at":
            return (r > self.threshold).astype(float)
        return (r[:, None] > np.asarray(self.breakpoints)[None, :]).sum(axis=1).astype(float)


def _kappa_pairs(w: np.ndarray, h: np.ndarray, chunk: int = 1024) -> tuple[float, float]:
    num = 0.0
    den = 0.0
    for start in range(0, w.size, chunk):
        wi = w[start:start + chunk, None]
        hi = h[start:start + chunk, None]
        mask = wi > w[None, :]
        d = np.where(mask, hi - h[None, :], 0.0)
        num += float(d.sum())
        den += float((d * d).sum())
    return num, den


def _kappa_sorted(w: np.ndarray, h: np.ndarray) -> tuple[float, float]:
    order = np.argsort(w, kind="stable")
    ws, hs = w[order], h[order]
    below = np.searchsorted(ws, ws, side="left")  # units with strictly smaller W
    p1 = np.concatenate([[0.0], np.cumsum(hs)])
    p2 = np.concatenate([[0.0], np.cumsum(hs * hs)])
    s1, s2 = p1[below], p2[below]
    num = float(np.sum(below * hs - s1))
    den = float(np.sum(below * hs * hs - 2.0 * hs * s1 + s2))
    return num, den


def normalization_kappa(w, t: TreatmentTransform, method: str = "auto") -> float:
    """kappa = sum_{W_i > W_j} (h_i - h_j) / sum_{W_i > W_j} (h_i - h_j)^2.

    ``method="pairs"`` is the O(n^2) double sum; ``"sorted"`` uses prefix sums
    over the sorted treatment and is used automatically above 3000 units.
    """
    w = np.asarray(w, dtype=float)
    h = t.apply(w)
    if method == "auto":
        method = "pairs" if w.size <= KAPPA_PAIRS_MAX_N else "sorted"
    if method == "pairs":
        num, den = _kappa_pairs(w, h)
    elif method == "sorted":
        num, den = _kappa_sorted(w, h)
    else:
        raise InvalidInput(f"unknown kappa method {method!r}")
    if not den > 0:
        raise NoVariation("transformed treatment does not vary across treatment levels")
    return num / den


def rank_ols_general(s: Sample, t: TreatmentTransform) -> Estimate:
    """Regress ``R^Y/n`` on ``h_n(W)`` (and covariates if present)."""
    h = t.apply(s.w)
    kappa = 1.0
    if t.normalize:
        kappa = normalization_kappa(s.w, t)
        h = kappa * h
    if np.ptp(h) == 0:
        raise NoVariation("transformed treatment is constant")
    r = _normalized_ranks(s.y)
    cols = [np.ones(s.n), h]
    if s.n_covariates:
        cols.append(s.x)
    coef, cond = _lstsq(np.column_stack(cols), r)
    estimand = "convex average of pairwise rank-ATEs" if t.normalize else "beta_h* (b-weighted pairwise rank-ATEs)"
    return Estimate(
        coef[1],
        f"rank_ols_general[{t.kind}]",
        estimand,
        s.n,
        {"kappa": kappa, "transform": t.kind, "normalize": t.normalize, "condition_number": cond},
    )


@dataclass
class ConfoundedWeights:
    """Linear projection of the propensity and the implied unit weights.

    ``weights = pi(X) * (1 - pi_tilde(X))``; negative weights occur when the
    projection leaves [0, 1].
    """

    omega_star: np.ndarray
    weights: np.ndarray
    pi_tilde: np.ndarray
    diagnostics: dict = field(default_factory=dict)

    @property
    def has_negative(self) -> bool:
        return bool(np.any(self.weights < 0))


def confounded_weights(x, propensity: Sequence[float], c: float = 0.01) -> ConfoundedWeights:
    """Sample analogue of the propensity projection used for confounded designs.

    ``x`` is the full regressor matrix including any constant column.
    """
    x = np.asarray(x, dtype=float)
    if x.ndim == 1:
        x = x[:, None]
    pi = np.asarray(propensity, dtype=float)
    if not 0 < c < 0.5:
        raise InvalidInput("overlap constant must lie in (0, 1/2)")
    if np.any(pi < c) or np.any(pi > 1 - c):
        raise OverlapViolation(f"propensity outside [{c}, {1 - c}]")
    omega, _ = _lstsq(x, pi)
    pi_tilde = x @ omega
    weights = pi * (1.0 - pi_tilde)
    out = ConfoundedWeights(omega, weights, pi_tilde)
    out.diagnostics["projection_outside_unit_interval"] = bool(np.any((pi_tilde < 0) | (pi_tilde > 1)))
    out.diagnostics["negative_weights"] = out.has_negative
    return out
