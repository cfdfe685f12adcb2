"""Synthetic data-generating processes and their independently computed estimands.

Random numbers come from NumPy's counter-based Philox generator keyed by a
``SeedSequence(seed, spawn_key=stream)``; the same ``(seed, stream)`` always
yields the same draws, independent of how many other streams were used.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Optional

import numpy as np
from scipy import integrate, stats

from ..data import PanelSample, Sample
from ..errors import InvalidSpec
from ..ols import TreatmentTransform
from .laws import Law, MixtureLaw, mix, tau_r, tau_r_with_method

KINDS = (
    "randomized_binary",
    "confounded_binary",
    "general_treatment",
    "iv_types",
    "panel_cic",
    "rdd_sharp",
    "coupled_potentials",
)

CLOSED_FORM_PRECISION = 1e-9
QUADRATURE_PRECISION = 1e-8


def make_rng(seed: int, *stream: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=tuple(stream))))


@dataclass(frozen=True)
class DgpSpec:
    name: str
    kind: str
    params: dict = field(default_factory=dict)
    seed: int = 0

    def model(self) -> "Model":
        if self.kind not in MODELS:
            raise InvalidSpec(f"unknown DGP kind {self.kind!r}")
        try:
            return MODELS[self.kind](**self.params)
        except TypeError as exc:
            raise InvalidSpec(f"bad parameters for {self.kind}: {exc}") from None

    def with_params(self, **updates) -> "DgpSpec":
        return DgpSpec(self.name, self.kind, {**self.params, **updates}, self.seed)


@dataclass
class OracleValue:
    estimand: str
    value: float
    method: str
    precision: float

    def as_dict(self) -> dict:
        return {"estimand": self.estimand, "value": self.value, "method": self.method, "precision": self.precision}


def _closed(estimand: str, value: float) -> OracleValue:
    return OracleValue(estimand, float(value), "closed_form", CLOSED_FORM_PRECISION)


def _tau_oracle(estimand: str, value_method: tuple[float, str]) -> OracleValue:
    value, method = value_method
    prec = CLOSED_FORM_PRECISION if method == "closed_form" else QUADRATURE_PRECISION
    return OracleValue(estimand, float(value), method, prec)


class Model:
    estimands: tuple = ()

    def draw(self, rng: np.random.Generator, n: int):
        """Return ``(sample, potentials)``."""
        raise NotImplementedError

    def oracle(self, estimand: str, **options) -> OracleValue:
        raise NotImplementedError

    def _unknown(self, estimand: str):
        raise InvalidSpec(f"estimand {estimand!r} is not defined for {type(self).__name__}; "
                          f"choose from {self.estimands}")


def _bernoulli(rng, p, n):
    return (rng.random(n) < p).astype(float)


class RandomizedBinary(Model):
    """Y(w) = mu_w + X'gamma_w + residual noise, W ~ Bernoulli(pi) independent of everything.

    ``sigma_w`` is the total standard deviation of Y(w); covariates are iid
    N(0, 1), so with Gaussian noise the margins are exactly N(mu_w, sigma_w^2)
    whatever the covariate loadings.
    """

    estimands = ("rank_ate",)

    def __init__(self, pi=0.5, mu1=1.0, mu0=0.0, sigma1=1.0, sigma0=1.0, noise="gaussian",
                 gamma1=(), gamma0=()):
        self.pi, self.noise = float(pi), noise
        self.mu = (float(mu0), float(mu1))
        self.sigma = (float(sigma0), float(sigma1))
        g1 = np.asarray(gamma1, dtype=float)
        g0 = np.asarray(gamma0, dtype=float) if len(gamma0) else np.zeros_like(g1)
        if g1.shape != g0.shape:
            raise InvalidSpec("gamma1 and gamma0 must have the same length")
        if not 0 < self.pi < 1:
            raise InvalidSpec("pi must lie in (0, 1)")
        self.gamma = (g0, g1)
        self.d = g1.size
        if self.d and noise != "gaussian":
            raise InvalidSpec("covariates are only supported with gaussian noise")
        self.resid = []
        for g, s in zip(self.gamma, self.sigma):
            left = s * s - float(g @ g)
            if left <= 0:
                raise InvalidSpec("covariate loadings exceed the total outcome variance")
            self.resid.append(math.sqrt(left))
        self.laws = tuple(Law(self.mu[w], self.sigma[w], noise) for w in (0, 1))

    def draw(self, rng, n):
        from .laws import draw_noise

        x = rng.standard_normal((n, self.d)) if self.d else None
        pot = []
        for w in (0, 1):
            y = self.mu[w] + self.resid[w] * draw_noise(rng, self.noise, n)
            if self.d:
                y = y + x @ self.gamma[w]
            pot.append(y)
        w = _bernoulli(rng, self.pi, n)
        y = np.where(w == 1, pot[1], pot[0])
        return Sample(y=y, w=w, x=x), {"y0": pot[0], "y1": pot[1]}

    def oracle(self, estimand, **options):
        if estimand == "rank_ate":
            return _tau_oracle(estimand, tau_r_with_method(self.laws[1], self.laws[0]))
        self._unknown(estimand)


class ConfoundedBinary(Model):
    """Discrete covariate with level-specific propensity and outcome means.

    The regression uses a saturated set of level dummies, so the propensity is
    exactly linear in the regressors.
    """

    estimands = ("weighted_conditional_rank_ate", "ols_projection_limit", "rank_ate")

    def __init__(self, px=(0.5, 0.5), pi_x=(0.3, 0.7), mu1_x=(1.0, 1.5), mu0_x=(0.0, 0.5), sigma=1.0):
        self.px = np.asarray(px, dtype=float)
        self.pi_x = np.asarray(pi_x, dtype=float)
        self.mu1 = np.asarray(mu1_x, dtype=float)
        self.mu0 = np.asarray(mu0_x, dtype=float)
        k = self.px.size
        if not (self.pi_x.size == self.mu1.size == self.mu0.size == k) or abs(self.px.sum() - 1) > 1e-12:
            raise InvalidSpec("level arrays must align and px must sum to 1")
        if np.any(self.pi_x <= 0) or np.any(self.pi_x >= 1):
            raise InvalidSpec("propensities must lie strictly inside (0, 1)")
        self.sigma = float(sigma)
        self.k = k

    def design(self, level: np.ndarray) -> np.ndarray:
        """Level dummies for levels 1..k-1 (the intercept is added by the estimator)."""
        return (level[:, None] == np.arange(1, self.k)[None, :]).astype(float)

    def law(self, w: int, level: int) -> Law:
        return Law((self.mu1 if w else self.mu0)[level], self.sigma)

    def draw(self, rng, n):
        level = rng.choice(self.k, size=n, p=self.px)
        y1 = self.mu1[level] + self.sigma * rng.standard_normal(n)
        y0 = self.mu0[level] + self.sigma * rng.standard_normal(n)
        w = (rng.random(n) < self.pi_x[level]).astype(float)
        y = np.where(w == 1, y1, y0)
        pot = {"y0": y0, "y1": y1, "level": level, "propensity": self.pi_x[level]}
        return Sample(y=y, w=w, x=self.design(level)), pot

    def _projection(self) -> np.ndarray:
        lv = np.arange(self.k)
        design = np.column_stack([np.ones(self.k), self.design(lv)])
        sw = np.sqrt(self.px)
        omega, *_ = np.linalg.lstsq(design * sw[:, None], self.pi_x * sw, rcond=None)
        return design @ omega

    def outcome_law(self) -> MixtureLaw:
        pairs = []
        for x in range(self.k):
            pairs.append((self.px[x] * self.pi_x[x], self.law(1, x)))
            pairs.append((self.px[x] * (1 - self.pi_x[x]), self.law(0, x)))
        return mix(pairs)

    def oracle(self, estimand, **options):
        pt = self._projection()
        if estimand == "weighted_conditional_rank_ate":
            wts = self.px * self.pi_x * (1 - pt)
            taus = np.array([tau_r(self.law(1, x), self.law(0, x)) for x in range(self.k)])
            return _closed(estimand, float(wts @ taus / wts.sum()))
        if estimand == "ols_projection_limit":
            # E[(W - pi~) F_Y(Y)] / E[(W - pi~)^2], level by level
            fy = self.outcome_law()
            e1 = np.array([tau_r(self.law(1, x), fy) + 0.5 for x in range(self.k)])
            e0 = np.array([tau_r(self.law(0, x), fy) + 0.5 for x in range(self.k)])
            num = self.px @ (self.pi_x * (1 - pt) * e1 - (1 - self.pi_x) * pt * e0)
            den = self.px @ (self.pi_x * (1 - pt) ** 2 + (1 - self.pi_x) * pt ** 2)
            return _closed(estimand, float(num / den))
        if estimand == "rank_ate":
            f1 = mix([(self.px[x], self.law(1, x)) for x in range(self.k)])
            f0 = mix([(self.px[x], self.law(0, x)) for x in range(self.k)])
            return _closed(estimand, tau_r(f1, f0))
        self._unknown(estimand)


def _gauss_legendre(a: float, b: float, m: int) -> tuple[np.ndarray, np.ndarray]:
    x, w = np.polynomial.legendre.leggauss(m)
    return 0.5 * (b - a) * x + 0.5 * (a + b), 0.5 * (b - a) * w


def _segments(breaks, m: int) -> tuple[np.ndarray, np.ndarray]:
    edges = sorted({0.0, 1.0, *[float(b) for b in breaks if 0 < b < 1]})
    nodes, weights = [], []
    for a, b in zip(edges[:-1], edges[1:]):
        x, w = _gauss_legendre(a, b, m)
        nodes.append(x)
        weights.append(w)
    return np.concatenate(nodes), np.concatenate(weights)


class GeneralTreatment(Model):
    """Multi-valued or continuous dose with Y(w) = mu(w) + sigma * noise.

    Discrete doses: ``levels``/``probs``/``mu_levels``. Continuous doses:
    W ~ Uniform(0, 1) and mu(w) = ``mu_slope`` * w.
    """

    estimands = ("beta_h", "median_split_rank_ate")

    def __init__(self, levels=None, probs=None, mu_levels=None, mu_slope=1.0, sigma=1.0):
        self.discrete = levels is not None
        self.sigma = float(sigma)
        if self.discrete:
            self.levels = np.asarray(levels, dtype=float)
            self.probs = np.asarray(probs, dtype=float)
            self.mu_levels = np.asarray(mu_levels, dtype=float)
            if not (self.levels.size == self.probs.size == self.mu_levels.size):
                raise InvalidSpec("levels, probs and mu_levels must align")
            if np.any(np.diff(self.levels) <= 0) or abs(self.probs.sum() - 1) > 1e-12:
                raise InvalidSpec("levels must increase and probs sum to 1")
        else:
            self.mu_slope = float(mu_slope)

    def draw(self, rng, n):
        if self.discrete:
            idx = rng.choice(self.levels.size, size=n, p=self.probs)
            w = self.levels[idx]
            mu = self.mu_levels[idx]
        else:
            w = rng.random(n)
            mu = self.mu_slope * w
        y = mu + self.sigma * rng.standard_normal(n)
        return Sample(y=y, w=w), {"mu": mu}

    def _pair_tau(self, mu_a, mu_b):
        return stats.norm.cdf((mu_a - mu_b) / (self.sigma * math.sqrt(2.0))) - 0.5

    def _h_limit_discrete(self, t: TreatmentTransform) -> np.ndarray:
        cdf = np.cumsum(self.probs)
        if t.kind == "identity":
            return self.levels.copy()
        if t.kind == "custom":
            return np.array([float(t.table[v]) for v in self.levels.tolist()])
        if t.kind == "rank":
            return cdf
        if t.kind == "dichotomize_at":
            return (cdf > t.threshold).astype(float)
        return (cdf[:, None] > np.asarray(t.breakpoints)[None, :]).sum(axis=1).astype(float)

    def _h_limit_continuous(self, t: TreatmentTransform, p: np.ndarray) -> np.ndarray:
        if t.kind in ("identity", "rank"):
            return p.copy()  # W ~ U(0,1): quantile and rank coincide
        if t.kind == "dichotomize_at":
            return (p > t.threshold).astype(float)
        if t.kind == "step":
            return (p[:, None] > np.asarray(t.breakpoints)[None, :]).sum(axis=1).astype(float)
        raise InvalidSpec("custom tables need discrete doses")

    def oracle(self, estimand, transform: Optional[TreatmentTransform] = None, **options):
        if estimand == "beta_h":
            t = transform or TreatmentTransform()
            if self.discrete:
                h = self._h_limit_discrete(t)
                hi, lo = np.triu_indices(self.levels.size, k=1)[::-1]  # pairs with level hi > lo
                pp = self.probs[hi] * self.probs[lo]
                b = h[hi] - h[lo]
                tau = self._pair_tau(self.mu_levels[hi], self.mu_levels[lo])
                num, den_sq, den_lin = pp @ (b * tau), pp @ (b * b), pp @ b
                method = "closed_form"
            else:
                breaks = [t.threshold] if t.kind == "dichotomize_at" else list(t.breakpoints)
                p, wq = _segments(breaks, 200)
                h = self._h_limit_continuous(t, p)
                dh = h[:, None] - h[None, :]
                ww = wq[:, None] * wq[None, :]
                tau = self._pair_tau(self.mu_slope * p[:, None], self.mu_slope * p[None, :])
                # integrands are symmetric in (p, p~), so the half-square equals half the square
                num = 0.5 * np.sum(ww * dh * tau)
                den_sq = 0.5 * np.sum(ww * dh * dh)
                den_lin = 0.5 * np.sum(ww * np.abs(dh))
                method = "numeric_integration"
            if not den_sq > 0:
                raise InvalidSpec("transform limit is constant")
            value = num / den_lin if t.normalize else num / den_sq
            prec = CLOSED_FORM_PRECISION if method == "closed_form" else QUADRATURE_PRECISION
            return OracleValue(estimand, float(value), method, prec)
        if estimand == "median_split_rank_ate":
            if self.discrete:
                raise InvalidSpec("median split oracle needs a continuous dose")
            p_hi, w_hi = _gauss_legendre(0.5, 1.0, 200)
            p_lo, w_lo = _gauss_legendre(0.0, 0.5, 200)
            tau = self._pair_tau(self.mu_slope * p_hi[:, None], self.mu_slope * p_lo[None, :])
            return OracleValue(estimand, float(4 * w_hi @ tau @ w_lo), "numeric_integration", QUADRATURE_PRECISION)
        self._unknown(estimand)


def _normal_pair(spec) -> Law:
    mu, sd = spec
    return Law(float(mu), float(sd))


class IVTypes(Model):
    """Binary instrument with always-takers, never-takers and compliers.

    Type-specific outcome laws are Gaussian ``(mean, sd)`` pairs. Monotonicity
    holds by construction (no defiers).
    """

    estimands = ("rank_late", "tsls_all", "tsls_treated", "tsls_control")

    def __init__(self, shares=(0.25, 0.25, 0.5), pz=0.5, y1_a=(0.0, 1.0), y0_n=(0.0, 1.0),
                 y1_c=(0.5, 1.0), y0_c=(0.0, 1.0), y0_a=None, y1_n=None):
        self.shares = np.asarray(shares, dtype=float)
        if self.shares.size != 3 or np.any(self.shares < 0) or abs(self.shares.sum() - 1) > 1e-12:
            raise InvalidSpec("shares (always, never, complier) must be non-negative and sum to 1")
        if not self.shares[2] > 0:
            raise InvalidSpec("complier share must be positive")
        self.pz = float(pz)
        self.y1_a, self.y0_n = _normal_pair(y1_a), _normal_pair(y0_n)
        self.y1_c, self.y0_c = _normal_pair(y1_c), _normal_pair(y0_c)
        self.y0_a = _normal_pair(y0_a) if y0_a is not None else self.y1_a
        self.y1_n = _normal_pair(y1_n) if y1_n is not None else self.y0_n

    def outcome_law(self, w: Optional[int] = None):
        pa, pn, pc = self.shares
        pz = self.pz
        treated = [(pa, self.y1_a), (pc * pz, self.y1_c)]
        control = [(pn, self.y0_n), (pc * (1 - pz), self.y0_c)]
        if w == 1:
            return mix(treated)
        if w == 0:
            return mix(control)
        return mix(treated + control)

    def draw(self, rng, n):
        g = rng.choice(3, size=n, p=self.shares)  # 0 always, 1 never, 2 complier
        z = _bernoulli(rng, self.pz, n)
        w = np.where(g == 0, 1.0, np.where(g == 1, 0.0, z))
        y1 = np.empty(n)
        y0 = np.empty(n)
        for code, (l1, l0) in enumerate([(self.y1_a, self.y0_a), (self.y1_n, self.y0_n), (self.y1_c, self.y0_c)]):
            idx = np.flatnonzero(g == code)
            y1[idx] = l1.sample(rng, idx.size)
            y0[idx] = l0.sample(rng, idx.size)
        y = np.where(w == 1, y1, y0)
        return Sample(y=y, w=w, z=z), {"y1": y1, "y0": y0, "type": g}

    def oracle(self, estimand, **options):
        if estimand == "rank_late":
            return _closed(estimand, tau_r(self.y1_c, self.y0_c))
        refs = {"tsls_all": None, "tsls_treated": 1, "tsls_control": 0}
        if estimand in refs:
            ref = self.outcome_law(refs[estimand])
            return _closed(estimand, tau_r(self.y1_c, ref) - tau_r(self.y0_c, ref))
        self._unknown(estimand)


class PanelCiC(Model):
    """Two-period panel with Y_t(0) = f_t(U) and group-shifted latent U.

    ``U | W=w ~ N(mu_u[w], 1)``; untreated outcomes are ``f_0(U)`` and
    ``f_1(U + trend_shift * W)``; the treated post-period outcome is
    ``f_1(U + trend_shift * W + delta)``. ``trend_shift = 0`` satisfies the
    changes-in-changes model; non-zero values break it.
    """

    estimands = ("rank_att", "did_limit", "rank_pt_lhs", "rank_pt_rhs", "alt_pt_lhs", "alt_pt_rhs")

    def __init__(self, p_treat=0.5, mu_u1=1.5, mu_u0=0.0, f0="identity", f1="cube", delta=1.0, trend_shift=0.0):
        self.p = float(p_treat)
        self.mu_u = (float(mu_u0), float(mu_u1))
        self.f = (f0, f1)
        self.delta = float(delta)
        self.kappa = float(trend_shift)
        Law(fmap=f0), Law(fmap=f1)  # validates map names

    def law(self, t: int, w_potential: int, group: int) -> Law:
        """Law of Y_t(w_potential) given W = group."""
        loc = self.mu_u[group]
        if t == 1:
            loc += self.kappa * group + (self.delta if w_potential == 1 else 0.0)
        return Law(loc, 1.0, "gaussian", self.f[t])

    def draw(self, rng, n):
        w = _bernoulli(rng, self.p, n)
        u = np.where(w == 1, self.mu_u[1], self.mu_u[0]) + rng.standard_normal(n)
        f0, f1 = (Law(fmap=m).transform for m in self.f)
        y0 = f0(u)
        y1_0 = f1(u + self.kappa * w)
        y1_1 = f1(u + self.kappa * w + self.delta)
        y1 = np.where(w == 1, y1_1, y1_0)
        return PanelSample(y0=y0, y1=y1, w=w), {"y1_0": y1_0, "y1_1": y1_1, "u": u}

    def oracle(self, estimand, **options):
        L = self.law
        if estimand == "rank_att":
            return _tau_oracle(estimand, tau_r_with_method(L(1, 1, 1), L(1, 0, 1)))
        if estimand == "did_limit":
            # observable form: post-period gap minus pre-period gap; equals the
            # counterfactual form whenever the rank parallel trend holds
            a = tau_r_with_method(L(1, 1, 1), L(1, 0, 0))
            b = tau_r_with_method(L(0, 0, 1), L(0, 0, 0))
            method = "closed_form" if a[1] == b[1] == "closed_form" else "numeric_integration"
            return _tau_oracle(estimand, (a[0] - b[0], method))
        if estimand == "rank_pt_lhs":
            return _tau_oracle(estimand, tau_r_with_method(L(1, 0, 1), L(1, 0, 0)))
        if estimand == "rank_pt_rhs":
            return _tau_oracle(estimand, tau_r_with_method(L(0, 0, 1), L(0, 0, 0)))
        if estimand == "alt_pt_lhs":
            return _tau_oracle(estimand, tau_r_with_method(L(1, 0, 1), L(0, 0, 1)))
        if estimand == "alt_pt_rhs":
            return _tau_oracle(estimand, tau_r_with_method(L(1, 0, 0), L(0, 0, 0)))
        self._unknown(estimand)


class RddSharp(Model):
    """X ~ Uniform(x_low, x_high), W = 1{X >= cutoff}, Y(w) | X=x ~ N(a_w + b_w x, s_w^2)."""

    estimands = ("cutoff_rank_ate", "rdd_all", "rdd_treated", "rdd_control")

    def __init__(self, x_low=-1.0, x_high=1.0, cutoff=0.0, a1=0.5, b1=1.0, s1=0.5, a0=0.0, b0=1.0, s0=0.5):
        self.lo, self.hi, self.cutoff = float(x_low), float(x_high), float(cutoff)
        if not self.lo < self.cutoff < self.hi:
            raise InvalidSpec("cutoff must lie inside the running-variable support")
        self.a = (float(a0), float(a1))
        self.b = (float(b0), float(b1))
        self.s = (float(s0), float(s1))

    def mean(self, w, x):
        return self.a[w] + self.b[w] * np.asarray(x, dtype=float)

    def draw(self, rng, n):
        x = self.lo + (self.hi - self.lo) * rng.random(n)
        y1 = self.mean(1, x) + self.s[1] * rng.standard_normal(n)
        y0 = self.mean(0, x) + self.s[0] * rng.standard_normal(n)
        w = (x >= self.cutoff).astype(float)
        y = np.where(w == 1, y1, y0)
        return Sample(y=y, w=w, run=x), {"y1": y1, "y0": y0}

    def cutoff_law(self, w: int) -> Law:
        return Law(float(self.mean(w, self.cutoff)), self.s[w])

    def _prob_ge_observed(self, law: Law, side: Optional[int]) -> float:
        """P(Z >= Y) for Z ~ law independent of an observed Y (optionally restricted to one side)."""
        total = 0.0
        mass = 0.0
        for w, (a, b) in ((0, (self.lo, self.cutoff)), (1, (self.cutoff, self.hi))):
            if side is not None and side != w:
                continue
            sd = math.hypot(law.scale, self.s[w])
            val, _ = integrate.quad(lambda x: stats.norm.cdf((law.loc - self.mean(w, x)) / sd), a, b,
                                    epsabs=1e-12, epsrel=1e-12, limit=200)
            total += val
            mass += b - a
        return total / mass

    def oracle(self, estimand, **options):
        f1, f0 = self.cutoff_law(1), self.cutoff_law(0)
        if estimand == "cutoff_rank_ate":
            return _closed(estimand, tau_r(f1, f0))
        sides = {"rdd_all": None, "rdd_treated": 1, "rdd_control": 0}
        if estimand in sides:
            side = sides[estimand]
            value = self._prob_ge_observed(f1, side) - self._prob_ge_observed(f0, side)
            return OracleValue(estimand, float(value), "numeric_integration", QUADRATURE_PRECISION)
        self._unknown(estimand)


COUPLINGS = ("comonotone", "antimonotone", "independent", "hand")


class CoupledPotentials(Model):
    """Explicit joint law of (Y(1), Y(0)).

    Margins are :class:`Law` parameter dicts. ``coupling="hand"`` draws
    ``Y(0)`` from ``law0`` and sets ``Y(1) = Y(0) + big`` with probability
    ``q`` and ``Y(0) - small`` otherwise.
    """

    estimands = ("rank_ate", "tau_star")
    GRID = 2_000_000

    def __init__(self, law1=None, law0=None, coupling="comonotone", q=0.1, big=5.0, small=0.1, pi=0.5):
        if coupling not in COUPLINGS:
            raise InvalidSpec(f"coupling must be one of {COUPLINGS}")
        self.coupling = coupling
        self.law0 = Law(**(law0 or {}))
        self.q, self.big, self.small, self.pi = float(q), float(big), float(small), float(pi)
        if coupling == "hand":
            if self.law0.fmap != "identity":
                raise InvalidSpec("hand coupling shifts an identity-map margin")
            shifted = [Law(self.law0.loc + d, self.law0.scale, self.law0.noise) for d in (self.big, -self.small)]
            self.law1 = mix([(self.q, shifted[0]), (1 - self.q, shifted[1])])
        else:
            self.law1 = Law(**(law1 or {"loc": 1.0}))

    def draw(self, rng, n):
        if self.coupling == "hand":
            y0 = self.law0.sample(rng, n)
            up = rng.random(n) < self.q
            y1 = np.where(up, y0 + self.big, y0 - self.small)
        else:
            u = rng.random(n)
            u0 = {"comonotone": u, "antimonotone": 1.0 - u, "independent": rng.random(n)}[self.coupling]
            y1 = self.law1.transform(self.law1.base.ppf(u))
            y0 = self.law0.transform(self.law0.base.ppf(u0))
        w = _bernoulli(rng, self.pi, n)
        return Sample(y=np.where(w == 1, y1, y0), w=w), {"y1": y1, "y0": y0}

    def oracle(self, estimand, **options):
        if estimand == "rank_ate":
            return _tau_oracle(estimand, tau_r_with_method(self.law1, self.law0))
        if estimand == "tau_star":
            if self.coupling == "independent":
                return _tau_oracle(estimand, tau_r_with_method(self.law1, self.law0))
            if self.coupling == "hand":
                prob = self.q * (self.big >= 0) + (1 - self.q) * (-self.small >= 0)
                return _closed(estimand, prob - 0.5)
            u = (np.arange(self.GRID) + 0.5) / self.GRID
            u0 = u if self.coupling == "comonotone" else 1.0 - u
            y1 = self.law1.transform(self.law1.base.ppf(u))
            y0 = self.law0.transform(self.law0.base.ppf(u0))
            return OracleValue(estimand, float(np.mean(y1 >= y0) - 0.5), "numeric_integration", 2.0 / self.GRID)
        self._unknown(estimand)


MODELS = {
    "randomized_binary": RandomizedBinary,
    "confounded_binary": ConfoundedBinary,
    "general_treatment": GeneralTreatment,
    "iv_types": IVTypes,
    "panel_cic": PanelCiC,
    "rdd_sharp": RddSharp,
    "coupled_potentials": CoupledPotentials,
}


def generate_full(spec: DgpSpec, n: int, stream: tuple = ()):
    """Sample plus the full potential-outcome table (for oracle checks only)."""
    if n < 2:
        raise InvalidSpec("n must be at least 2")
    return spec.model().draw(make_rng(spec.seed, *stream), int(n))


def generate(spec: DgpSpec, n: int, stream: tuple = ()):
    """Observed data only; deterministic in ``(spec.seed, stream)``."""
    return generate_full(spec, n, stream)[0]


def oracle_estimand(spec: DgpSpec, estimand: str, **options) -> OracleValue:
    return spec.model().oracle(estimand, **options)


def pair_u_statistic(spec: DgpSpec, law1, law0, draws: int = 1_000_000, stream: tuple = (999,)) -> OracleValue:
    """Monte Carlo rank-ATE from ``draws`` independent draws of each law.

    Precision is three standard errors of the two-sample U-statistic.
    """
    from ..ranks import count_le

    rng = make_rng(spec.seed, *stream)
    a = law1.sample(rng, draws)
    b = law0.sample(rng, draws)
    f0_at_a = count_le(b, a) / draws
    value = f0_at_a.mean() - 0.5
    f1_at_b = count_le(a, b) / draws  # P(Z1 <= b)
    var = f0_at_a.var() / draws + (1 - f1_at_b).var() / draws
    return OracleValue("rank_ate", float(value), "pair_u_statistic", float(3 * math.sqrt(var)))
