"""Continuous outcome laws used by the oracles, and their exact rank-ATE.

A :class:`Law` is ``f(loc + scale * U)`` for a standard base noise ``U`` and a
named strictly increasing map ``f``. A :class:`MixtureLaw` is a finite convex
combination. Because the rank-ATE is linear in each argument, ``tau_r`` of two
mixtures reduces to component pairs; Gaussian pairs with the identity map use
the closed form ``Phi(dmu / sqrt(s1^2 + s0^2)) - 1/2`` and everything else is
integrated with adaptive quadrature over the base noise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np
from scipy import integrate, stats

from ..errors import InvalidSpec

BASES = {
    "gaussian": stats.norm(),
    "laplace": stats.laplace(scale=1 / math.sqrt(2.0)),  # unit variance
    "exponential": stats.expon(),
}


def _cube(u):
    return np.power(u, 3)


def _log(y):
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(np.asarray(y) > 0, np.log(np.maximum(y, 1e-300)), -np.inf)


def draw_noise(rng: np.random.Generator, noise: str, size) -> np.ndarray:
    """Standardized draws matching ``BASES[noise]``."""
    if noise == "gaussian":
        return rng.standard_normal(size)
    if noise == "laplace":
        return rng.laplace(0.0, 1 / math.sqrt(2.0), size)
    if noise == "exponential":
        return rng.standard_exponential(size)
    raise InvalidSpec(f"unknown noise family {noise!r}")


MAPS = {
    "identity": (lambda u: u, lambda y: y),
    "cube": (_cube, np.cbrt),
    "exp": (np.exp, _log),
}

QUAD_TOL = 1e-11


@dataclass(frozen=True)
class Law:
    loc: float = 0.0
    scale: float = 1.0
    noise: str = "gaussian"
    fmap: str = "identity"

    def __post_init__(self):
        if self.noise not in BASES:
            raise InvalidSpec(f"unknown noise family {self.noise!r}")
        if self.fmap not in MAPS:
            raise InvalidSpec(f"unknown monotone map {self.fmap!r}")
        if not self.scale > 0:
            raise InvalidSpec("scale must be positive")

    @property
    def base(self):
        return BASES[self.noise]

    def cdf(self, y):
        inv = MAPS[self.fmap][1]
        return self.base.cdf((inv(np.asarray(y, dtype=float)) - self.loc) / self.scale)

    def transform(self, u):
        return MAPS[self.fmap][0](self.loc + self.scale * np.asarray(u, dtype=float))

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        return self.transform(draw_noise(rng, self.noise, size))

    @property
    def is_plain_gaussian(self) -> bool:
        return self.noise == "gaussian" and self.fmap == "identity"


@dataclass(frozen=True)
class MixtureLaw:
    weights: tuple
    components: tuple

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        if len(self.weights) != len(self.components) or np.any(w < 0) or abs(w.sum() - 1) > 1e-12:
            raise InvalidSpec("mixture weights must be non-negative and sum to 1")

    def cdf(self, y):
        y = np.asarray(y, dtype=float)
        return sum(w * c.cdf(y) for w, c in zip(self.weights, self.components) if w > 0)

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        comp = rng.choice(len(self.weights), size=size, p=np.asarray(self.weights, dtype=float))
        out = np.empty(size)
        for k, c in enumerate(self.components):
            idx = np.flatnonzero(comp == k)
            if idx.size:
                out[idx] = c.sample(rng, idx.size)
        return out


AnyLaw = Union[Law, MixtureLaw]


def mix(pairs: Sequence[tuple[float, AnyLaw]]) -> MixtureLaw:
    """Flatten nested mixtures and drop zero-weight components."""
    weights, comps = [], []
    for w, law in pairs:
        if w <= 0:
            continue
        if isinstance(law, MixtureLaw):
            for w2, c in zip(law.weights, law.components):
                if w2 > 0:
                    weights.append(w * w2)
                    comps.append(c)
        else:
            weights.append(w)
            comps.append(law)
    total = sum(weights)
    return MixtureLaw(tuple(w / total for w in weights), tuple(comps))


def _components(law: AnyLaw):
    if isinstance(law, MixtureLaw):
        return list(zip(law.weights, law.components))
    return [(1.0, law)]


def _pair_prob(l1: Law, l0: Law) -> tuple[float, bool]:
    """P(Z1 >= Z0) for independent draws, and whether it was closed form."""
    if l1.is_plain_gaussian and l0.is_plain_gaussian:
        return float(stats.norm.cdf((l1.loc - l0.loc) / math.hypot(l1.scale, l0.scale))), True
    base = l1.base

    def integrand(u):
        return float(l0.cdf(l1.transform(u))) * float(base.pdf(u))

    lo, hi = base.ppf(1e-15), base.isf(1e-15)
    points = [float(base.median())]
    val, _ = integrate.quad(integrand, lo, hi, points=points, limit=400, epsabs=QUAD_TOL, epsrel=QUAD_TOL)
    return float(val), False


def tau_r(l1: AnyLaw, l0: AnyLaw) -> float:
    return tau_r_with_method(l1, l0)[0]


def tau_r_with_method(l1: AnyLaw, l0: AnyLaw) -> tuple[float, str]:
    total = 0.0
    closed = True
    for w1, c1 in _components(l1):
        for w0, c0 in _components(l0):
            p, exact = _pair_prob(c1, c0)
            total += w1 * w0 * p
            closed = closed and exact
    return total - 0.5, "closed_form" if closed else "numeric_integration"
