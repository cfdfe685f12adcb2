"""Ranks, step CDFs, the rank-ATE functional and its algebra.

Conventions used throughout the package:

* Ranks follow ``R_i = #{j : Y_j <= Y_i}``; tied values share the *maximum*
  rank. No averaging.
* The rank-ATE is ``P(Z1 >= Z0) - 1/2`` for independent draws, so a tied pair
  counts fully (weight 1, not 1/2).
* Quantiles use the left-continuous generalized inverse
  ``Q(u) = inf{y : F(y) >= u}``.
* "Exact" comparisons of rational quantities are made at 1e-12 absolute.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterable, Sequence, Union

import numpy as np
from scipy.optimize import isotonic_regression

from .errors import DegenerateDistribution, InvalidInput

EXACT_TOL = 1e-12

ArrayLike = Union[Sequence[float], np.ndarray]


def _as_1d(values: ArrayLike, name: str = "values") -> np.ndarray:
    arr = np.asarray(values, dtype=float)
    if arr.ndim != 1:
        arr = arr.ravel()
    if arr.size == 0:
        raise InvalidInput(f"{name} must be non-empty")
    if not np.all(np.isfinite(arr)):
        raise InvalidInput(f"{name} must be finite")
    return arr


@dataclass(frozen=True)
class StepCDF:
    """Right-continuous step distribution function.

    ``support`` is strictly increasing and ``cum[k]`` is the value of the CDF
    on ``[support[k], support[k+1])``. The CDF is 0 below ``support[0]``.
    """

    support: np.ndarray
    cum: np.ndarray

    def __post_init__(self):
        support = np.asarray(self.support, dtype=float)
        cum = np.asarray(self.cum, dtype=float)
        if support.ndim != 1 or support.shape != cum.shape or support.size == 0:
            raise InvalidInput("support and cum must be non-empty 1-d arrays of equal length")
        if np.any(np.diff(support) <= 0):
            raise InvalidInput("support must be strictly increasing")
        if np.any(np.diff(cum) < -EXACT_TOL) or cum[0] < -EXACT_TOL:
            raise InvalidInput("cum must be non-decreasing and non-negative")
        if abs(cum[-1] - 1.0) > EXACT_TOL:
            raise InvalidInput(f"cum must end at 1, got {cum[-1]!r}")
        support.setflags(write=False)
        cum.setflags(write=False)
        object.__setattr__(self, "support", support)
        object.__setattr__(self, "cum", cum)

    @classmethod
    def from_atoms(cls, atoms: ArrayLike, weights: ArrayLike | None = None) -> "StepCDF":
        """Distribution putting ``weights`` (default: equal) on ``atoms``."""
        atoms = _as_1d(atoms, "atoms")
        if weights is None:
            weights = np.ones_like(atoms)
        weights = np.asarray(weights, dtype=float)
        if weights.shape != atoms.shape or np.any(weights < 0) or weights.sum() <= 0:
            raise InvalidInput("weights must be non-negative, same shape as atoms, positive total")
        support, inverse = np.unique(atoms, return_inverse=True)
        mass = np.bincount(inverse, weights=weights, minlength=support.size)
        cum = np.cumsum(mass) / mass.sum()
        cum[-1] = 1.0
        return cls(support, cum)

    @property
    def masses(self) -> np.ndarray:
        return np.diff(self.cum, prepend=0.0)

    def evaluate(self, y):
        """F(y): 0 below the support, ``cum[k]`` for the largest ``support[k] <= y``."""
        idx = np.searchsorted(self.support, y, side="right") - 1
        out = np.where(idx >= 0, self.cum[np.clip(idx, 0, None)], 0.0)
        return float(out) if np.ndim(out) == 0 else out

    __call__ = evaluate

    def left_limit(self, y):
        """F(y-) = P(Z < y)."""
        idx = np.searchsorted(self.support, y, side="left") - 1
        out = np.where(idx >= 0, self.cum[np.clip(idx, 0, None)], 0.0)
        return float(out) if np.ndim(out) == 0 else out

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        u = rng.random(size)
        return generalized_inverse(self, u)


@dataclass(frozen=True)
class RankVector:
    ranks: np.ndarray
    n: int

    @property
    def normalized(self) -> np.ndarray:
        return self.ranks / self.n


@dataclass(frozen=True)
class Jitter:
    """Random tie-breaking: add iid Uniform[-epsilon, epsilon] noise before ranking."""

    seed: int
    epsilon: float

    def __post_init__(self):
        if not self.epsilon > 0:
            raise InvalidInput("jitter epsilon must be positive")


@dataclass(frozen=True)
class IdentifiedSet:
    lower: float
    upper: float

    def __post_init__(self):
        if self.lower > self.upper + EXACT_TOL:
            raise InvalidInput("identified set needs lower <= upper")

    def contains(self, value: float, tol: float = EXACT_TOL) -> bool:
        return self.lower - tol <= value <= self.upper + tol


def count_le(reference: ArrayLike, values: ArrayLike) -> np.ndarray:
    """For each value v, the number of reference points ``<= v``."""
    ref = np.sort(np.asarray(reference, dtype=float))
    return np.searchsorted(ref, np.asarray(values, dtype=float), side="right")


def jitter_values(values: ArrayLike, jitter: Jitter) -> np.ndarray:
    rng = np.random.default_rng(jitter.seed)
    arr = _as_1d(values)
    return arr + rng.uniform(-jitter.epsilon, jitter.epsilon, size=arr.size)


def compute_ranks(values: ArrayLike, tie_policy: Union[str, Jitter] = "literal") -> RankVector:
    """Ranks ``R_i = sum_j 1{Y_j <= Y_i}``.

    With ``tie_policy="literal"`` tied values all receive the maximum rank of
    their block. Passing a :class:`Jitter` perturbs the values with seeded
    uniform noise first, which breaks ties at random.
    """
    arr = _as_1d(values)
    if isinstance(tie_policy, Jitter):
        arr = jitter_values(arr, tie_policy)
    elif tie_policy != "literal":
        raise InvalidInput(f"unknown tie policy {tie_policy!r}")
    return RankVector(count_le(arr, arr).astype(np.int64), arr.size)


def has_ties(values: ArrayLike) -> bool:
    arr = np.sort(np.asarray(values, dtype=float))
    return bool(np.any(arr[1:] == arr[:-1]))


def ecdf(values: ArrayLike) -> StepCDF:
    arr = _as_1d(values)
    support, counts = np.unique(arr, return_counts=True)
    cum = np.cumsum(counts) / arr.size
    return StepCDF(support, cum)


def rank_ate(f1: StepCDF, f0: StepCDF) -> float:
    """tau_r(F1, F0) = E_{Z1~F1}[F0(Z1)] - 1/2, evaluated exactly for step CDFs.

    Ties count fully, so a step CDF is not neutral against itself:
    ``rank_ate(F, F) = 1/(2m)`` for ``m`` equally weighted atoms.
    """
    return float(np.dot(f0.evaluate(f1.support), f1.masses) - 0.5)


def rank_ate_pairs(y1: ArrayLike, y0: ArrayLike, chunk: int = 2048) -> float:
    """Two-sample U-statistic ``mean_{i,j} 1{y0_j <= y1_i} - 1/2`` by brute force.

    Deliberately does not sort: it is the pairwise oracle for :func:`rank_ate`.
    """
    a = _as_1d(y1, "y1")
    b = _as_1d(y0, "y0")
    hits = 0
    for start in range(0, a.size, chunk):
        block = a[start:start + chunk]
        hits += int(np.count_nonzero(b[None, :] <= block[:, None]))
    return hits / (a.size * b.size) - 0.5


def mixture(components: Iterable[tuple[float, StepCDF]]) -> StepCDF:
    """Pointwise convex combination ``sum_k w_k F_k`` on the merged support."""
    components = list(components)
    if not components:
        raise InvalidInput("mixture needs at least one component")
    weights = np.array([w for w, _ in components], dtype=float)
    if np.any(weights < 0) or abs(weights.sum() - 1.0) > EXACT_TOL:
        raise InvalidInput("mixture weights must be non-negative and sum to 1")
    support = np.unique(np.concatenate([f.support for _, f in components]))
    cum = np.zeros_like(support)
    for w, f in components:
        if w > 0:
            cum += w * f.evaluate(support)
    cum[-1] = 1.0
    return StepCDF(support, cum)


def generalized_inverse(f: StepCDF, u):
    """Left-continuous quantile ``inf{y in support : F(y) >= u}``.

    A 1e-12 slack absorbs rounding when ``u`` was itself produced by a CDF
    evaluation. Accepts a scalar or an array.
    """
    u_arr = np.asarray(u, dtype=float)
    if np.any(u_arr < 0) or np.any(u_arr > 1) or np.any(np.isnan(u_arr)):
        raise InvalidInput("quantile level must lie in [0, 1]")
    idx = np.searchsorted(f.cum, u_arr - EXACT_TOL, side="left")
    idx = np.clip(idx, 0, f.support.size - 1)
    out = f.support[idx]
    return float(out) if np.ndim(out) == 0 else out


def fan_park_bounds(f1: StepCDF, f0: StepCDF) -> IdentifiedSet:
    """Sharp bounds on ``P(Y(1) >= Y(0)) - 1/2`` given only the two margins.

    The sup/inf of ``F0 - F1`` is taken over the merged support and the left
    limits at each support point, which is exact for step functions.
    """
    grid = np.union1d(f1.support, f0.support)
    diff_at = f0.evaluate(grid) - f1.evaluate(grid)
    diff_left = f0.left_limit(grid) - f1.left_limit(grid)
    both = np.concatenate([diff_at, diff_left])
    lower = max(float(both.max()), 0.0) - 0.5
    upper = min(float(both.min()), 0.0) + 0.5
    return IdentifiedSet(lower, upper)


def project_to_cdf(support: ArrayLike, raw: ArrayLike) -> StepCDF:
    """Repair a signed or non-monotone CDF estimate into a valid StepCDF.

    Isotonic (pool-adjacent-violators) fit, then clip to [0, 1], then rescale
    so the last value is 1.
    """
    support = _as_1d(support, "support")
    raw = np.asarray(raw, dtype=float)
    if raw.shape != support.shape:
        raise InvalidInput("support and raw must have the same length")
    if np.any(np.diff(support) <= 0):
        raise InvalidInput("support must be strictly increasing")
    fitted = isotonic_regression(raw, increasing=True).x if raw.size > 1 else raw.copy()
    fitted = np.clip(fitted, 0.0, 1.0)
    top = fitted[-1]
    if not top > 0:
        raise DegenerateDistribution("projected CDF has no positive mass")
    fitted = fitted / top
    fitted[-1] = 1.0
    return StepCDF(support, fitted)


def sup_distance(f: StepCDF, cdf: Callable[[np.ndarray], np.ndarray]) -> float:
    """Kolmogorov distance between a step CDF and a continuous CDF."""
    truth = np.asarray(cdf(f.support), dtype=float)
    at = np.abs(f.cum - truth)
    left = np.abs(np.concatenate([[0.0], f.cum[:-1]]) - truth)
    return float(max(at.max(), left.max()))
