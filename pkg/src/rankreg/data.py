"""Sample containers and the estimate record."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Optional

import numpy as np

from .errors import EstimationError, InvalidInput, NoVariation, NonBinaryColumn


def _column(values, name: str) -> np.ndarray:
    arr = np.asarray(values, dtype=float)
    if arr.ndim != 1:
        raise InvalidInput(f"column {name!r} must be one-dimensional")
    if not np.all(np.isfinite(arr)):
        raise InvalidInput(f"column {name!r} contains non-finite values")
    return arr


def require_binary(values: np.ndarray, name: str) -> None:
    if not np.all((values == 0) | (values == 1)):
        raise NonBinaryColumn(f"column {name!r} must contain only 0/1")


def require_both_groups(values: np.ndarray, name: str) -> tuple[int, int]:
    require_binary(values, name)
    n1 = int(np.count_nonzero(values == 1))
    n0 = values.size - n1
    if n1 == 0 or n0 == 0:
        raise NoVariation(f"column {name!r} has only one group (n1={n1}, n0={n0})")
    return n1, n0


@dataclass(frozen=True)
class Sample:
    """Cross-sectional data: outcome ``y``, treatment ``w`` and optional columns.

    ``x`` is an n-by-d covariate matrix (d may be 0), ``z`` a binary
    instrument, ``run`` a running variable, ``y_pre`` a pre-period outcome.
    """

    y: np.ndarray
    w: np.ndarray
    x: Optional[np.ndarray] = None
    z: Optional[np.ndarray] = None
    run: Optional[np.ndarray] = None
    y_pre: Optional[np.ndarray] = None

    def __post_init__(self):
        y = _column(self.y, "y")
        n = y.size
        if n < 2:
            raise InvalidInput("a sample needs at least 2 units")
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "w", _column(self.w, "w"))
        for name in ("z", "run", "y_pre"):
            val = getattr(self, name)
            if val is not None:
                object.__setattr__(self, name, _column(val, name))
        if self.x is not None:
            x = np.asarray(self.x, dtype=float)
            if x.ndim == 1:
                x = x[:, None]
            if x.ndim != 2 or not np.all(np.isfinite(x)):
                raise InvalidInput("covariates must be a finite n-by-d matrix")
            object.__setattr__(self, "x", x)
        for name in ("w", "x", "z", "run", "y_pre"):
            val = getattr(self, name)
            if val is not None and val.shape[0] != n:
                raise InvalidInput(f"column {name!r} has length {val.shape[0]}, expected {n}")

    @property
    def n(self) -> int:
        return self.y.size

    @property
    def n_covariates(self) -> int:
        return 0 if self.x is None else self.x.shape[1]


@dataclass(frozen=True)
class PanelSample:
    """Two-period panel: pre-period ``y0``, post-period ``y1``, group ``w``."""

    y0: np.ndarray
    y1: np.ndarray
    w: np.ndarray

    def __post_init__(self):
        y0 = _column(self.y0, "y0")
        y1 = _column(self.y1, "y1")
        w = _column(self.w, "w")
        if not (y0.size == y1.size == w.size):
            raise InvalidInput("panel columns must have equal lengths")
        if y0.size < 2:
            raise InvalidInput("a panel needs at least 2 units")
        require_binary(w, "w")
        object.__setattr__(self, "y0", y0)
        object.__setattr__(self, "y1", y1)
        object.__setattr__(self, "w", w)

    @property
    def n(self) -> int:
        return self.y0.size


@dataclass
class Estimate:
    value: float
    estimator: str
    estimand: str
    n: int
    diagnostics: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        self.value = float(self.value)
        if not math.isfinite(self.value):
            raise EstimationError(f"{self.estimator} produced a non-finite value")

    def to_dict(self) -> dict[str, Any]:
        return {
            "value": self.value,
            "estimator": self.estimator,
            "estimand": self.estimand,
            "n": self.n,
            "diagnostics": self.diagnostics,
        }
