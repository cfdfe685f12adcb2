"""Rank-2SLS with a binary instrument and complier-distribution ranking."""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .data import Estimate, Sample, require_binary, require_both_groups
from .errors import InsufficientCells, InvalidInput, MissingColumn, WeakOrWrongSignedFirstStage
from .ranks import StepCDF, count_le, ecdf, mixture, project_to_cdf

PI_C_FLOOR = 1e-6

TSLS_ESTIMANDS = {
    "all": "tau_r(F_Y(1)|c, F_Y) - tau_r(F_Y(0)|c, F_Y)",
    "treated": "tau_r(F_Y(1)|c, F_Y|W=1) - tau_r(F_Y(0)|c, F_Y|W=1)",
    "control": "tau_r(F_Y(1)|c, F_Y|W=0) - tau_r(F_Y(0)|c, F_Y|W=0)",
}


class ComplierShareWarning(UserWarning):
    pass


@dataclass
class ComplierShares:
    pi_a: float
    pi_n: float
    pi_c: float
    clamped: bool = False

    def as_dict(self) -> dict:
        return {"pi_a": self.pi_a, "pi_n": self.pi_n, "pi_c": self.pi_c, "clamped": self.clamped}


@dataclass
class ComplierCdfs:
    f1c: StepCDF
    f0c: StepCDF
    shares: ComplierShares
    diagnostics: dict = field(default_factory=dict)


def _instrument(s: Sample) -> np.ndarray:
    if s.z is None:
        raise MissingColumn("instrument column z is required")
    require_both_groups(s.z, "z")
    require_binary(s.w, "w")
    return s.z


def _wald(s: Sample, outcome: np.ndarray) -> tuple[float, float, float]:
    z1 = s.z == 1
    itt = outcome[z1].mean() - outcome[~z1].mean()
    first = s.w[z1].mean() - s.w[~z1].mean()
    if not first > 0:
        raise WeakOrWrongSignedFirstStage(f"first stage is {first:.6g}; it must be positive")
    return itt / first, itt, first


def rank_2sls(s: Sample, ref: str = "all") -> Estimate:
    """Wald ratio with outcomes ranked in the full sample or within a treatment arm.

    ``ref="treated"`` uses ``#{j : W_j = 1, Y_j <= Y_i} / n1`` and similarly
    for control. The three variants generally have different limits.
    """
    if ref not in TSLS_ESTIMANDS:
        raise InvalidInput(f"ref must be one of {sorted(TSLS_ESTIMANDS)}")
    _instrument(s)
    if ref == "all":
        r = count_le(s.y, s.y) / s.n
    else:
        group = s.w == (1 if ref == "treated" else 0)
        if not group.any():
            raise InsufficientCells(f"no {ref} units to rank against")
        r = count_le(s.y[group], s.y) / group.sum()
    value, itt, first = _wald(s, r)
    return Estimate(value, f"rank_2sls_{ref}", TSLS_ESTIMANDS[ref], s.n,
                    {"first_stage": first, "rank_itt": itt, "ref": ref})


def _cell_counts(s: Sample) -> dict:
    z1 = s.z == 1
    w1 = s.w == 1
    return {
        "n1": int(z1.sum()), "n0": int((~z1).sum()),
        "n11": int((w1 & z1).sum()), "n10": int((w1 & ~z1).sum()),
        "n01": int((~w1 & z1).sum()), "n00": int((~w1 & ~z1).sum()),
    }


def estimate_complier_shares(s: Sample) -> ComplierShares:
    """Plug-in type shares from the (W, Z) cell frequencies.

    ``pi_a = n10/n0``, ``pi_n = n01/n1``, ``pi_c = n11/n1 - n10/n0``. A
    non-positive complier share is clamped to 1e-6 with a warning.
    """
    _instrument(s)
    c = _cell_counts(s)
    pi_a = c["n10"] / c["n0"]
    pi_n = c["n01"] / c["n1"]
    pi_c = c["n11"] / c["n1"] - pi_a
    clamped = False
    if pi_c < PI_C_FLOOR:
        warnings.warn(f"complier share {pi_c:.6g} clamped to {PI_C_FLOOR}", ComplierShareWarning, stacklevel=2)
        pi_c = PI_C_FLOOR
        clamped = True
    return ComplierShares(pi_a, pi_n, min(pi_c, 1.0), clamped)


def complier_cdf_raw(s: Sample, shares: ComplierShares | None = None):
    """Signed plug-in complier CDFs on the merged outcome support, before repair.

    Returns ``(support, raw_f1c, raw_f0c)``.
    """
    if shares is None:
        shares = estimate_complier_shares(s)
    z1 = s.z == 1
    w1 = s.w == 1
    support = np.unique(s.y)
    cells = {(1, 1): w1 & z1, (1, 0): w1 & ~z1, (0, 0): ~w1 & ~z1, (0, 1): ~w1 & z1}

    def cell_cdf(w: int, z: int, share: float) -> np.ndarray:
        mask = cells[(w, z)]
        if not mask.any():
            if share > 0:
                raise InsufficientCells(f"cell W={w}, Z={z} is empty but its share is positive")
            return np.zeros_like(support)
        return ecdf(s.y[mask]).evaluate(support)

    pa, pn, pc = shares.pi_a, shares.pi_n, shares.pi_c
    raw1 = ((pa + pc) / pc) * cell_cdf(1, 1, pa + pc)
    if pa > 0:
        raw1 = raw1 - (pa / pc) * cell_cdf(1, 0, pa)
    raw0 = ((pn + pc) / pc) * cell_cdf(0, 0, pn + pc)
    if pn > 0:
        raw0 = raw0 - (pn / pc) * cell_cdf(0, 1, pn)
    return support, raw1, raw0


def estimate_complier_cdfs(s: Sample) -> ComplierCdfs:
    """Complier potential-outcome CDFs, repaired into valid step CDFs."""
    shares = estimate_complier_shares(s)
    support, raw1, raw0 = complier_cdf_raw(s, shares)
    out = ComplierCdfs(project_to_cdf(support, raw1), project_to_cdf(support, raw0), shares)
    out.diagnostics["raw_range_f1c"] = (float(raw1.min()), float(raw1.max()))
    out.diagnostics["raw_range_f0c"] = (float(raw0.min()), float(raw0.max()))
    return out


def rank_2sls_complier(s: Sample, zeta: float = 0.5) -> Estimate:
    """2SLS on outcomes mapped through ``zeta*F1c + (1-zeta)*F0c``; targets rank-LATE."""
    if not 0 <= zeta <= 1:
        raise InvalidInput("zeta must lie in [0, 1]")
    cdfs = estimate_complier_cdfs(s)
    ref = mixture([(zeta, cdfs.f1c), (1.0 - zeta, cdfs.f0c)])
    value, itt, first = _wald(s, ref.evaluate(s.y))
    diag = {"first_stage": first, "rank_itt": itt, "zeta": zeta, **cdfs.shares.as_dict()}
    return Estimate(value, "rank_2sls_complier", "rank-LATE", s.n, diag)
