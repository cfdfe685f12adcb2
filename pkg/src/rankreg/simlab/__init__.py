"""Synthetic designs with known estimands and a seeded convergence runner."""

from .dgp import KINDS, DgpSpec, OracleValue, generate, generate_full, make_rng, oracle_estimand
from .laws import Law, MixtureLaw, mix, tau_r

__all__ = [
    "KINDS", "DgpSpec", "OracleValue", "generate", "generate_full", "make_rng", "oracle_estimand",
    "Law", "MixtureLaw", "mix", "tau_r",
]
