"""Sparse signal recovery under a Bernoulli-Laplace spike-and-slab prior.

The MAP problem is solved by an adaptive support search (one index added
or removed per step) with an ADMM solver for each fixed support.
"""

__version__ = "0.1.0"

from .adaptive import OuterOptions, RecoveryReport, oracle_solve, run
from .inner import AdmmOptions, solve_restricted
from .model import (HyperParams, MeasurementEnsemble, SignalEstimate, compute_gamma,
                    full_objective, normalize_columns, support_objective)

__all__ = [
    "AdmmOptions", "HyperParams", "MeasurementEnsemble", "OuterOptions", "RecoveryReport",
    "SignalEstimate", "compute_gamma", "full_objective", "normalize_columns", "oracle_solve",
    "run", "solve_restricted", "support_objective",
]
