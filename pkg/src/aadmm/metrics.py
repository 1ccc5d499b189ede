"""Recovery quality measures."""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

CSV_FIELDS = ("seed", "mse", "sml", "ofv", "sl", "ct_seconds", "outer_iterations")


@dataclass(frozen=True)
class TrialResult:
    mse: float
    sml: float
    ofv: float
    sl: int
    ct_seconds: float
    outer_iterations: int
    seed: int
    inner_failures: int = 0
    stop_reason: str = ""

    def to_dict(self) -> dict:
        return asdict(self)

    def csv_row(self) -> list:
        return [getattr(self, f) for f in CSV_FIELDS]


def mse(x_hat, x_true) -> float:
    """Mean over entries of the squared error."""
    x_hat = np.asarray(x_hat, dtype=float)
    x_true = np.asarray(x_true, dtype=float)
    if x_hat.shape != x_true.shape or x_hat.ndim != 1 or x_hat.size == 0:
        raise ValueError(f"shape mismatch: {x_hat.shape} vs {x_true.shape}")
    d = x_hat - x_true
    return float(d @ d / d.size)


def sml(S_hat, S_true, n: int) -> float:
    """Support match level in percent.

    Fraction of the ``n`` positions on which the two inclusion
    indicators agree.
    """
    if n <= 0:
        raise ValueError("n must be positive")
    S_hat, S_true = set(map(int, S_hat)), set(map(int, S_true))
    out = [i for i in S_hat | S_true if not 0 <= i < n]
    if out:
        raise IndexError(f"index {out[0]} outside 0..{n - 1}")
    return 100.0 * (1.0 - len(S_hat ^ S_true) / n)


def sparsity_level(x, tol: float = 0.0) -> int:
    if tol < 0:
        raise ValueError("tol must be nonnegative")
    return int(np.count_nonzero(np.abs(np.asarray(x)) > tol))


def support_of(x, tol: float = 0.0) -> tuple:
    return tuple(int(i) for i in np.flatnonzero(np.abs(np.asarray(x)) > tol))
