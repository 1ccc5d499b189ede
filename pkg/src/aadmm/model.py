"""Problem representation for spike-and-slab MAP recovery.

The objective being minimised over a signal ``x`` and a binary
inclusion vector ``omega`` is::

    ||y - A x||_2^2 + lam * ||x||_1 + sum_i omega_i * gamma_i

where each ``gamma_i`` is an inclusion penalty derived from the prior
inclusion probability ``kappa_i`` (see :func:`compute_gamma`).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

#: Column norms below this are treated as zero.
ZERO_COLUMN_TOL = 1e-12


class DimensionError(ValueError):
    """Raised when array shapes are inconsistent."""


@dataclass(frozen=True)
class MeasurementEnsemble:
    """Measurement matrix ``A`` (m x n) and observation ``y`` (length m)."""

    A: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        A = np.array(self.A, dtype=float)
        y = np.array(self.y, dtype=float).ravel()
        if A.ndim != 2 or A.shape[0] < 1 or A.shape[1] < 1:
            raise DimensionError(f"A must be a non-empty 2-d array, got shape {A.shape}")
        if y.shape[0] != A.shape[0]:
            raise DimensionError(f"y has length {y.shape[0]}, expected {A.shape[0]}")
        A.setflags(write=False)
        y.setflags(write=False)
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "y", y)

    @property
    def m(self) -> int:
        return self.A.shape[0]

    @property
    def n(self) -> int:
        return self.A.shape[1]

    @classmethod
    def from_raw(cls, A_raw, y) -> "MeasurementEnsemble":
        """Build an ensemble after normalising the columns of ``A_raw``."""
        A, _ = normalize_columns(A_raw)
        return cls(A, y)


@dataclass(frozen=True)
class HyperParams:
    """Regularisation weight, noise variance and per-index inclusion priors.

    ``gamma`` is always derived from the other three fields.
    """

    lam: float
    sigma2: float
    kappa: np.ndarray
    gamma: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        kappa = np.array(self.kappa, dtype=float).ravel()
        gamma = compute_gamma(self.sigma2, self.lam, kappa)
        kappa.setflags(write=False)
        gamma.setflags(write=False)
        object.__setattr__(self, "lam", float(self.lam))
        object.__setattr__(self, "sigma2", float(self.sigma2))
        object.__setattr__(self, "kappa", kappa)
        object.__setattr__(self, "gamma", gamma)

    @classmethod
    def uniform(cls, lam: float, sigma2: float, kappa: float, n: int) -> "HyperParams":
        return cls(lam, sigma2, np.full(n, float(kappa)))

    @property
    def n(self) -> int:
        return self.kappa.shape[0]


@dataclass(frozen=True)
class SignalEstimate:
    """A recovered signal together with its inclusion support."""

    x: np.ndarray
    support: tuple
    objective: float

    @property
    def omega(self) -> np.ndarray:
        return indicator(self.support, self.x.shape[0])


def compute_gamma(sigma2: float, lam: float, kappa) -> np.ndarray:
    """Per-index inclusion penalty.

    ``gamma_i = 2 sigma2 log(4 sigma2 (1 - kappa_i) / (lam kappa_i))``,
    with the natural logarithm.
    """
    if not sigma2 > 0:
        raise ValueError(f"sigma2 must be positive, got {sigma2}")
    if not lam > 0:
        raise ValueError(f"lambda must be positive, got {lam}")
    kappa = np.asarray(kappa, dtype=float)
    bad = np.flatnonzero(~((kappa > 0) & (kappa < 1)))
    if bad.size:
        raise ValueError(f"kappa must lie in (0, 1); index {bad[0]} has {kappa[bad[0]]}")
    return 2.0 * sigma2 * np.log(4.0 * sigma2 * (1.0 - kappa) / (lam * kappa))


def normalize_columns(A_raw):
    """Scale every column of ``A_raw`` to unit Euclidean norm.

    Returns
    -------
    A : ndarray
        Column-normalised copy.
    scales : ndarray
        Original column norms, so that ``A * scales == A_raw``.
    """
    A_raw = np.asarray(A_raw, dtype=float)
    if A_raw.ndim != 2:
        raise DimensionError(f"expected a 2-d matrix, got shape {A_raw.shape}")
    scales = np.linalg.norm(A_raw, axis=0)
    bad = np.flatnonzero(scales < ZERO_COLUMN_TOL)
    if bad.size:
        raise ValueError(f"column {bad[0]} has (near) zero norm")
    return A_raw / scales, scales


def indicator(support, n: int) -> np.ndarray:
    omega = np.zeros(n, dtype=np.int8)
    omega[list(support)] = 1
    return omega


def full_objective(ens: MeasurementEnsemble, hp: HyperParams, x, omega) -> float:
    x = np.asarray(x, dtype=float)
    omega = np.asarray(omega)
    if x.shape != (ens.n,) or omega.shape != (ens.n,) or hp.n != ens.n:
        raise DimensionError(
            f"expected length {ens.n}, got x {x.shape}, omega {omega.shape}, gamma {hp.n}")
    if not np.all((omega == 0) | (omega == 1)):
        raise ValueError("omega must be binary")
    r = ens.y - ens.A @ x
    return float(r @ r + hp.lam * np.abs(x).sum() + hp.gamma[omega == 1].sum())


def check_support(support, n: int) -> np.ndarray:
    idx = np.asarray(sorted(support), dtype=np.intp)
    if idx.size and (idx[0] < 0 or idx[-1] >= n):
        raise IndexError(f"support index out of range for n={n}: {list(support)}")
    if np.unique(idx).size != idx.size:
        raise ValueError("support contains duplicate indices")
    return idx


def support_objective(ens: MeasurementEnsemble, hp: HyperParams, support, x_S) -> float:
    """Restricted objective with the inclusion cost of ``support`` added.

    ``x_S`` is ordered like ``sorted(support)``.
    """
    idx = check_support(support, ens.n)
    x_S = np.asarray(x_S, dtype=float).ravel()
    if x_S.shape[0] != idx.size:
        raise DimensionError(f"x_S has length {x_S.shape[0]}, support has {idx.size}")
    r = ens.y - ens.A[:, idx] @ x_S
    return float(r @ r + hp.lam * np.abs(x_S).sum() + hp.gamma[idx].sum())


def pad(support, x_S, n: int) -> np.ndarray:
    x = np.zeros(n)
    x[check_support(support, n)] = x_S
    return x


def kappa_for_gamma_zero(sigma2: float, lam: float) -> float:
    """Inclusion probability at which the penalty vanishes."""
    return 4 * sigma2 / (lam + 4 * sigma2)

