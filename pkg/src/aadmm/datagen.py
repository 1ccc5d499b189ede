"""Seeded synthetic recovery problems.

All randomness comes from numpy's ``Philox`` counter-based bit
generator. A seed is expanded through :class:`numpy.random.SeedSequence`
into three independent streams (matrix, signal, noise), so each part of
a problem can be regenerated on its own.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass
from typing import Optional

import numpy as np

from .model import MeasurementEnsemble, normalize_columns

DEFAULT_N, DEFAULT_M, DEFAULT_K = 512, 128, 30
DEFAULT_SIGMA2 = 3.24e-4
DEFAULT_LAMBDA = 2e-4

MATRIX, SIGNAL, NOISE = 0, 1, 2

#: Recorded in outputs so stored results can be tied to the generator.
RNG_NAME = f"numpy-{np.__version__}/Philox4x64-10/SeedSequence"


@dataclass(frozen=True)
class SynthConfig:
    n: int = DEFAULT_N
    m: int = DEFAULT_M
    k: int = DEFAULT_K
    sigma2: float = DEFAULT_SIGMA2
    lam: float = DEFAULT_LAMBDA
    laplace_scale: Optional[float] = None  # None means 2 * sigma2 / lam
    nonneg: bool = False
    seed: int = 0

    def __post_init__(self):
        if min(self.n, self.m) < 1 or self.k < 0:
            raise ValueError(f"need n, m >= 1 and k >= 0, got n={self.n} m={self.m} k={self.k}")
        if self.k > self.n:
            raise ValueError(f"k={self.k} exceeds n={self.n}")
        if self.sigma2 < 0 or not self.lam > 0:
            raise ValueError("sigma2 must be >= 0 and lambda > 0")
        if self.laplace_scale is not None and not self.laplace_scale > 0:
            raise ValueError("laplace_scale must be positive")
        if self.k > 0 and not self.scale > 0:
            raise ValueError("sigma2 = 0 gives a zero default Laplace scale; set laplace_scale")

    @property
    def scale(self) -> float:
        if self.laplace_scale is not None:
            return float(self.laplace_scale)
        return 2.0 * self.sigma2 / self.lam

    def to_dict(self) -> dict:
        d = asdict(self)
        d["laplace_scale"] = self.scale
        return d


def rng_stream(seed: int, component: int) -> np.random.Generator:
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=(int(component),))
    return np.random.Generator(np.random.Philox(ss))


def gen_signal(cfg: SynthConfig, rng: np.random.Generator) -> np.ndarray:
    """``k`` Laplace-distributed nonzeros at uniformly random positions."""
    x = np.zeros(cfg.n)
    if cfg.k == 0:
        return x
    pos = rng.choice(cfg.n, size=cfg.k, replace=False)
    vals = rng.laplace(0.0, cfg.scale, size=cfg.k)
    # an exact zero draw would break the sparsity count
    while np.any(vals == 0):
        vals[vals == 0] = rng.laplace(0.0, cfg.scale, size=int(np.sum(vals == 0)))
    x[pos] = np.abs(vals) if cfg.nonneg else vals
    return x


def gen_matrix(m: int, n: int, rng: np.random.Generator) -> np.ndarray:
    """Standard normal ``m x n`` matrix with unit-norm columns."""
    A = rng.standard_normal((m, n))
    norms = np.linalg.norm(A, axis=0)
    for j in np.flatnonzero(norms < 1e-12):
        while np.linalg.norm(A[:, j]) < 1e-12:
            A[:, j] = rng.standard_normal(m)
    return normalize_columns(A)[0]


def gen_noise(m: int, sigma2: float, rng: np.random.Generator) -> np.ndarray:
    return rng.normal(0.0, np.sqrt(sigma2), size=m)


def gen_problem(cfg: SynthConfig, noise_seed: Optional[int] = None):
    """Return ``(ensemble, x_true, y)`` with ``y = A x_true + noise``.

    ``noise_seed`` replaces ``cfg.seed`` for the noise stream only.
    """
    A = gen_matrix(cfg.m, cfg.n, rng_stream(cfg.seed, MATRIX))
    x = gen_signal(cfg, rng_stream(cfg.seed, SIGNAL))
    eps = gen_noise(cfg.m, cfg.sigma2,
                    rng_stream(cfg.seed if noise_seed is None else noise_seed, NOISE))
    y = A @ x + eps
    ens = MeasurementEnsemble(A, y)
    return ens, x, ens.y
