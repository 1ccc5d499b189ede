"""ADMM for the support-restricted LASSO subproblem.

Solves ``min_x ||y - A_S x||_2^2 + lam ||x||_1`` (optionally with
``x >= 0``) using the splitting ``x = z``:

    x <- (2 A_S^T A_S + rho I)^{-1} (2 A_S^T y + rho (z - u))
    z <- S_{lam/rho}(x + u)          (clamped at zero when nonneg)
    u <- u + x - z

The Gram block is diagonalised once per call, so the x-update costs two
small matrix-vector products for any ``rho``. By default ``rho`` is only
the starting penalty: it is rebalanced against the primal and dual
residuals (Boyd et al., 2011, sec. 3.4.1) during the first half of the
iteration budget. A fixed ``rho`` converges very slowly on rank-deficient
blocks when ``lam`` is small.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np
import scipy.linalg
from numba import njit

RHO_MU = 10.0     # imbalance ratio that triggers a change
RHO_TAU = 2.0     # multiplicative step
RHO_EVERY = 10    # iterations between checks


@dataclass(frozen=True)
class AdmmOptions:
    rho: float = 1.0
    abs_tol: float = 1e-8
    rel_tol: float = 1e-6
    max_iter: int = 2000
    nonneg: bool = False
    adaptive_rho: bool = True

    def __post_init__(self):
        if not self.rho > 0:
            raise ValueError(f"rho must be positive, got {self.rho}")
        if not (self.abs_tol > 0 and self.rel_tol > 0):
            raise ValueError("tolerances must be positive")
        if self.max_iter < 1:
            raise ValueError(f"max_iter must be >= 1, got {self.max_iter}")

    def tightened(self, factor: float = 10.0) -> "AdmmOptions":
        """Copy with both tolerances divided and the iteration cap multiplied by ``factor``."""
        return replace(self, abs_tol=self.abs_tol / factor, rel_tol=self.rel_tol / factor,
                       max_iter=int(self.max_iter * factor))


@dataclass(frozen=True)
class AdmmResult:
    x_S: np.ndarray
    iterations: int
    primal_residual: float
    dual_residual: float
    converged: bool
    dual: np.ndarray  # unscaled multiplier rho * u, for warm starts
    rho: float = 1.0  # final penalty


def soft_threshold(v, beta):
    """Shrink ``v`` towards zero by ``beta``; ``|v| <= beta`` maps to 0."""
    if beta < 0:
        raise ValueError("beta must be nonnegative")
    v = np.asarray(v, dtype=float)
    out = np.where(v > beta, v - beta, np.where(v < -beta, v + beta, 0.0))
    return out if out.ndim else float(out)


def soft_threshold_nonneg(v, beta):
    out = np.maximum(0.0, soft_threshold(v, beta))
    return out if np.ndim(out) else float(out)


@njit(cache=True)
def _admm_loop(V, ev, Vb, beta0, rho, adapt, nonneg, z, u, abs_tol, rel_tol, max_iter):
    # x = V diag(1 / (2 ev + rho)) (Vb + rho V^T (z - u)), with Vb = V^T (2 A^T y)
    p = z.shape[0]
    z = z.copy()
    u = u.copy()
    beta = beta0 / rho
    sqrt_p = math.sqrt(p)
    r_norm = 0.0
    s_norm = 0.0
    converged = False
    it = 0
    w = np.empty(p)
    adapt_until = max_iter // 2
    while it < max_iter:
        it += 1
        for k in range(p):
            w[k] = z[k] - u[k]
        q = np.dot(w, V)
        for k in range(p):
            q[k] = (Vb[k] + rho * q[k]) / (2.0 * ev[k] + rho)
        x = np.dot(V, q)
        r2 = 0.0
        s2 = 0.0
        x2 = 0.0
        z2 = 0.0
        u2 = 0.0
        for k in range(p):
            v = x[k] + u[k]
            if v > beta:
                zk = v - beta
            elif v < -beta:
                zk = v + beta
            else:
                zk = 0.0
            if nonneg and zk < 0.0:
                zk = 0.0
            dz = zk - z[k]
            z[k] = zk
            u[k] = v - zk
            d = x[k] - zk
            r2 += d * d
            s2 += dz * dz
            x2 += x[k] * x[k]
            z2 += zk * zk
            u2 += u[k] * u[k]
        r_norm = math.sqrt(r2)
        s_norm = rho * math.sqrt(s2)
        eps_pri = sqrt_p * abs_tol + rel_tol * math.sqrt(max(x2, z2))
        eps_dual = sqrt_p * abs_tol + rel_tol * rho * math.sqrt(u2)
        if r_norm <= eps_pri and s_norm <= eps_dual:
            converged = True
            break
        if adapt and it % RHO_EVERY == 0 and it <= adapt_until:
            # compare residuals relative to their own tolerances
            rr = r_norm / eps_pri
            ss = s_norm / eps_dual
            scale = 1.0
            if rr > RHO_MU * ss:
                scale = RHO_TAU
            elif ss > RHO_MU * rr:
                scale = 1.0 / RHO_TAU
            if scale != 1.0:
                rho *= scale
                beta = beta0 / rho
                for k in range(p):
                    u[k] /= scale
    return z, u, rho, it, r_norm, s_norm, converged


def solve_gram(G_S, Aty_S, lam, opts: AdmmOptions, z0=None, dual0=None) -> AdmmResult:
    """ADMM given the Gram block ``A_S^T A_S`` and ``A_S^T y``.

    ``z0`` and ``dual0`` (the unscaled multiplier) warm-start the iteration.
    """
    p = Aty_S.shape[0]
    if p == 0:
        return AdmmResult(np.zeros(0), 0, 0.0, 0.0, True, np.zeros(0), opts.rho)
    ev, V = scipy.linalg.eigh(G_S)
    ev = np.maximum(ev, 0.0)
    V = np.ascontiguousarray(V)
    Vb = V.T @ (2.0 * Aty_S)
    z = np.zeros(p) if z0 is None else np.array(z0, dtype=float)
    u = np.zeros(p) if dual0 is None else np.array(dual0, dtype=float) / opts.rho
    if opts.nonneg:
        np.maximum(z, 0.0, out=z)
    z, u, rho, it, r_norm, s_norm, ok = _admm_loop(
        V, ev, Vb, lam, opts.rho, opts.adaptive_rho, opts.nonneg, z, u,
        opts.abs_tol, opts.rel_tol, opts.max_iter)
    return AdmmResult(z, int(it), float(r_norm), float(s_norm), bool(ok), rho * u, float(rho))


def solve_restricted(A_S, y, lam, opts: AdmmOptions = AdmmOptions(), z0=None, dual0=None) -> AdmmResult:
    """Minimise ``||y - A_S x||^2 + lam ||x||_1`` over ``x`` (``x >= 0`` if ``opts.nonneg``).

    Parameters
    ----------
    A_S : ndarray, shape (m, p)
        Active columns, assumed unit-norm. ``p`` may be 0.
    y : ndarray, shape (m,)
    lam : float
    opts : AdmmOptions
    z0, dual0 : ndarray, optional
        Warm start for the primal variable and the unscaled multiplier.

    Returns
    -------
    AdmmResult
        ``x_S`` is the thresholded ADMM variable, so entries are exact
        zeros off the active set and nonnegative in nonneg mode. On
        non-convergence the last iterate is returned with
        ``converged=False``.
    """
    A_S = np.asarray(A_S, dtype=float)
    y = np.asarray(y, dtype=float)
    if A_S.ndim != 2 or A_S.shape[0] != y.shape[0]:
        raise ValueError(f"A_S shape {A_S.shape} incompatible with y length {y.shape[0]}")
    return solve_gram(A_S.T @ A_S, A_S.T @ y, lam, opts, z0, dual0)


def kkt_tolerance(opts: AdmmOptions, y) -> float:
    return 10.0 * max(opts.abs_tol, opts.rel_tol * float(np.linalg.norm(y)))


def kkt_violation(A_S, y, lam, x, nonneg=False) -> float:
    """Largest violation of the optimality conditions at ``x``."""
    x = np.asarray(x, dtype=float)
    if x.size == 0:
        return 0.0
    g = 2.0 * A_S.T @ (y - A_S @ x)
    if nonneg:
        viol = np.where(x > 0, np.abs(g - lam), np.maximum(g - lam, 0.0))
        viol = np.maximum(viol, np.maximum(-x, 0.0))
    else:
        viol = np.where(x != 0, np.abs(g - lam * np.sign(x)), np.maximum(np.abs(g) - lam, 0.0))
    return float(viol.max())
