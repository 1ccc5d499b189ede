"""Adaptive support search with an ADMM inner solver.

Starting from the indices whose inclusion penalty is negative, the
support is grown or shrunk one index at a time. Candidate moves are
ranked with cheap upper bounds on the change of the restricted
objective, so only the chosen move needs a fresh restricted solve.
"""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field, replace
from typing import Callable, NamedTuple, Optional

import numpy as np

from .inner import AdmmOptions, AdmmResult, solve_gram
from .model import HyperParams, MeasurementEnsemble, SignalEstimate, pad

log = logging.getLogger(__name__)

STOP_BOUNDS = "bounds_nonneg"
STOP_MAX_OUTER = "max_outer"
STOP_STALL = "descent_stall"

#: Largest problem the exhaustive oracle accepts.
ORACLE_MAX_N = 16


class Move(NamedTuple):
    kind: str  # "init", "add", "remove" or "stop"
    index: Optional[int] = None

    def __str__(self):
        return self.kind if self.index is None else f"{self.kind}({self.index})"


class TraceRow(NamedTuple):
    iteration: int
    size: int
    g_S: float
    move: Move


@dataclass(frozen=True)
class OuterOptions:
    admm: AdmmOptions = field(default_factory=AdmmOptions)
    max_outer: Optional[int] = None  # None means 4 * n
    descent_guard: bool = True
    stall_tol: float = 1e-10

    def __post_init__(self):
        if self.max_outer is not None and self.max_outer < 1:
            raise ValueError(f"max_outer must be >= 1, got {self.max_outer}")
        if self.stall_tol < 0:
            raise ValueError("stall_tol must be nonnegative")

    @property
    def nonneg(self) -> bool:
        return self.admm.nonneg

    def outer_cap(self, n: int) -> int:
        return 4 * n if self.max_outer is None else self.max_outer


@dataclass(frozen=True)
class OuterState:
    S: tuple
    x_S: np.ndarray
    r_S: np.ndarray
    g_S: float
    iteration: int = 0
    dual_S: Optional[np.ndarray] = None
    inner_failures: int = 0


@dataclass
class RecoveryReport:
    estimate: SignalEstimate
    trace: list
    outer_iterations: int
    stop_reason: str
    inner_failures: int = 0


class Workspace:
    """Quantities shared by every restricted solve on one ensemble."""

    def __init__(self, ens: MeasurementEnsemble):
        self.ens = ens
        self.G = ens.A.T @ ens.A
        self.Aty = ens.A.T @ ens.y

    def solve(self, S, lam, opts: AdmmOptions, z0=None, dual0=None) -> AdmmResult:
        idx = np.asarray(S, dtype=np.intp)
        return solve_gram(self.G[np.ix_(idx, idx)], self.Aty[idx], lam, opts, z0, dual0)

    def state(self, S, res: AdmmResult, hp: HyperParams, iteration: int,
              failures: int = 0) -> OuterState:
        idx = np.asarray(S, dtype=np.intp)
        r = self.ens.y - self.ens.A[:, idx] @ res.x_S
        g = float(r @ r + hp.lam * np.abs(res.x_S).sum() + hp.gamma[idx].sum())
        if not res.converged:
            failures += 1
            log.warning("inner ADMM did not converge on |S|=%d after %d iterations",
                        len(S), res.iterations)
        return OuterState(tuple(S), res.x_S, r, g, iteration, res.dual, failures)


def init_support(gamma) -> tuple:
    """Indices with strictly negative inclusion penalty."""
    return tuple(int(i) for i in np.flatnonzero(np.asarray(gamma) < 0))


def add_bounds(t, gamma, lam):
    """Per-index upper bound on the objective change from adding the index.

    ``t`` holds the correlations of the current residual with each column.
    """
    t = np.asarray(t, dtype=float)
    h = lam / 2.0
    return np.where(t > h, gamma - t * t + lam * t - lam * lam / 4.0,
                    np.where(t < -h, gamma - t * t - lam * t - lam * lam / 4.0, gamma))


def add_bounds_nonneg(t, gamma, lam):
    s = np.maximum(0.0, np.asarray(t, dtype=float) - lam / 2.0)
    return s * s + lam * s - 2.0 * s * t + gamma


def remove_bounds(x_S, t_S, gamma_S, lam):
    """Per-index upper bound on the objective change from removing the index."""
    return x_S * x_S - lam * np.abs(x_S) + 2.0 * x_S * t_S - gamma_S


def _argmin(values, candidates):
    if len(candidates) == 0:
        return np.inf, None
    k = int(np.argmin(values))
    return float(values[k]), int(candidates[k])


def _outside(S, n):
    mask = np.ones(n, dtype=bool)
    mask[list(S)] = False
    return np.flatnonzero(mask)


def bound_add(state: OuterState, ens: MeasurementEnsemble, hp: HyperParams):
    """``(U_bar, i_star)``; ``(inf, None)`` when the support is full."""
    cand = _outside(state.S, ens.n)
    t = ens.A[:, cand].T @ state.r_S
    return _argmin(add_bounds(t, hp.gamma[cand], hp.lam), cand)


def bound_add_nonneg(state: OuterState, ens: MeasurementEnsemble, hp: HyperParams):
    cand = _outside(state.S, ens.n)
    t = ens.A[:, cand].T @ state.r_S
    return _argmin(add_bounds_nonneg(t, hp.gamma[cand], hp.lam), cand)


def bound_remove(state: OuterState, ens: MeasurementEnsemble, hp: HyperParams):
    """``(V_bar, j_star)``; ``(inf, None)`` when the support is empty."""
    idx = np.asarray(state.S, dtype=np.intp)
    t = ens.A[:, idx].T @ state.r_S
    return _argmin(remove_bounds(state.x_S, t, hp.gamma[idx], hp.lam), idx)


def decide(U_bar, i_star, V_bar, j_star) -> Move:
    if min(U_bar, V_bar) >= 0:
        return Move("stop")
    if U_bar < V_bar:
        return Move("add", i_star)
    return Move("remove", j_star)


def _warm_start(state: OuterState, S_new):
    old = dict(zip(state.S, state.x_S))
    z0 = np.array([old.get(i, 0.0) for i in S_new])
    dual0 = None
    if state.dual_S is not None:
        old_dual = dict(zip(state.S, state.dual_S))
        dual0 = np.array([old_dual.get(i, 0.0) for i in S_new])
    return z0, dual0


def step(state: OuterState, ens: MeasurementEnsemble, hp: HyperParams,
         opts: OuterOptions = OuterOptions(), ws: Optional[Workspace] = None):
    """One add/remove decision followed by a restricted re-solve.

    Returns ``(new_state, move, stop_reason)``; ``stop_reason`` is None
    unless the move is a stop. A rolled-back move yields the old state.
    """
    ws = ws or Workspace(ens)
    bound = bound_add_nonneg if opts.nonneg else bound_add
    U_bar, i_star = bound(state, ens, hp)
    V_bar, j_star = bound_remove(state, ens, hp)
    move = decide(U_bar, i_star, V_bar, j_star)
    if move.kind == "stop":
        return state, move, STOP_BOUNDS

    if move.kind == "add":
        S_new = tuple(sorted(state.S + (move.index,)))
    else:
        S_new = tuple(i for i in state.S if i != move.index)
    z0, dual0 = _warm_start(state, S_new)
    res = ws.solve(S_new, hp.lam, opts.admm, z0, dual0)
    new = ws.state(S_new, res, hp, state.iteration + 1, state.inner_failures)
    if opts.descent_guard and new.g_S > state.g_S - opts.stall_tol:
        log.debug("rolled back %s: g %.6g -> %.6g", move, state.g_S, new.g_S)
        return state, Move("stop"), STOP_STALL
    return new, move, None


def run(ens: MeasurementEnsemble, hp: HyperParams, opts: OuterOptions = OuterOptions(),
        callback: Optional[Callable[[OuterState], None]] = None) -> RecoveryReport:
    """Recover a sparse signal by adaptive support search.

    ``callback`` is called with the initial state and with every
    accepted state afterwards.
    """
    if hp.n != ens.n:
        raise ValueError(f"hyperparameters are for n={hp.n}, ensemble has n={ens.n}")
    ws = Workspace(ens)
    S0 = init_support(hp.gamma)
    state = ws.state(S0, ws.solve(S0, hp.lam, opts.admm), hp, 0)
    trace = [TraceRow(0, len(S0), state.g_S, Move("init"))]
    if callback:
        callback(state)

    cap = opts.outer_cap(ens.n)
    reason = STOP_MAX_OUTER
    outer = 0
    while outer < cap:
        outer += 1
        state, move, stop = step(state, ens, hp, opts, ws)
        trace.append(TraceRow(outer, len(state.S), state.g_S, move))
        if stop is not None:
            reason = stop
            break
        if callback:
            callback(state)

    x = pad(state.S, state.x_S, ens.n)
    est = SignalEstimate(x, state.S, state.g_S)
    return RecoveryReport(est, trace, outer, reason, state.inner_failures)


def enumerate_supports(ens: MeasurementEnsemble, hp: HyperParams,
                       opts: OuterOptions = OuterOptions(), tighten: float = 10.0) -> dict:
    """Restricted optimum for every support, keyed by sorted index tuple.

    Values are ``(g_S, x_S)``; inner tolerances are tightened by ``tighten``.
    """
    if ens.n > ORACLE_MAX_N:
        raise ValueError(f"exhaustive enumeration refused for n={ens.n} > {ORACLE_MAX_N}")
    ws = Workspace(ens)
    admm = opts.admm.tightened(tighten)
    table = {}
    for size in range(ens.n + 1):
        for S in itertools.combinations(range(ens.n), size):
            st = ws.state(S, ws.solve(S, hp.lam, admm), hp, 0)
            table[S] = (st.g_S, st.x_S)
    return table


def oracle_solve(ens: MeasurementEnsemble, hp: HyperParams,
                 opts: OuterOptions = OuterOptions(), table: Optional[dict] = None) -> SignalEstimate:
    """Global minimiser by enumerating all ``2**n`` supports.

    Ties go to the smaller support, then to the lexicographically first.
    """
    table = table if table is not None else enumerate_supports(ens, hp, opts)
    best = None
    for S, (g, x_S) in table.items():  # insertion order is (size, lexicographic)
        if best is None or g < best[1]:
            best = (S, g, x_S)
    S, g, x_S = best
    return SignalEstimate(pad(S, x_S, ens.n), S, g)


def with_nonneg(opts: OuterOptions, nonneg: bool = True) -> OuterOptions:
    return replace(opts, admm=replace(opts.admm, nonneg=nonneg))
