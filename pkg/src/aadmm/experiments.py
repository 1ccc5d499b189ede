"""Benchmarks, parameter sweeps, convergence traces and the MNIST study.

Every trial draws its problem from ``seed ^ trial_index``, so any row of
any output can be regenerated from the configuration and its index.
"""

from __future__ import annotations

import math
from collections import Counter
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Optional, Sequence, Union

import numpy as np
from scipy import stats

from . import __version__
from .adaptive import OuterOptions, run, with_nonneg
from .datagen import (MATRIX, NOISE, RNG_NAME, SynthConfig, gen_matrix, gen_noise,
                      gen_problem, rng_stream)
from .fileio import write_json, write_pgm, write_rows_csv
from .inner import solve_restricted
from .metrics import CSV_FIELDS, TrialResult, mse, sml, sparsity_level, support_of
from .mnist_io import first_of_each_digit, image_to_signal, load_digits, signal_to_image
from .model import HyperParams, MeasurementEnsemble, SignalEstimate, full_objective

KAPPA_RATE = "rate"
SWEEP_AXES = ("sparsity", "noise", "lambda")
METRICS = ("mse", "sml", "ofv", "sl", "ct_seconds", "outer_iterations")
HIST_BINS = 30


@dataclass(frozen=True)
class BenchmarkConfig:
    synth: SynthConfig = field(default_factory=SynthConfig)
    trials: int = 50
    kappa: Union[str, float] = KAPPA_RATE  # "rate" means k / n
    opts: OuterOptions = field(default_factory=OuterOptions)
    sweep_axis: Optional[str] = None
    sweep_values: tuple = ()

    def __post_init__(self):
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if self.kappa != KAPPA_RATE and not 0 < float(self.kappa) < 1:
            raise ValueError(f"kappa must be 'rate' or lie in (0, 1), got {self.kappa}")
        if self.sweep_axis is not None:
            if self.sweep_axis not in SWEEP_AXES:
                raise ValueError(f"unknown sweep axis {self.sweep_axis!r}")
            if not self.sweep_values:
                raise ValueError("sweep values must be non-empty")

    def hyperparams(self, synth: Optional[SynthConfig] = None) -> HyperParams:
        s = synth or self.synth
        kappa = s.k / s.n if self.kappa == KAPPA_RATE else float(self.kappa)
        return HyperParams.uniform(s.lam, s.sigma2, kappa, s.n)

    def to_dict(self) -> dict:
        return {
            "synth": self.synth.to_dict(),
            "trials": self.trials,
            "kappa": self.kappa,
            "opts": asdict(self.opts),
            "sweep_axis": self.sweep_axis,
            "sweep_values": list(self.sweep_values),
            "rng": RNG_NAME,
            "version": __version__,
        }


@dataclass
class AggregateResult:
    mean: dict
    stderr: dict
    rows: list
    config: dict

    def to_dict(self) -> dict:
        return {"config": self.config, "n_trials": len(self.rows),
                "mean": self.mean, "stderr": self.stderr,
                "inner_failures": sum(r.inner_failures for r in self.rows),
                "stop_reasons": dict(Counter(r.stop_reason for r in self.rows))}

    def write(self, out_dir) -> None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        write_rows_csv(out / "results.csv", CSV_FIELDS, [r.csv_row() for r in self.rows])
        write_json(out / "aggregate.json", self.to_dict())
        write_rows_csv(out / "hist.csv", ("bin_left", "bin_right", "count"),
                       histogram([r.mse for r in self.rows]))


def trial_seed(seed: int, trial_index: int) -> int:
    return int(seed) ^ int(trial_index)


def evaluate(est: SignalEstimate, x_true, ens, hp, ct: float, outer: int, seed: int,
             failures: int = 0, stop_reason: str = "") -> TrialResult:
    return TrialResult(
        mse=mse(est.x, x_true),
        sml=sml(support_of(est.x), support_of(x_true), x_true.shape[0]),
        ofv=full_objective(ens, hp, est.x, est.omega),
        sl=sparsity_level(est.x),
        ct_seconds=ct,
        outer_iterations=outer,
        seed=seed,
        inner_failures=failures,
        stop_reason=stop_reason,
    )


def run_trial(cfg: BenchmarkConfig, trial_index: int) -> TrialResult:
    seed = trial_seed(cfg.synth.seed, trial_index)
    synth = replace(cfg.synth, seed=seed)
    ens, x_true, _ = gen_problem(synth)
    hp = cfg.hyperparams(synth)
    opts = with_nonneg(cfg.opts, synth.nonneg)
    t0 = time.perf_counter()
    rep = run(ens, hp, opts)
    ct = time.perf_counter() - t0
    return evaluate(rep.estimate, x_true, ens, hp, ct, rep.outer_iterations, seed,
                    rep.inner_failures, rep.stop_reason)


def _run_one(args):
    return run_trial(*args)


def aggregate(rows: Sequence[TrialResult], config: dict) -> AggregateResult:
    """Means and standard errors; ``rows`` must already be in trial order."""
    rows = list(rows)
    mean, se = {}, {}
    for name in METRICS:
        vals = [float(getattr(r, name)) for r in rows]
        mu = math.fsum(vals) / len(vals)
        mean[name] = mu
        if len(vals) > 1:
            var = math.fsum((v - mu) ** 2 for v in vals) / (len(vals) - 1)
            se[name] = math.sqrt(var / len(vals))
        else:
            se[name] = None
    return AggregateResult(mean, se, rows, config)


def run_benchmark(cfg: BenchmarkConfig, workers: int = 1) -> AggregateResult:
    """Run ``cfg.trials`` independent trials and aggregate them.

    ``workers > 1`` runs trials in separate processes; outputs are
    identical either way except for timings.
    """
    jobs = [(cfg, i) for i in range(cfg.trials)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_run_one, jobs))
    else:
        rows = [_run_one(j) for j in jobs]
    return aggregate(rows, cfg.to_dict())


def _sweep_synth(base: SynthConfig, axis: str, value) -> SynthConfig:
    # the signal scale stays at the base value so only the swept quantity moves
    pinned = replace(base, laplace_scale=base.scale)
    if axis == "sparsity":
        return replace(pinned, k=int(value))
    if axis == "noise":
        return replace(pinned, sigma2=float(value))
    return replace(pinned, lam=float(value))


def run_sweep(cfg: BenchmarkConfig, workers: int = 1) -> list:
    """One :class:`AggregateResult` per swept value, as ``(value, result)`` pairs."""
    if cfg.sweep_axis is None:
        raise ValueError("configuration has no sweep axis")
    values = list(cfg.sweep_values)
    if values != sorted(values):
        raise ValueError("sweep values must be sorted ascending")
    out = []
    for v in values:
        sub = replace(cfg, synth=_sweep_synth(cfg.synth, cfg.sweep_axis, v),
                      sweep_axis=None, sweep_values=())
        out.append((v, run_benchmark(sub, workers)))
    return out


def sweep_rows(cfg: BenchmarkConfig, results) -> list:
    return [(cfg.sweep_axis, v, name, agg.mean[name], agg.stderr[name])
            for v, agg in results for name in METRICS]


def write_sweep(cfg: BenchmarkConfig, results, out_dir) -> None:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    rows = [r[:4] + ("" if r[4] is None else r[4],) for r in sweep_rows(cfg, results)]
    write_rows_csv(out / "sweep.csv", ("axis", "axis_value", "metric", "mean", "stderr"), rows)
    write_json(out / "aggregate.json", {
        "config": cfg.to_dict(),
        "points": [{"axis_value": v, **agg.to_dict()} for v, agg in results],
    })


def spearman_trend(values, means) -> float:
    return float(stats.spearmanr(values, means).statistic)


def histogram(values, bins: int = HIST_BINS) -> list:
    """``(bin_left, bin_right, count)`` rows over the observed range."""
    values = np.asarray(values, dtype=float)
    lo, hi = float(values.min()), float(values.max())
    if lo == hi:
        lo, hi = lo - 0.5 * abs(lo or 1.0), hi + 0.5 * abs(hi or 1.0)
    counts, edges = np.histogram(values, bins=bins, range=(lo, hi))
    return [(float(edges[i]), float(edges[i + 1]), int(c)) for i, c in enumerate(counts)]


def convergence_trace(cfg: BenchmarkConfig, trial_index: int = 0) -> list:
    """``(mode, outer_iteration, mse, g_S)`` after every accepted outer step.

    Both the unconstrained and the non-negative modes are traced; the
    non-negative run uses a non-negative ground truth.
    """
    rows = []
    for mode, nonneg in (("unconstrained", False), ("nonneg", True)):
        synth = replace(cfg.synth, nonneg=nonneg,
                        seed=trial_seed(cfg.synth.seed, trial_index))
        ens, x_true, _ = gen_problem(synth)
        hp = cfg.hyperparams(synth)

        def record(state, mode=mode, x_true=x_true, n=synth.n):
            x = np.zeros(n)
            x[list(state.S)] = state.x_S
            rows.append((mode, state.iteration, mse(x, x_true), state.g_S))

        run(ens, hp, with_nonneg(cfg.opts, nonneg), callback=record)
    return rows


def write_trace(rows, out_dir) -> None:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    write_rows_csv(out / "trace.csv", ("mode", "outer_iteration", "mse", "g_s"), rows)


def baseline_lasso(ens: MeasurementEnsemble, hp: HyperParams,
                   opts: OuterOptions = OuterOptions()) -> SignalEstimate:
    """Plain LASSO over all indices (no inclusion penalties)."""
    res = solve_restricted(ens.A, ens.y, hp.lam, opts.admm)
    x = res.x_S
    r = ens.y - ens.A @ x
    return SignalEstimate(x, support_of(x), float(r @ r + hp.lam * np.abs(x).sum()))


@dataclass(frozen=True)
class MnistConfig:
    m: int = 550
    sigma2: float = 3.24e-4
    lam: float = 2e-4
    kappa: Union[str, float] = KAPPA_RATE  # "rate": the image's own sparsity / 784
    seed: int = 0
    opts: OuterOptions = field(default_factory=lambda: with_nonneg(OuterOptions()))

    def to_dict(self) -> dict:
        d = asdict(self)
        d["rng"] = RNG_NAME
        d["version"] = __version__
        return d


MNIST_FIELDS = ("digit",) + CSV_FIELDS


def mnist_experiment(image_path, label_path, cfg: MnistConfig = MnistConfig(),
                     out_dir=None, gunzip: bool = False):
    """Recover the first image of each digit from Gaussian measurements.

    Returns ``(per_digit, aggregate)`` where ``per_digit`` is a list of
    ``(digit, TrialResult, x_hat)``. With ``out_dir`` set, CSV/JSON
    results and PGM images of originals, recoveries and supports are
    written there.
    """
    digits = first_of_each_digit(load_digits(image_path, label_path, gunzip))
    opts = with_nonneg(cfg.opts, True)
    per_digit = []
    for img in digits:
        x_true = image_to_signal(img)
        n = x_true.shape[0]
        seed = trial_seed(cfg.seed, img.label)
        A = gen_matrix(cfg.m, n, rng_stream(seed, MATRIX))
        y = A @ x_true + gen_noise(cfg.m, cfg.sigma2, rng_stream(seed, NOISE))
        ens = MeasurementEnsemble(A, y)
        kappa = (max(sparsity_level(x_true), 1) / n if cfg.kappa == KAPPA_RATE
                 else float(cfg.kappa))
        hp = HyperParams.uniform(cfg.lam, cfg.sigma2, kappa, n)
        t0 = time.perf_counter()
        rep = run(ens, hp, opts)
        ct = time.perf_counter() - t0
        res = evaluate(rep.estimate, x_true, ens, hp, ct, rep.outer_iterations, seed,
                       rep.inner_failures, rep.stop_reason)
        per_digit.append((img.label, res, rep.estimate.x))

    agg = aggregate([r for _, r, _ in per_digit], cfg.to_dict())
    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        write_rows_csv(out / "results.csv", MNIST_FIELDS,
                       [(d,) + tuple(r.csv_row()) for d, r, _ in per_digit])
        summary = agg.to_dict()
        summary["supports"] = {str(d): r.sl for d, r, _ in per_digit}
        write_json(out / "aggregate.json", summary)
        for (d, r, x_hat), img in zip(per_digit, digits):
            write_pgm(out / f"digit{d}_original.pgm", img.pixels)
            write_pgm(out / f"digit{d}_original_support.pgm", img.pixels > 0)
            write_pgm(out / f"digit{d}_recovered.pgm", signal_to_image(x_hat))
            write_pgm(out / f"digit{d}_recovered_support.pgm", signal_to_image(x_hat) > 0)
    return per_digit, agg
