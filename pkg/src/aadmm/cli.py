"""Command-line entry point: ``aadmm {gen,solve,bench,sweep,trace,mnist}``.

Exit codes: 0 success, 1 usage error, 2 I/O error, 3 solver
non-convergence (only with ``--strict``).
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .adaptive import OuterOptions, run
from .datagen import (DEFAULT_K, DEFAULT_LAMBDA, DEFAULT_M, DEFAULT_N, DEFAULT_SIGMA2, RNG_NAME,
                      SynthConfig, gen_problem)
from .experiments import (KAPPA_RATE, BenchmarkConfig, MnistConfig, convergence_trace,
                          mnist_experiment, run_benchmark, run_sweep, write_sweep, write_trace)
from .fileio import read_matrix_csv, read_vector_csv, write_json, write_matrix_csv
from .inner import AdmmOptions
from .metrics import mse, sml, sparsity_level, support_of
from .mnist_io import IdxError
from .model import HyperParams, MeasurementEnsemble, full_objective, normalize_columns

EXIT_OK, EXIT_USAGE, EXIT_IO, EXIT_NONCONVERGED = 0, 1, 2, 3

log = logging.getLogger("aadmm")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _positive(kind):
    def conv(text):
        try:
            v = kind(text)
        except ValueError:
            raise argparse.ArgumentTypeError(f"invalid {kind.__name__} value: {text!r}")
        if v <= 0:
            raise argparse.ArgumentTypeError(f"must be positive: {text!r}")
        return v
    return conv


def _nonneg_int(text):
    v = int(text)
    if v < 0:
        raise argparse.ArgumentTypeError(f"must be nonnegative: {text!r}")
    return v


def _kappa(text):
    if text == KAPPA_RATE:
        return text
    v = float(text)
    if not 0 < v < 1:
        raise argparse.ArgumentTypeError(f"kappa must be 'rate' or lie in (0, 1): {text!r}")
    return v


def _float_list(text):
    try:
        return tuple(float(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers: {text!r}")


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--out", type=Path, default=Path("."), help="output directory")
    common.add_argument("--workers", type=_positive(int), default=1)
    common.add_argument("--nonneg", action="store_true", help="non-negative signal mode")
    common.add_argument("--lambda", dest="lam", type=_positive(float), default=DEFAULT_LAMBDA)
    common.add_argument("--sigma2", type=_positive(float), default=DEFAULT_SIGMA2)
    common.add_argument("--kappa", type=_kappa, default=KAPPA_RATE,
                        help="prior inclusion probability, or 'rate' for k/n")
    common.add_argument("--rho", type=_positive(float), default=1.0)
    common.add_argument("--tol", type=_positive(float), default=1e-6,
                        help="ADMM relative tolerance; absolute tolerance is tol/100")
    common.add_argument("--max-outer", type=_positive(int), default=None,
                        help="outer iteration cap (default 4n)")
    common.add_argument("--strict", action="store_true",
                        help="exit with code 3 if any solve fails to converge")
    common.add_argument("-v", "--verbose", action="store_true")

    size = _Parser(add_help=False)
    size.add_argument("--n", type=_positive(int), default=DEFAULT_N)
    size.add_argument("--m", type=_positive(int), default=DEFAULT_M)
    size.add_argument("--k", type=_nonneg_int, default=DEFAULT_K)
    size.add_argument("--laplace-scale", type=_positive(float), default=None,
                      help="slab scale of the true signal (default 2*sigma2/lambda)")

    p = _Parser(prog="aadmm", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)
    sub.add_parser("gen", parents=[common, size], help="write A.csv, x.csv, y.csv")
    s = sub.add_parser("solve", parents=[common], help="recover x from A.csv and y.csv")
    s.add_argument("--A", dest="A_path", type=Path, default=None, help="default OUT/A.csv")
    s.add_argument("--y", dest="y_path", type=Path, default=None, help="default OUT/y.csv")
    s.add_argument("--x", dest="x_path", type=Path, default=None,
                   help="ground truth for metrics (optional)")
    s.add_argument("--k", type=_positive(int), default=None,
                   help="expected sparsity for --kappa rate (default: from --x, else 30)")
    b = sub.add_parser("bench", parents=[common, size], help="repeated synthetic trials")
    b.add_argument("--trials", type=_positive(int), default=50)
    w = sub.add_parser("sweep", parents=[common, size], help="benchmark over a parameter grid")
    w.add_argument("--trials", type=_positive(int), default=50)
    w.add_argument("--axis", choices=("sparsity", "noise", "lambda"), required=True)
    w.add_argument("--values", type=_float_list, required=True,
                   help="comma-separated ascending values")
    t = sub.add_parser("trace", parents=[common, size], help="per-iteration MSE and objective")
    t.add_argument("--trial", type=_nonneg_int, default=0)
    mn = sub.add_parser("mnist", parents=[common], help="recover MNIST digits")
    mn.add_argument("--images", type=Path, required=True)
    mn.add_argument("--labels", type=Path, required=True)
    mn.add_argument("--gunzip", action="store_true", help="inputs are gzip-compressed")
    mn.add_argument("--m", type=_positive(int), default=550)
    return p


def outer_options(args, nonneg=None) -> OuterOptions:
    admm = AdmmOptions(rho=args.rho, abs_tol=args.tol / 100, rel_tol=args.tol,
                       nonneg=args.nonneg if nonneg is None else nonneg)
    return OuterOptions(admm=admm, max_outer=args.max_outer)


def synth_config(args) -> SynthConfig:
    return SynthConfig(n=args.n, m=args.m, k=args.k, sigma2=args.sigma2, lam=args.lam,
                       laplace_scale=args.laplace_scale, nonneg=args.nonneg, seed=args.seed)


def bench_config(args, **extra) -> BenchmarkConfig:
    return BenchmarkConfig(synth=synth_config(args), trials=getattr(args, "trials", 1),
                           kappa=args.kappa, opts=outer_options(args), **extra)


def _echo(args, out: Path, extra=None) -> None:
    # the output location is not a parameter of the result
    cfg = {k: (str(v) if isinstance(v, Path) else v) for k, v in vars(args).items() if k != "out"}
    cfg["version"] = __version__
    cfg["rng"] = RNG_NAME
    cfg.update(extra or {})
    write_json(out / "config.json", cfg)


def cmd_gen(args) -> int:
    cfg = synth_config(args)
    ens, x, y = gen_problem(cfg)
    write_matrix_csv(args.out / "A.csv", ens.A)
    write_matrix_csv(args.out / "x.csv", x)
    write_matrix_csv(args.out / "y.csv", y)
    _echo(args, args.out, {"synth": cfg.to_dict()})
    return EXIT_OK


def cmd_solve(args) -> int:
    A_path = args.A_path or args.out / "A.csv"
    y_path = args.y_path or args.out / "y.csv"
    A_raw = read_matrix_csv(A_path)
    y = read_vector_csv(y_path)
    x_true = read_vector_csv(args.x_path) if args.x_path else None
    if y.shape[0] != A_raw.shape[0]:
        raise UsageError(f"{y_path} has {y.shape[0]} entries, {A_path} has {A_raw.shape[0]} rows")
    A, scales = normalize_columns(A_raw)
    ens = MeasurementEnsemble(A, y)
    if args.kappa == KAPPA_RATE:
        k = args.k or (sparsity_level(x_true) if x_true is not None else DEFAULT_K)
        kappa = min(max(k, 1), ens.n - 1) / ens.n
    else:
        kappa = args.kappa
    hp = HyperParams.uniform(args.lam, args.sigma2, kappa, ens.n)
    rep = run(ens, hp, outer_options(args))
    # back to the coordinates of the supplied matrix
    x_hat = rep.estimate.x / scales
    write_matrix_csv(args.out / "x_hat.csv", x_hat)
    with open(args.out / "support.csv", "w") as fh:
        fh.writelines(f"{i}\n" for i in rep.estimate.support)
    report = {
        "ofv": full_objective(ens, hp, rep.estimate.x, rep.estimate.omega),
        "sl": sparsity_level(x_hat),
        "stop_reason": rep.stop_reason,
        "outer_iterations": rep.outer_iterations,
        "inner_failures": rep.inner_failures,
        "kappa": kappa,
        "columns_rescaled": bool(np.any(np.abs(scales - 1) > 1e-9)),
        "trace": [{"iteration": r.iteration, "size": r.size, "g_S": r.g_S, "move": str(r.move)}
                  for r in rep.trace],
    }
    if x_true is not None:
        report["mse"] = mse(x_hat, x_true)
        report["sml"] = sml(support_of(x_hat), support_of(x_true), ens.n)
    write_json(args.out / "report.json", report)
    _echo(args, args.out)
    failed = rep.inner_failures > 0 or rep.stop_reason == "max_outer"
    return EXIT_NONCONVERGED if args.strict and failed else EXIT_OK


def _agg_failed(agg) -> bool:
    return any(r.inner_failures or r.stop_reason == "max_outer" for r in agg.rows)


def cmd_bench(args) -> int:
    cfg = bench_config(args)
    agg = run_benchmark(cfg, args.workers)
    agg.write(args.out)
    _echo(args, args.out, {"benchmark": cfg.to_dict()})
    m = agg.mean
    print(f"mse={m['mse']:.4g} sml={m['sml']:.4g} sl={m['sl']:.4g} "
          f"ofv={m['ofv']:.4g} ct={m['ct_seconds']:.4g}s over {cfg.trials} trials")
    return EXIT_NONCONVERGED if args.strict and _agg_failed(agg) else EXIT_OK


def cmd_sweep(args) -> int:
    cfg = bench_config(args, sweep_axis=args.axis, sweep_values=args.values)
    results = run_sweep(cfg, args.workers)
    write_sweep(cfg, results, args.out)
    _echo(args, args.out, {"benchmark": cfg.to_dict()})
    for v, agg in results:
        print(f"{args.axis}={v:g} mse={agg.mean['mse']:.4g} sml={agg.mean['sml']:.4g}")
    failed = any(_agg_failed(agg) for _, agg in results)
    return EXIT_NONCONVERGED if args.strict and failed else EXIT_OK


def cmd_trace(args) -> int:
    cfg = bench_config(args)
    rows = convergence_trace(cfg, args.trial)
    write_trace(rows, args.out)
    _echo(args, args.out, {"benchmark": cfg.to_dict()})
    return EXIT_OK


def cmd_mnist(args) -> int:
    cfg = MnistConfig(m=args.m, sigma2=args.sigma2, lam=args.lam, kappa=args.kappa,
                      seed=args.seed, opts=outer_options(args, nonneg=True))
    per_digit, agg = mnist_experiment(args.images, args.labels, cfg, args.out, args.gunzip)
    _echo(args, args.out, {"mnist": cfg.to_dict()})
    m = agg.mean
    print(f"mse={m['mse']:.4g} sml={m['sml']:.4g} ct={m['ct_seconds']:.4g}s over "
          f"{len(per_digit)} digits")
    return EXIT_NONCONVERGED if args.strict and _agg_failed(agg) else EXIT_OK


COMMANDS = {"gen": cmd_gen, "solve": cmd_solve, "bench": cmd_bench, "sweep": cmd_sweep,
            "trace": cmd_trace, "mnist": cmd_mnist}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(f"aadmm: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        args.out.mkdir(parents=True, exist_ok=True)
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"aadmm: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (OSError, IdxError) as exc:
        print(f"aadmm: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except ValueError as exc:
        print(f"aadmm: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
