import json
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

from aadmm.cli import EXIT_IO, EXIT_NONCONVERGED, EXIT_OK, EXIT_USAGE, main
from aadmm.fileio import read_matrix_csv, read_pgm, write_matrix_csv

DATA = Path(__file__).parent / "data"
IMAGES = str(DATA / "mnist-subset-images-idx3-ubyte")
LABELS = str(DATA / "mnist-subset-labels-idx1-ubyte")
SMALL = ["--n", "96", "--m", "40", "--k", "6"]


def test_usage_errors(tmp_path, capsys):
    assert main(["--bogus"]) == EXIT_USAGE
    assert main(["bench", "--trials", "0", "--out", str(tmp_path)]) == EXIT_USAGE
    assert main(["sweep", "--axis", "noise", "--values", "a,b"]) == EXIT_USAGE
    assert main(["bench", "--kappa", "2"]) == EXIT_USAGE
    assert "error" in capsys.readouterr().err


def test_missing_matrix_is_io_error(tmp_path, capsys):
    code = main(["solve", "--out", str(tmp_path)])
    assert code == EXIT_IO
    assert "A.csv" in capsys.readouterr().err


def test_shape_mismatch(tmp_path):
    write_matrix_csv(tmp_path / "A.csv", np.eye(3))
    write_matrix_csv(tmp_path / "y.csv", np.ones(4))
    assert main(["solve", "--out", str(tmp_path)]) == EXIT_USAGE


def test_gen_then_solve(tmp_path):
    out = str(tmp_path)
    assert main(["gen", "--seed", "3", "--out", out] + SMALL) == EXIT_OK
    A = read_matrix_csv(tmp_path / "A.csv")
    assert A.shape == (40, 96)
    assert read_matrix_csv(tmp_path / "x.csv").shape == (96, 1)
    cfg = json.loads((tmp_path / "config.json").read_text())
    assert cfg["seed"] == 3 and cfg["synth"]["n"] == 96 and "rng" in cfg
    assert main(["solve", "--out", out, "--x", str(tmp_path / "x.csv")]) == EXIT_OK
    rep = json.loads((tmp_path / "report.json").read_text())
    assert {"ofv", "sl", "stop_reason", "trace", "mse", "sml"} <= set(rep)
    assert rep["stop_reason"] == "bounds_nonneg"
    support = (tmp_path / "support.csv").read_text().split()
    x_hat = read_matrix_csv(tmp_path / "x_hat.csv").ravel()
    assert [int(i) for i in support] == list(np.flatnonzero(x_hat))


def test_solve_byte_identical(tmp_path):
    runs = []
    for name in ("a", "b"):
        d = tmp_path / name
        assert main(["gen", "--seed", "7", "--out", str(d)] + SMALL) == EXIT_OK
        assert main(["solve", "--seed", "7", "--out", str(d)]) == EXIT_OK
        runs.append(d)
    for f in ("x_hat.csv", "support.csv", "report.json", "config.json"):
        assert (runs[0] / f).read_bytes() == (runs[1] / f).read_bytes(), f


def test_solve_rescales_unnormalised_columns(tmp_path):
    rng = np.random.default_rng(0)
    A = rng.standard_normal((30, 12))
    A /= np.linalg.norm(A, axis=0)
    x = np.zeros(12)
    x[[2, 7]] = [1.5, -2.0]
    scale = np.linspace(0.5, 3, 12)
    write_matrix_csv(tmp_path / "A.csv", A * scale)
    write_matrix_csv(tmp_path / "y.csv", A @ x)
    assert main(["solve", "--out", str(tmp_path), "--k", "2"]) == EXIT_OK
    x_hat = read_matrix_csv(tmp_path / "x_hat.csv").ravel()
    assert np.allclose(x_hat * scale, x, atol=1e-3)
    assert json.loads((tmp_path / "report.json").read_text())["columns_rescaled"] is True


def test_strict_flags_capped_runs(tmp_path):
    args = ["bench", "--trials", "1", "--max-outer", "1", "--out", str(tmp_path)] + SMALL
    assert main(args) == EXIT_OK
    assert main(args + ["--strict"]) == EXIT_NONCONVERGED


def test_bench(tmp_path, capsys):
    assert main(["bench", "--trials", "3", "--out", str(tmp_path)] + SMALL) == EXIT_OK
    assert "mse=" in capsys.readouterr().out
    doc = json.loads((tmp_path / "aggregate.json").read_text())
    assert doc["n_trials"] == 3
    assert (tmp_path / "results.csv").exists() and (tmp_path / "hist.csv").exists()


def test_sweep(tmp_path):
    args = ["sweep", "--trials", "2", "--axis", "lambda", "--values", "1e-4,1e-3",
            "--out", str(tmp_path)] + SMALL
    assert main(args) == EXIT_OK
    assert len((tmp_path / "sweep.csv").read_text().splitlines()) == 1 + 2 * 6
    bad = ["sweep", "--trials", "1", "--axis", "lambda", "--values", "1e-3,1e-4",
           "--out", str(tmp_path)] + SMALL
    assert main(bad) == EXIT_USAGE


def test_trace(tmp_path):
    assert main(["trace", "--trial", "2", "--out", str(tmp_path)] + SMALL) == EXIT_OK
    lines = (tmp_path / "trace.csv").read_text().splitlines()
    assert lines[0] == "mode,outer_iteration,mse,g_s"
    assert {l.split(",")[0] for l in lines[1:]} == {"unconstrained", "nonneg"}


def test_mnist(tmp_path):
    assert main(["mnist", "--images", IMAGES, "--labels", LABELS,
                 "--out", str(tmp_path)]) == EXIT_OK
    rows = (tmp_path / "results.csv").read_text().splitlines()
    assert rows[0].startswith("digit,seed,mse") and len(rows) == 11
    img = read_pgm(tmp_path / "digit3_recovered.pgm")
    assert img.shape == (28, 28) and img.min() >= 0
    assert len(list(tmp_path.glob("*.pgm"))) == 40


def test_mnist_missing_file(tmp_path):
    assert main(["mnist", "--images", str(tmp_path / "nope"), "--labels", LABELS,
                 "--out", str(tmp_path)]) == EXIT_IO


def test_mnist_corrupt_file(tmp_path):
    bad = tmp_path / "bad"
    bad.write_bytes(b"\0\0\0\1garbage")
    assert main(["mnist", "--images", str(bad), "--labels", LABELS,
                 "--out", str(tmp_path)]) == EXIT_IO


def test_module_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "aadmm", "gen", "--out", str(tmp_path)] + SMALL,
                          capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
    assert (tmp_path / "y.csv").exists()
