"""Plain-text and image writers shared by the experiments and the CLI.

CSV files carry no header when they hold a matrix or vector; numbers use
Python's shortest round-trip ``repr`` so the text is byte-stable.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np


def fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def write_matrix_csv(path, M) -> None:
    M = np.asarray(M, dtype=float)
    if M.ndim == 1:
        M = M[:, None]
    with open(path, "w") as fh:
        for row in M:
            fh.write(",".join(repr(float(v)) for v in row) + "\n")


def read_matrix_csv(path) -> np.ndarray:
    return np.loadtxt(path, delimiter=",", ndmin=2, dtype=float)


def read_vector_csv(path) -> np.ndarray:
    M = read_matrix_csv(path)
    if M.shape[1] != 1 and M.shape[0] != 1:
        raise ValueError(f"{path}: expected a single column, got shape {M.shape}")
    return M.ravel()


def write_rows_csv(path, header, rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([fmt(v) for v in row])


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def write_json(path, obj) -> None:
    with open(path, "w") as fh:
        json.dump(_jsonable(obj), fh, indent=2, sort_keys=True, allow_nan=False)
        fh.write("\n")


def write_pgm(path, image) -> None:
    """8-bit binary PGM (P5); values are clipped to [0, 1] and scaled to 0-255."""
    img = np.clip(np.asarray(image, dtype=float), 0.0, 1.0)
    data = np.rint(img * 255).astype(np.uint8)
    rows, cols = data.shape
    with open(path, "wb") as fh:
        fh.write(f"P5\n{cols} {rows}\n255\n".encode("ascii"))
        fh.write(data.tobytes())


def read_pgm(path) -> np.ndarray:
    raw = Path(path).read_bytes()
    tokens, pos = [], 0
    while len(tokens) < 4:
        while raw[pos:pos + 1].isspace():
            pos += 1
        end = pos
        while not raw[end:end + 1].isspace():
            end += 1
        tokens.append(raw[pos:end])
        pos = end
    if tokens[0] != b"P5":
        raise ValueError(f"{path} is not a binary PGM")
    cols, rows, maxval = (int(t) for t in tokens[1:])
    # exactly one whitespace byte separates the header from the pixels
    data = np.frombuffer(raw, dtype=np.uint8, count=rows * cols, offset=pos + 1)
    return data.reshape(rows, cols) / maxval
