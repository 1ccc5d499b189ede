"""Write a small MNIST subset in IDX format for the test suite.

The pixels come from the 5000-image MNIST sample bundled with mlxtend
(``pip install mlxtend``). Three images per digit are written,
interleaved round-robin by label, to

    tests/data/mnist-subset-images-idx3-ubyte
    tests/data/mnist-subset-labels-idx1-ubyte
"""

import gzip
import struct
import sys
from pathlib import Path

import numpy as np
from mlxtend.data import mnist as mlx_mnist

PER_DIGIT = 3


def main(out_dir="tests/data"):
    path = Path(mlx_mnist.DATA_PATH)
    with gzip.open(path, "rt") as fh:
        rows = np.loadtxt(fh, delimiter=",", dtype=np.int64)
    pixels, labels = rows[:, :-1].astype(np.uint8), rows[:, -1].astype(np.uint8)
    picks = [np.flatnonzero(labels == d)[:PER_DIGIT] for d in range(10)]
    order = [p[r] for r in range(PER_DIGIT) for p in picks]
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "mnist-subset-images-idx3-ubyte", "wb") as fh:
        fh.write(struct.pack(">iiii", 2051, len(order), 28, 28))
        fh.write(pixels[order].tobytes())
    with open(out / "mnist-subset-labels-idx1-ubyte", "wb") as fh:
        fh.write(struct.pack(">ii", 2049, len(order)))
        fh.write(labels[order].tobytes())
    print(f"wrote {len(order)} images to {out}")


if __name__ == "__main__":
    main(*sys.argv[1:])
