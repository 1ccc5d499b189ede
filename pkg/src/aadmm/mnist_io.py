"""Read MNIST digits from IDX files and turn them into sparse signals."""

from __future__ import annotations

import gzip
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

IMAGE_MAGIC = 2051
LABEL_MAGIC = 2049


class IdxError(ValueError):
    """Base class for malformed IDX input."""


class BadMagicError(IdxError):
    pass


class TruncatedError(IdxError):
    pass


class DimensionMismatchError(IdxError):
    pass


@dataclass(frozen=True)
class DigitImage:
    pixels: np.ndarray  # (28, 28), values in [0, 1]
    label: int = -1

    def __post_init__(self):
        px = np.asarray(self.pixels, dtype=float)
        if px.shape != (28, 28):
            raise DimensionMismatchError(f"expected a 28x28 image, got {px.shape}")
        if px.min() < 0 or px.max() > 1:
            raise ValueError("pixel values must lie in [0, 1]")
        object.__setattr__(self, "pixels", px)


def _header(data: bytes, n_ints: int):
    need = 4 * n_ints
    if len(data) < need:
        raise TruncatedError(f"header needs {need} bytes, stream has {len(data)}")
    return struct.unpack(f">{n_ints}i", data[:need])


def parse_idx(data: bytes):
    """Decode an IDX image or label file.

    Returns an ``(count, rows, cols)`` float array scaled to ``[0, 1]``
    for image files, or an integer label array for label files.
    """
    (magic,) = _header(data, 1)
    if magic == IMAGE_MAGIC:
        _, count, rows, cols = _header(data, 4)
        if (rows, cols) != (28, 28):
            raise DimensionMismatchError(f"expected 28x28 images, header says {rows}x{cols}")
        offset, shape = 16, (count, rows, cols)
    elif magic == LABEL_MAGIC:
        _, count = _header(data, 2)
        offset, shape = 8, (count,)
    else:
        raise BadMagicError(f"unknown IDX magic number {magic}")
    expected = offset + int(np.prod(shape))
    if len(data) < expected:
        raise TruncatedError(f"expected {expected} bytes, got {len(data)}")
    if len(data) > expected:
        raise DimensionMismatchError(
            f"header implies {expected} bytes but stream has {len(data)}")
    raw = np.frombuffer(data, dtype=np.uint8, offset=offset).reshape(shape)
    if magic == LABEL_MAGIC:
        return raw.astype(np.int64)
    return raw / 255.0


def read_idx(path, gunzip: bool = False):
    path = Path(path)
    opener = gzip.open if gunzip else open
    with opener(path, "rb") as fh:
        return parse_idx(fh.read())


def load_digits(image_path, label_path=None, gunzip=False) -> list:
    images = read_idx(image_path, gunzip)
    if images.ndim != 3:
        raise BadMagicError(f"{image_path} is not an image file")
    if label_path is None:
        return [DigitImage(px) for px in images]
    labels = read_idx(label_path, gunzip)
    if labels.ndim != 1:
        raise BadMagicError(f"{label_path} is not a label file")
    if labels.shape[0] != images.shape[0]:
        raise DimensionMismatchError(
            f"{images.shape[0]} images but {labels.shape[0]} labels")
    return [DigitImage(px, int(lb)) for px, lb in zip(images, labels)]


def first_of_each_digit(digits) -> list:
    """The first image carrying each label 0-9, ordered by label."""
    found = {}
    for d in digits:
        found.setdefault(d.label, d)
    missing = [k for k in range(10) if k not in found]
    if missing:
        raise ValueError(f"no image for digit(s) {missing}")
    return [found[k] for k in range(10)]


def image_to_signal(img: DigitImage) -> np.ndarray:
    """Row-major flattening to a length-784 vector."""
    return img.pixels.reshape(-1).copy()


def signal_to_image(x) -> np.ndarray:
    return np.asarray(x, dtype=float).reshape(28, 28)
