"""MNIST IDX parsing, binarization, and the built-in synthetic digit set.

Images are numpy ``uint8`` arrays of shape ``(rows, cols)``; a stack of
images is ``(count, rows, cols)``. Binary images hold only 0 and 1.
"""

from __future__ import annotations

import gzip
import struct
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np

IMAGE_MAGIC = 0x00000803
LABEL_MAGIC = 0x00000801
SIDE = 28
N_CLASSES = 10

MNIST_FILES = {
    "train": ("train-images-idx3-ubyte", "train-labels-idx1-ubyte"),
    "test": ("t10k-images-idx3-ubyte", "t10k-labels-idx1-ubyte"),
}


class IdxError(ValueError):
    """Base class for dataset parsing problems."""


class IdxFormatError(IdxError):
    pass


class IdxLengthError(IdxError):
    pass


class DataError(IdxError):
    pass


@dataclass(frozen=True)
class Dataset:
    """Binary images with class labels.

    ``images`` is ``(n, 28, 28)`` uint8 in {0, 1}; ``labels`` is ``(n,)``
    uint8 in [0, 9]. ``source_index`` records each image's position in the
    file it came from (``-1`` when not applicable).
    """

    images: np.ndarray
    labels: np.ndarray
    split_name: str = ""
    source_index: np.ndarray = field(default=None)

    def __post_init__(self):
        images = np.asarray(self.images, dtype=np.uint8)
        labels = np.asarray(self.labels, dtype=np.uint8).reshape(-1)
        if images.ndim == 2 and images.size == 0:
            images = images.reshape(0, SIDE, SIDE)
        if images.ndim != 3 or images.shape[1:] != (SIDE, SIDE):
            raise DataError(f"expected (n, 28, 28) images, got {images.shape}")
        if len(images) != len(labels):
            raise DataError(f"{len(images)} images but {len(labels)} labels")
        if labels.size and labels.max() >= N_CLASSES:
            raise DataError("labels must lie in [0, 9]")
        if images.size and images.max() > 1:
            raise DataError("images must be binarized")
        src = self.source_index
        src = np.full(len(labels), -1, dtype=np.int64) if src is None else np.asarray(src, dtype=np.int64)
        for name, value in (("images", images), ("labels", labels), ("source_index", src)):
            value.setflags(write=False)
            object.__setattr__(self, name, value)

    def __len__(self):
        return len(self.labels)


def _check_magic(stream: bytes, expected: int, header_len: int) -> tuple:
    if len(stream) < 4:
        raise IdxLengthError("stream too short for an IDX header")
    (magic,) = struct.unpack(">I", stream[:4])
    if magic != expected:
        raise IdxFormatError(f"bad IDX magic 0x{magic:08x}, expected 0x{expected:08x}")
    if len(stream) < header_len:
        raise IdxLengthError("truncated IDX header")
    return struct.unpack(">" + "I" * (header_len // 4 - 1), stream[4:header_len])


def parse_idx_images(stream: bytes) -> np.ndarray:
    """Parse an IDX3 (unsigned byte) image file into a ``(count, rows, cols)`` array."""
    count, rows, cols = _check_magic(stream, IMAGE_MAGIC, 16)
    expected = count * rows * cols
    payload = memoryview(stream)[16:]
    if len(payload) != expected:
        raise IdxLengthError(f"image payload has {len(payload)} bytes, header implies {expected}")
    return np.frombuffer(payload, dtype=np.uint8).reshape(count, rows, cols).copy()


def parse_idx_labels(stream: bytes) -> np.ndarray:
    """Parse an IDX1 label file. Every label must be a digit class."""
    (count,) = _check_magic(stream, LABEL_MAGIC, 8)
    payload = memoryview(stream)[8:]
    if len(payload) != count:
        raise IdxLengthError(f"label payload has {len(payload)} bytes, header implies {count}")
    labels = np.frombuffer(payload, dtype=np.uint8).copy()
    if labels.size and labels.max() > 9:
        raise DataError(f"label value {int(labels.max())} outside [0, 9]")
    return labels


def write_idx_images(images) -> bytes:
    images = np.asarray(images, dtype=np.uint8)
    count, rows, cols = images.shape
    return struct.pack(">IIII", IMAGE_MAGIC, count, rows, cols) + images.tobytes()


def write_idx_labels(labels) -> bytes:
    labels = np.asarray(labels, dtype=np.uint8)
    return struct.pack(">II", LABEL_MAGIC, len(labels)) + labels.tobytes()


def binarize(img, threshold: int = 127) -> np.ndarray:
    """1 where intensity > threshold, else 0. Works on single images or stacks."""
    return (np.asarray(img) > threshold).astype(np.uint8)


def select_training_subset(images, labels, per_class: int = 100, split_name: str = "train") -> Dataset:
    """First ``per_class`` images of every class, in file order, grouped by class."""
    labels = np.asarray(labels)
    picked = []
    for c in range(N_CLASSES):
        idx = np.flatnonzero(labels == c)[:per_class]
        if len(idx) < per_class:
            raise DataError(f"class {c} has only {len(idx)} images, need {per_class}")
        picked.append(idx)
    order = np.concatenate(picked).astype(np.int64)
    images = np.asarray(images)
    if images.size and images.max() > 1:
        images = binarize(images)
    return Dataset(images[order], labels[order], split_name, order)


def _read_maybe_gz(path: Path) -> bytes:
    for candidate in (path, path.with_name(path.name + ".gz")):
        if candidate.exists():
            data = candidate.read_bytes()
            return gzip.decompress(data) if candidate.suffix == ".gz" else data
    raise FileNotFoundError(f"no IDX file at {path} (or {path}.gz)")


def load_mnist_raw(mnist_dir, split: str = "train") -> tuple[np.ndarray, np.ndarray]:
    """Grayscale images and labels of one official MNIST split."""
    img_name, lbl_name = MNIST_FILES[split]
    mnist_dir = Path(mnist_dir)
    images = parse_idx_images(_read_maybe_gz(mnist_dir / img_name))
    labels = parse_idx_labels(_read_maybe_gz(mnist_dir / lbl_name))
    if len(images) != len(labels):
        raise DataError(f"{split}: {len(images)} images but {len(labels)} labels")
    return images, labels


def load_mnist(mnist_dir, split: str = "train", per_class: int | None = 100) -> Dataset:
    """Binarized MNIST split.

    For ``split="train"`` the default returns the 1,000-image training
    subset; pass ``per_class=None`` for the whole split. The test split is
    always returned whole.
    """
    images, labels = load_mnist_raw(mnist_dir, split)
    if split == "train" and per_class is not None:
        return select_training_subset(images, labels, per_class, split)
    return Dataset(binarize(images), labels, split, np.arange(len(labels)))


# --- portable bitmaps -------------------------------------------------------

def write_pbm(path, bits) -> None:
    bits = np.asarray(bits, dtype=np.uint8)
    rows = "\n".join(" ".join(str(int(b)) for b in row) for row in bits)
    Path(path).write_text(f"P1\n{bits.shape[1]} {bits.shape[0]}\n{rows}\n")


def parse_pbm(text: str) -> np.ndarray:
    """Parse a plain (P1) PBM. Comments (``#`` to end of line) are ignored."""
    tokens = []
    for line in text.splitlines():
        tokens.extend(line.split("#", 1)[0].split())
    if not tokens or tokens[0] != "P1":
        raise IdxFormatError("not a plain PBM (P1) file")
    width, height = int(tokens[1]), int(tokens[2])
    # pixels may be packed without whitespace
    digits = "".join(tokens[3:])
    if len(digits) != width * height or set(digits) - {"0", "1"}:
        raise IdxLengthError(f"PBM payload does not hold {width}x{height} bits")
    return np.frombuffer(digits.encode(), dtype=np.uint8).reshape(height, width) - ord("0")


def synthetic_digits() -> Dataset:
    """Ten clean block digits, one per class, loaded from the bundled PBM files."""
    data = resources.files("saccade") / "data"
    images = [parse_pbm((data / f"digit_{d}.pbm").read_text()) for d in range(N_CLASSES)]
    return Dataset(np.stack(images), np.arange(N_CLASSES), "synthetic")
