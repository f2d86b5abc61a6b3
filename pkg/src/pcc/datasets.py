"""Dataset ingestion, rescaling and seeded balanced splits.

Readers cover MNIST IDX files (optionally gzipped) and delimited text tables
such as the UCI wine and australian files.  Features are stored ``d_x x N``
(one column per instance); labels are 1-based.
"""
from __future__ import annotations

import csv
import gzip
import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import DataFormatError, PreconditionError, ShapeError

IDX_IMAGES_MAGIC = 0x00000803
IDX_LABELS_MAGIC = 0x00000801

_MASK64 = 0xFFFFFFFFFFFFFFFF


class SplitMix64:
    """SplitMix64 generator (Steele, Lea & Flood 2014).

    Tiny, fully specified, and identical on every platform, so a split made
    from a seed here can be replayed anywhere.
    """

    def __init__(self, seed):
        self.state = int(seed) & _MASK64

    def next_u64(self):
        self.state = (self.state + 0x9E3779B97F4A7C15) & _MASK64
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
        return z ^ (z >> 31)

    def below(self, bound):
        """Uniform integer in ``[0, bound)`` by rejection (no modulo bias)."""
        if bound <= 0:
            raise ValueError("bound must be positive")
        limit = (1 << 64) - ((1 << 64) % bound)
        while True:
            r = self.next_u64()
            if r < limit:
                return r % bound

    def shuffle(self, items):
        """Fisher-Yates shuffle of a list, in place."""
        for i in range(len(items) - 1, 0, -1):
            j = self.below(i + 1)
            items[i], items[j] = items[j], items[i]
        return items


@dataclass(frozen=True, eq=False)
class LabeledDataset:
    features: np.ndarray  # d_x x N
    labels: np.ndarray  # N, 1-based
    n_c: int
    name: str = ""
    class_names: tuple = field(default=())

    def __post_init__(self):
        if self.features.ndim != 2:
            raise ShapeError(f"features must be 2-D, got {self.features.shape}")
        if self.labels.shape != (self.features.shape[1],):
            raise ShapeError(
                f"{self.labels.shape[0]} labels for {self.features.shape[1]} instances"
            )
        if self.labels.size and (self.labels.min() < 1 or self.labels.max() > self.n_c):
            raise ShapeError(f"labels must lie in 1..{self.n_c}")

    @property
    def d_x(self):
        return self.features.shape[0]

    @property
    def n(self):
        return self.features.shape[1]

    def subset(self, idx, name=None):
        idx = np.asarray(idx, dtype=np.intp)
        return LabeledDataset(
            self.features[:, idx], self.labels[idx], self.n_c,
            self.name if name is None else name, self.class_names,
        )

    def class_counts(self):
        return np.bincount(self.labels, minlength=self.n_c + 1)[1:]


def _open_maybe_gz(path):
    path = Path(path)
    with open(path, "rb") as fh:
        head = fh.read(2)
    if head == b"\x1f\x8b":
        return gzip.open(path, "rb")
    return open(path, "rb")


def _read_idx(path, magic, ndims):
    with _open_maybe_gz(path) as fh:
        raw = fh.read()
    header = 4 + 4 * ndims
    if len(raw) < header:
        raise DataFormatError(f"{path}: truncated IDX header at byte offset {len(raw)}")
    (found,) = struct.unpack_from(">I", raw, 0)
    if found != magic:
        raise DataFormatError(
            f"{path}: bad IDX magic 0x{found:08x} at byte offset 0, expected 0x{magic:08x}"
        )
    dims = struct.unpack_from(f">{ndims}I", raw, 4)
    size = int(np.prod(dims))
    if len(raw) - header < size:
        raise DataFormatError(
            f"{path}: truncated IDX payload at byte offset {len(raw)}, "
            f"expected {header + size} bytes"
        )
    data = np.frombuffer(raw, dtype=np.uint8, count=size, offset=header)
    return data.reshape(dims)


def load_idx(images_path, labels_path, name="mnist"):
    """MNIST images/labels as a dataset with pixels scaled to [0, 1].

    Each 28x28 image is flattened row-major; digit ``k`` becomes label ``k+1``.
    """
    images = _read_idx(images_path, IDX_IMAGES_MAGIC, 3)
    labels = _read_idx(labels_path, IDX_LABELS_MAGIC, 1)
    if images.shape[0] != labels.shape[0]:
        raise DataFormatError(
            f"{images_path} holds {images.shape[0]} images but {labels_path} "
            f"holds {labels.shape[0]} labels (count field at byte offset 4)"
        )
    if labels.size and labels.max() > 9:
        bad = int(np.argmax(labels > 9))
        raise DataFormatError(
            f"{labels_path}: label {labels[bad]} at byte offset {8 + bad} is not a digit"
        )
    n = images.shape[0]
    features = images.reshape(n, -1).T.astype(np.float64) / 255.0
    return LabeledDataset(
        np.ascontiguousarray(features), labels.astype(np.int64) + 1, 10, name,
        tuple(str(k) for k in range(10)),
    )


def write_idx(images, labels, images_path, labels_path):
    """Write ``uint8`` images (N x rows x cols) and digit labels as IDX files."""
    images = np.asarray(images, dtype=np.uint8)
    labels = np.asarray(labels, dtype=np.uint8)
    with open(images_path, "wb") as fh:
        fh.write(struct.pack(">4I", IDX_IMAGES_MAGIC, *images.shape))
        fh.write(images.tobytes())
    with open(labels_path, "wb") as fh:
        fh.write(struct.pack(">2I", IDX_LABELS_MAGIC, labels.shape[0]))
        fh.write(labels.tobytes())


def load_table(path, label_column=0, delimiter=",", skip_header=False, name=None):
    """Read a delimited numeric table whose ``label_column`` holds class ids.

    Class ids map to 1..n_c in order of first appearance; the original ids
    are kept in ``class_names``.  ``delimiter=None`` splits on whitespace.
    Lines starting with ``@``, ``#`` or ``%`` are skipped (ARFF/KEEL headers).
    """
    path = Path(path)
    rows = []
    with open(path, newline="") as fh:
        lines = enumerate(fh, start=1)
        if skip_header:
            next(lines, None)
        for lineno, line in lines:
            text = line.strip()
            if not text or text[0] in "@#%":
                continue
            if delimiter is None:
                cells = text.split()
            else:
                cells = next(csv.reader([text], delimiter=delimiter))
            rows.append((lineno, [c.strip() for c in cells]))
    if not rows:
        raise DataFormatError(f"{path}: no data rows")
    width = len(rows[0][1])
    col = label_column if label_column >= 0 else width + label_column
    if not 0 <= col < width:
        raise DataFormatError(f"{path}: label column {label_column} outside {width} columns")

    mapping = {}
    labels = []
    feats = np.empty((len(rows), width - 1))
    for r, (lineno, cells) in enumerate(rows):
        if len(cells) != width:
            raise DataFormatError(
                f"{path}:{lineno}: ragged row with {len(cells)} fields, expected {width}"
            )
        key = cells[col]
        labels.append(mapping.setdefault(key, len(mapping) + 1))
        values = cells[:col] + cells[col + 1:]
        try:
            feats[r] = [float(v) for v in values]
        except ValueError as exc:
            raise DataFormatError(f"{path}:{lineno}: unparseable number ({exc})") from None
    if not np.all(np.isfinite(feats)):
        raise DataFormatError(f"{path}: non-finite feature values")
    if len(mapping) < 2:
        raise DataFormatError(f"{path}: need at least 2 classes, found {len(mapping)}")
    return LabeledDataset(
        np.ascontiguousarray(feats.T), np.asarray(labels, dtype=np.int64), len(mapping),
        name or path.stem, tuple(mapping),
    )


@dataclass(frozen=True, eq=False)
class Rescaler:
    divisors: np.ndarray


def fit_rescaler(data):
    """Per-dimension divisor = max |feature|, or 1 for an all-zero dimension."""
    if data.n == 0:
        raise PreconditionError("cannot fit a rescaler on an empty dataset")
    peak = np.max(np.abs(data.features), axis=1)
    return Rescaler(np.where(peak > 0, peak, 1.0))


def apply_rescaler(rescaler, data):
    if rescaler.divisors.shape != (data.d_x,):
        raise ShapeError(
            f"rescaler has {rescaler.divisors.shape[0]} dimensions, data has {data.d_x}"
        )
    return LabeledDataset(
        data.features / rescaler.divisors[:, None], data.labels, data.n_c, data.name,
        data.class_names,
    )


def balanced_split(data, per_class, seed):
    """Draw ``per_class`` instances of every class for training; rest is test.

    Sampling is without replacement, driven by SplitMix64(seed); indices
    within each part keep their original order.
    """
    counts = data.class_counts()
    for c, count in enumerate(counts, start=1):
        if count < per_class:
            label = data.class_names[c - 1] if data.class_names else c
            raise PreconditionError(
                f"class {c} ({label!s}) has {count} instances, need {per_class}"
            )
    rng = SplitMix64(seed)
    chosen = []
    for c in range(1, data.n_c + 1):
        members = np.flatnonzero(data.labels == c).tolist()
        chosen.extend(rng.shuffle(members)[:per_class])
    mask = np.zeros(data.n, dtype=bool)
    mask[chosen] = True
    train = data.subset(np.flatnonzero(mask), f"{data.name}:train")
    test = data.subset(np.flatnonzero(~mask), f"{data.name}:test")
    return train, test


RESCALE_SCOPES = ("train", "all", "none")


def prepare_split(data, per_class, seed, *, rescale="train", test_data=None,
                  test_per_class=None):
    """Balanced train/test pair, rescaled per ``rescale``.

    The training set is ``per_class`` draws per class from ``data``.  The test
    pool is the remainder of ``data``, or ``test_data`` when given; with
    ``test_per_class`` the test set is a balanced draw from that pool,
    otherwise the whole pool.  ``rescale`` fits the max-divisor on the
    training split (``"train"``), on train and test pool together
    (``"all"``), or skips rescaling (``"none"``).
    """
    if rescale not in RESCALE_SCOPES:
        raise ValueError(f"rescale must be one of {RESCALE_SCOPES}, got {rescale!r}")
    train, test = balanced_split(data, per_class, seed)
    if test_data is not None:
        test = test_data
    if test_per_class is not None:
        test, _ = balanced_split(test, test_per_class, seed)
        test = LabeledDataset(test.features, test.labels, test.n_c,
                              f"{data.name}:test", test.class_names)
    train, test, _ = rescale_pair(train, test, rescale)
    return train, test


def rescale_pair(train, test, scope):
    """Rescale a train/test pair; returns ``(train, test, rescaler or None)``."""
    if scope not in RESCALE_SCOPES:
        raise ValueError(f"rescale must be one of {RESCALE_SCOPES}, got {scope!r}")
    if scope == "none":
        return train, test, None
    pool = train
    if scope == "all":
        pool = LabeledDataset(
            np.hstack([train.features, test.features]),
            np.concatenate([train.labels, test.labels]), train.n_c, train.name,
        )
    scaler = fit_rescaler(pool)
    return apply_rescaler(scaler, train), apply_rescaler(scaler, test), scaler
