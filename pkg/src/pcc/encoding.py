"""Class-encoded vectors: features and one-hot labels stacked with weight alpha.

An instance ``(x, y)`` becomes ``z = [(1 - alpha) x ; alpha y]`` of length
``d_z = d_x + n_c``.  Leaving the label out gives ``[(1 - alpha) x ; 0]``,
which is what the classifier sees at test time.

Labels are 1-based everywhere outside this module's internals.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError, ShapeError


@dataclass(frozen=True)
class EncodingSpec:
    d_x: int
    n_c: int
    alpha: float

    def __post_init__(self):
        if not 0.0 <= self.alpha <= 1.0:
            raise DomainError(f"alpha must lie in [0, 1], got {self.alpha}")
        if self.d_x < 1:
            raise DomainError(f"d_x must be >= 1, got {self.d_x}")
        if self.n_c < 2:
            raise DomainError(f"n_c must be >= 2, got {self.n_c}")

    @property
    def d_z(self):
        return self.d_x + self.n_c


def class_indicator(label, n_c):
    """One-hot vector of length ``n_c`` for a 1-based ``label``."""
    if not 1 <= label <= n_c:
        raise DomainError(f"label {label} outside 1..{n_c}")
    y = np.zeros(n_c)
    y[label - 1] = 1.0
    return y


def encode_instance(spec, x, label=None):
    """Encode one feature vector, optionally with its 1-based class label."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (spec.d_x,):
        raise ShapeError(f"feature vector has shape {x.shape}, expected ({spec.d_x},)")
    z = np.zeros(spec.d_z)
    z[: spec.d_x] = (1.0 - spec.alpha) * x
    if label is not None:
        z[spec.d_x:] = spec.alpha * class_indicator(int(label), spec.n_c)
    return z


def encode_columns(spec, features, labels=None):
    """Encode a ``d_x x N`` feature matrix column by column.

    ``labels`` (1-based, length N) fills the class block; ``None`` leaves it 0.
    """
    features = np.asarray(features, dtype=np.float64)
    if features.ndim != 2 or features.shape[0] != spec.d_x:
        raise ShapeError(
            f"feature matrix has shape {features.shape}, expected ({spec.d_x}, N)"
        )
    n = features.shape[1]
    z = np.zeros((spec.d_z, n))
    z[: spec.d_x] = (1.0 - spec.alpha) * features
    if labels is not None:
        labels = np.asarray(labels)
        if labels.shape != (n,):
            raise ShapeError(f"got {labels.shape} labels for {n} instances")
        if n and (labels.min() < 1 or labels.max() > spec.n_c):
            raise DomainError(f"labels must lie in 1..{spec.n_c}")
        z[spec.d_x + labels.astype(np.intp) - 1, np.arange(n)] = spec.alpha
    return z


def encode_dataset(spec, data, with_labels):
    """The ``d_z x N`` matrix of a LabeledDataset, with or without its labels."""
    if data.d_x != spec.d_x or data.n_c != spec.n_c:
        raise ShapeError(
            f"dataset has d_x={data.d_x}, n_c={data.n_c}; "
            f"spec expects d_x={spec.d_x}, n_c={spec.n_c}"
        )
    return encode_columns(spec, data.features, data.labels if with_labels else None)
