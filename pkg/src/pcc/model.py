"""The principal-component classifier: fit, encode, decode, predict, persist.

A model keeps the top ``n_e`` eigenvectors of the un-centered covariance of
class-encoded training data.  Encoding projects onto them, decoding maps
back, and the predicted class is the largest coordinate of the class block
of the reconstruction.
"""
from __future__ import annotations

import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import linalg
from .encoding import EncodingSpec, encode_columns, encode_dataset, encode_instance
from .errors import ChecksumError, DataFormatError, DomainError, ShapeError

# scores within TIE_RTOL * |z| of the best count as tied; ties go to the lowest label
TIE_RTOL = 1e-9

MAGIC = b"PCCMDL01"
_HEADER = struct.Struct("<8sIIIdQ")


@dataclass(frozen=True)
class TrainingFingerprint:
    dataset: str = ""
    seed: int | None = None
    n: int = 0


@dataclass(frozen=True, eq=False)
class PccModel:
    spec: EncodingSpec
    basis: np.ndarray
    eigenvalues: np.ndarray
    fingerprint: TrainingFingerprint = field(default_factory=TrainingFingerprint)

    def __post_init__(self):
        d_z, n_e = self.basis.shape
        if d_z != self.spec.d_z:
            raise ShapeError(f"basis has {d_z} rows, spec needs d_z={self.spec.d_z}")
        if not 1 <= n_e <= d_z:
            raise DomainError(f"n_e must lie in 1..{d_z}, got {n_e}")
        if self.eigenvalues.shape != (n_e,):
            raise ShapeError(f"expected {n_e} eigenvalues, got {self.eigenvalues.shape}")

    @property
    def n_e(self):
        return self.basis.shape[1]

    @property
    def n_parameters(self):
        """Trainable parameters: the entries of the retained basis."""
        return self.basis.size

    def truncate(self, n_e):
        """The same model keeping only its first ``n_e`` components."""
        if not 1 <= n_e <= self.n_e:
            raise DomainError(f"can truncate to 1..{self.n_e} components, got {n_e}")
        return PccModel(self.spec, self.basis[:, :n_e], self.eigenvalues[:n_e],
                        self.fingerprint)

    def projector(self):
        return self.basis @ self.basis.T


@dataclass(frozen=True)
class Reconstruction:
    z_hat: np.ndarray
    d_x: int

    @property
    def feature_part(self):
        return self.z_hat[: self.d_x]

    @property
    def class_part(self):
        return self.z_hat[self.d_x:]


def fit(spec, train, n_e=None, *, seed=None, method="auto", backend=None):
    """Fit on a LabeledDataset; ``n_e=None`` keeps all ``d_z`` components.

    The covariance is NOT centered: the leading component follows the
    offset of the encoded data from the origin.
    """
    if n_e is None:
        n_e = spec.d_z
    if not 1 <= n_e <= spec.d_z:
        raise DomainError(f"n_e must lie in 1..{spec.d_z}, got {n_e}")
    z = encode_dataset(spec, train, with_labels=True)
    spectrum = linalg.covariance_spectrum(z, method=method, backend=backend)
    fingerprint = TrainingFingerprint(train.name, seed, train.n)
    return PccModel(
        spec,
        np.ascontiguousarray(spectrum.eigenvectors[:, :n_e]),
        spectrum.eigenvalues[:n_e].copy(),
        fingerprint,
    )


def _check_len(v, n, what):
    if v.shape[0] != n:
        raise ShapeError(f"{what} has length {v.shape[0]}, expected {n}")


def encode(model, z):
    """Coordinates of ``z`` (a vector or ``d_z x N`` matrix) in the basis."""
    z = np.asarray(z, dtype=np.float64)
    _check_len(z, model.spec.d_z, "encoded input")
    return model.basis.T @ z


def decode(model, p):
    """Reconstruct ``z_hat = U p`` from projection coordinates."""
    p = np.asarray(p, dtype=np.float64)
    _check_len(p, model.n_e, "projection")
    return Reconstruction(model.basis @ p, model.spec.d_x)


def class_scores(model, z):
    """Class block of the reconstruction of each column of ``z`` (``n_c x N``)."""
    return model.basis[model.spec.d_x:] @ encode(model, z)


def argmax_lowest(scores, z_norms):
    """Column-wise argmax as 1-based labels, near-ties resolved to the lowest.

    ``scores`` is ``n_c x N``; ``z_norms`` scales the tie tolerance per column.
    """
    scores = np.atleast_2d(np.asarray(scores, dtype=np.float64))
    best = scores.max(axis=0)
    tol = TIE_RTOL * np.asarray(z_norms, dtype=np.float64)
    return np.argmax(scores >= best - tol, axis=0) + 1


def _predict_vector(model, z):
    scores = class_scores(model, z)
    label = int(argmax_lowest(scores[:, None], [np.linalg.norm(z)])[0])
    return label, scores


def predict_class(model, x):
    """Classify one feature vector, fed with an all-zero class block."""
    return _predict_vector(model, encode_instance(model.spec, x))


def predict_with_labels(model, x, label):
    """Classify one feature vector whose true label is part of the input."""
    return _predict_vector(model, encode_instance(model.spec, x, label))


def predict_batch(model, features, labels=None):
    """Predict a ``d_x x N`` matrix; returns ``(labels, scores)``."""
    z = encode_columns(model.spec, features, labels)
    scores = class_scores(model, z)
    return argmax_lowest(scores, np.linalg.norm(z, axis=0)), scores


def save_model(model, path):
    spec = model.spec
    payload = bytearray(
        _HEADER.pack(MAGIC, spec.d_x, spec.n_c, model.n_e, spec.alpha, model.fingerprint.n)
    )
    payload += np.asarray(model.eigenvalues, dtype="<f8").tobytes()
    payload += np.asarray(model.basis, dtype="<f8").tobytes(order="F")
    payload += struct.pack("<Q", linalg.kernels.crc64(bytes(payload)))
    Path(path).write_bytes(bytes(payload))


def load_model(path):
    raw = Path(path).read_bytes()
    if len(raw) >= 8 and raw[:8] != MAGIC:
        raise DataFormatError(f"{path}: bad magic {raw[:8]!r}, expected {MAGIC!r}")
    if len(raw) < _HEADER.size + 8:
        raise ChecksumError(f"{path}: truncated model file ({len(raw)} bytes)")
    _, d_x, n_c, n_e, alpha, n = _HEADER.unpack_from(raw)
    d_z = d_x + n_c
    expected = _HEADER.size + 8 * (n_e + d_z * n_e) + 8
    if len(raw) != expected:
        raise ChecksumError(f"{path}: size {len(raw)} bytes, header implies {expected}")
    (stored,) = struct.unpack_from("<Q", raw, len(raw) - 8)
    if linalg.kernels.crc64(raw[:-8]) != stored:
        raise ChecksumError(f"{path}: CRC-64 mismatch")
    off = _HEADER.size
    eigenvalues = np.frombuffer(raw, dtype="<f8", count=n_e, offset=off).astype(np.float64)
    off += 8 * n_e
    flat = np.frombuffer(raw, dtype="<f8", count=d_z * n_e, offset=off)
    basis = np.ascontiguousarray(flat.reshape((d_z, n_e), order="F"), dtype=np.float64)
    try:
        spec = EncodingSpec(d_x, n_c, alpha)
        return PccModel(spec, basis, eigenvalues, TrainingFingerprint(n=n))
    except (DomainError, ShapeError) as exc:
        raise DataFormatError(f"{path}: invalid model header ({exc})") from exc
