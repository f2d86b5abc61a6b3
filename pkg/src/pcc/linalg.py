"""Dense symmetric eigendecomposition and the few matrix kernels pcc needs.

Matrices are plain ``float64`` numpy arrays.  The eigensolver is our own
(Householder tridiagonalization + implicit-shift QL with Wilkinson shifts);
the O(d^3) inner loops run in the compiled ``_kernels`` extension when it
is importable and in ``_kernels_py`` otherwise.  Set ``PCC_PURE_PYTHON=1``
to force the fallback.
"""
from __future__ import annotations

import importlib
import os
from dataclasses import dataclass

import numpy as np

from .errors import ConvergenceError, NumericalError, PreconditionError, ShapeError


def load_kernels(name=None):
    """Return a kernel module: ``"compiled"``, ``"python"`` or auto when None."""
    if name == "python":
        return importlib.import_module("pcc._kernels_py")
    if name == "compiled":
        return importlib.import_module("pcc._kernels")
    if os.environ.get("PCC_PURE_PYTHON", "").strip() not in ("", "0"):
        return importlib.import_module("pcc._kernels_py")
    try:
        return importlib.import_module("pcc._kernels")
    except ImportError:
        return importlib.import_module("pcc._kernels_py")


kernels = load_kernels()
BACKEND = "python" if kernels.__name__.endswith("_py") else "compiled"

MAX_QL_ITER = 64
SYMMETRY_RTOL = 1e-12
# relative size of a negative eigenvalue still treated as round-off in a PSD matrix
PSD_RTOL = 1e-10
# Gram route when d > GRAM_RATIO * N
GRAM_RATIO = 4


@dataclass(frozen=True)
class SpectralDecomposition:
    """Eigenvalues in descending order and the matching unit eigenvectors.

    ``eigenvectors[:, i]`` belongs to ``eigenvalues[i]``.  Each column is
    signed so its largest-magnitude coordinate is positive.
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    @property
    def dim(self):
        return self.eigenvalues.shape[0]

    def projector(self, k):
        """Orthogonal projector onto the span of the top ``k`` eigenvectors."""
        u = self.eigenvectors[:, :k]
        return u @ u.T


def _as_matrix(a, what="matrix"):
    a = np.asarray(a, dtype=np.float64)
    if a.ndim != 2:
        raise ShapeError(f"{what} must be 2-D, got shape {a.shape}")
    return a


def matmul(a, b):
    """Matrix product ``a @ b`` with an explicit shape check."""
    a = _as_matrix(a, "left operand")
    b = _as_matrix(b, "right operand")
    if a.shape[1] != b.shape[0]:
        raise ShapeError(f"cannot multiply {a.shape} by {b.shape}")
    return a @ b


def _mirror_upper(c):
    upper = np.triu(c)
    return upper + np.triu(c, 1).T


def gram_or_covariance(z):
    """Un-centered covariance ``(1/N) Z Z^T`` of a ``d x N`` data matrix.

    The result is symmetric bit-for-bit: the upper triangle is computed and
    mirrored.
    """
    z = _as_matrix(z, "data matrix")
    n = z.shape[1]
    if n < 1:
        raise PreconditionError("covariance of an empty dataset")
    return _mirror_upper(z @ z.T) / n


def _sign_fix(vectors):
    idx = np.argmax(np.abs(vectors), axis=0)
    signs = np.where(vectors[idx, np.arange(vectors.shape[1])] < 0, -1.0, 1.0)
    return vectors * signs


def sym_eigendecompose(a, *, psd=False, max_iter=MAX_QL_ITER, backend=None):
    """Eigendecomposition of a symmetric matrix, eigenvalues descending.

    With ``psd=True`` tiny negative eigenvalues (round-off in a covariance)
    are clamped to zero; a clearly negative one raises ``NumericalError``.
    ``backend`` picks ``"compiled"`` or ``"python"`` kernels explicitly.
    """
    a = _as_matrix(a)
    d = a.shape[0]
    if a.shape[1] != d:
        raise ShapeError(f"eigendecomposition needs a square matrix, got {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ShapeError("matrix contains NaN or Inf entries")
    if d == 0:
        return SpectralDecomposition(np.zeros(0), np.zeros((0, 0)))
    scale = max(1.0, float(np.max(np.abs(a))))
    asym = float(np.max(np.abs(a - a.T)))
    if asym > SYMMETRY_RTOL * scale:
        raise ShapeError(f"matrix is not symmetric (max asymmetry {asym:.3e})")

    k = kernels if backend is None else load_kernels(backend)
    diag, sub, q = k.tridiagonalize(0.5 * (a + a.T))
    zt = np.ascontiguousarray(q.T)
    stalled = k.tql(diag, sub, zt, int(max_iter))
    if stalled >= 0:
        raise ConvergenceError(stalled, max_iter)

    order = np.argsort(-diag, kind="stable")
    values = diag[order]
    vectors = _sign_fix(zt[order].T)
    if psd:
        values = _clamp_psd(values)
    return SpectralDecomposition(values, np.ascontiguousarray(vectors))


def _clamp_psd(values):
    top = max(1.0, float(values[0])) if values.size else 1.0
    worst = float(values.min()) if values.size else 0.0
    if worst < -PSD_RTOL * top * max(1, values.size):
        raise NumericalError(
            f"covariance has eigenvalue {worst:.3e}; expected positive semi-definite"
        )
    return np.maximum(values, 0.0)


def _orthonormal_complement(basis, d):
    """Orthonormal columns spanning the complement of ``basis`` in R^d."""
    r = basis.shape[1]
    if r >= d:
        return np.zeros((d, 0))
    found = []
    current = basis
    for j in range(d):
        if len(found) == d - r:
            break
        v = np.zeros(d)
        v[j] = 1.0
        # two passes of classical Gram-Schmidt keep the result orthogonal to ~eps
        for _ in range(2):
            v -= current @ (current.T @ v)
        norm = float(np.linalg.norm(v))
        if norm > 1e-6:
            v /= norm
            found.append(v)
            current = np.column_stack([current, v])
    return np.column_stack(found) if found else np.zeros((d, 0))


def covariance_spectrum(z, *, method="auto", backend=None):
    """Spectrum of ``(1/N) Z Z^T`` for a ``d x N`` matrix ``Z``.

    ``method="covariance"`` decomposes the ``d x d`` covariance directly;
    ``"gram"`` decomposes the ``N x N`` matrix ``(1/N) Z^T Z`` and maps each
    eigenvector back through ``u = Z v / |Z v|``; ``"auto"`` takes the Gram
    route only when ``d > 4 N``.  Both give the same projectors.
    """
    z = _as_matrix(z, "data matrix")
    d, n = z.shape
    if n < 1:
        raise PreconditionError("covariance of an empty dataset")
    if method == "auto":
        method = "gram" if d > GRAM_RATIO * n else "covariance"
    if method == "covariance":
        return sym_eigendecompose(gram_or_covariance(z), psd=True, backend=backend)
    if method != "gram":
        raise ValueError(f"unknown method {method!r}")

    gram = _mirror_upper(z.T @ z) / n
    small = sym_eigendecompose(gram, psd=True, backend=backend)
    top = max(float(small.eigenvalues[0]), np.finfo(float).tiny)
    keep = small.eigenvalues > top * d * np.finfo(float).eps
    mapped = z @ small.eigenvectors[:, keep]
    mapped /= np.linalg.norm(mapped, axis=0)
    # re-orthogonalize against round-off; columns stay in eigenvalue order
    for j in range(mapped.shape[1]):
        v = mapped[:, j]
        v -= mapped[:, :j] @ (mapped[:, :j].T @ v)
        v /= np.linalg.norm(v)
    rest = _orthonormal_complement(mapped, d)
    values = np.zeros(d)
    values[: mapped.shape[1]] = small.eigenvalues[keep]
    vectors = _sign_fix(np.column_stack([mapped, rest]))
    return SpectralDecomposition(values, np.ascontiguousarray(vectors))
