import numpy as np
import pytest

from pcc import linalg


@pytest.fixture
def kernels(backend):
    return linalg.load_kernels(backend)


def test_crc64_check_value(kernels):
    # published check value of CRC-64/XZ
    assert kernels.crc64(b"123456789") == 0x995DC9BBDF1939FA
    assert kernels.crc64(b"") == 0


def test_crc64_detects_single_bit_flip(kernels):
    data = bytearray(np.random.default_rng(0).integers(0, 256, 4096, dtype=np.uint8))
    before = kernels.crc64(bytes(data))
    data[1234] ^= 0x10
    assert kernels.crc64(bytes(data)) != before


@pytest.mark.parametrize("n", [1, 2, 3, 7, 20])
def test_tridiagonalize_reconstructs(kernels, n):
    b = np.random.default_rng(n).normal(size=(n, n))
    a = b + b.T
    d, e, q = kernels.tridiagonalize(a)
    t = np.diag(d) + np.diag(e[1:], -1) + np.diag(e[1:], 1)
    np.testing.assert_allclose(q.T @ q, np.eye(n), atol=1e-13)
    np.testing.assert_allclose(q @ t @ q.T, a, atol=1e-12)
    assert e[0] == 0.0


def test_tridiagonalize_zero_column(kernels):
    a = np.diag([1.0, 0.0, 2.0, 0.0])
    a[0, 2] = a[2, 0] = 1.0
    d, e, q = kernels.tridiagonalize(a)
    t = np.diag(d) + np.diag(e[1:], -1) + np.diag(e[1:], 1)
    np.testing.assert_allclose(q @ t @ q.T, a, atol=1e-14)


def test_tql_on_known_tridiagonal(kernels):
    # T = tridiag(-1, 2, -1) of size n has eigenvalues 2 - 2 cos(k pi / (n + 1))
    n = 12
    d = np.full(n, 2.0)
    e = np.concatenate([[0.0], np.full(n - 1, -1.0)])
    zt = np.eye(n)
    assert kernels.tql(d, e, zt, 64) == -1
    expected = 2 - 2 * np.cos(np.arange(1, n + 1) * np.pi / (n + 1))
    np.testing.assert_allclose(np.sort(d), expected, atol=1e-13)
    t = np.diag(np.full(n, 2.0)) - np.eye(n, k=1) - np.eye(n, k=-1)
    np.testing.assert_allclose(t @ zt.T, zt.T * d, atol=1e-13)


def test_env_var_forces_python_backend():
    import os
    import subprocess
    import sys

    env = dict(os.environ, PCC_PURE_PYTHON="1")
    out = subprocess.run([sys.executable, "-c", "import pcc; print(pcc.BACKEND)"],
                         env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"
