import numpy as np
import pytest

from qchan.channels import KrausSet


def random_matrix(rng, rows, cols=None):
    cols = rows if cols is None else cols
    return rng.standard_normal((rows, cols)) + 1j * rng.standard_normal((rows, cols))


def random_unitary(rng, n):
    q, r = np.linalg.qr(random_matrix(rng, n))
    return q * (np.diag(r) / np.abs(np.diag(r)))


def random_kraus(rng, n, count):
    """Complete Kraus set: ``count`` n x n blocks cut from a random isometry."""
    v = random_unitary(rng, n * count)[:, :n]
    return KrausSet([v[j * n : (j + 1) * n] for j in range(count)], label="random")


def gauss_rank(a, tol=1e-9):
    """Rank by Gaussian elimination with partial pivoting (no SVD)."""
    a = np.array(a, dtype=complex)
    rows, cols = a.shape
    scale = max(np.abs(a).max(), 1e-300)
    r = 0
    for c in range(cols):
        if r == rows:
            break
        piv = r + int(np.argmax(np.abs(a[r:, c])))
        if abs(a[piv, c]) <= tol * scale:
            continue
        a[[r, piv]] = a[[piv, r]]
        a[r + 1 :] -= np.outer(a[r + 1 :, c] / a[r, c], a[r])
        r += 1
    return r


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
