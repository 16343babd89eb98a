"""Dense complex-matrix kernels.

Everything here is deterministic: eigen- and singular values come back in
descending order and eigenvector phases are pinned, so identical inputs give
bit-identical outputs.
"""

from __future__ import annotations

from typing import NamedTuple

import numpy as np

from .errors import NonHermitianInput, NonSquare, RankDeficientBasis

HERM_TOL = 1e-10
RANK_TOL = 1e-9


class HermitianEigen(NamedTuple):
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray


class SvdFactors(NamedTuple):
    left: np.ndarray
    singular_values: np.ndarray
    right: np.ndarray  # X, with A = W @ diag(s) @ X^dagger


class LinearSolution(NamedTuple):
    x: np.ndarray
    residual: float


def as_matrix(a) -> np.ndarray:
    a = np.asarray(a, dtype=complex)
    if a.ndim != 2:
        raise ValueError(f"expected a 2-d array, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix has non-finite entries")
    return a


def dag(a: np.ndarray) -> np.ndarray:
    return np.conj(a).T


def fix_phases(vecs: np.ndarray) -> np.ndarray:
    """Rotate each column so its largest-magnitude entry is real and >= 0.

    Ties go to the lowest index (``argmax`` semantics).
    """
    vecs = np.array(vecs, dtype=complex, copy=True)
    if vecs.size == 0:
        return vecs
    # round so that entries equal up to roundoff tie-break by index
    mags = np.round(np.abs(vecs), 12)
    idx = np.argmax(mags, axis=0)
    pivots = vecs[idx, np.arange(vecs.shape[1])]
    phases = np.ones_like(pivots)
    nz = np.abs(pivots) > 0
    phases[nz] = np.conj(pivots[nz]) / np.abs(pivots[nz])
    return vecs * phases[np.newaxis, :]


def hermiticity_defect(a: np.ndarray) -> float:
    return float(np.linalg.norm(a - dag(a)))


def eig_hermitian(a, tol: float | None = None) -> HermitianEigen:
    """Eigendecomposition of a Hermitian matrix, eigenvalues descending."""
    a = as_matrix(a)
    if a.shape[0] != a.shape[1]:
        raise NonSquare(f"eig_hermitian needs a square matrix, got {a.shape}")
    n = a.shape[0]
    if tol is None:
        tol = HERM_TOL * max(n, 1) * max(1.0, float(np.linalg.norm(a)))
    defect = hermiticity_defect(a)
    if defect > tol:
        raise NonHermitianInput(f"||A - A^dag||_F = {defect:.3e} exceeds {tol:.3e}")
    w, v = np.linalg.eigh((a + dag(a)) / 2)
    order = np.argsort(-w, kind="stable")
    return HermitianEigen(w[order], fix_phases(v[:, order]))


def svd(a) -> SvdFactors:
    a = as_matrix(a)
    w, s, xh = np.linalg.svd(a)
    return SvdFactors(w, s, dag(xh))


def polar_right(a) -> tuple[np.ndarray, np.ndarray]:
    """Right polar decomposition ``A = U @ Pos``.

    ``U = W X^dagger`` from the SVD, so rank-deficient inputs still yield a
    unitary (one particular completion); ``Pos = X S X^dagger`` is unique.
    """
    a = as_matrix(a)
    if a.shape[0] != a.shape[1]:
        raise NonSquare(f"polar_right needs a square matrix, got {a.shape}")
    w, s, x = svd(a)
    u = w @ dag(x)
    pos = (x * s) @ dag(x)
    pos = (pos + dag(pos)) / 2
    return u, pos


def rank(a, tol: float = RANK_TOL) -> int:
    """Number of singular values above ``tol * max(singular values)``."""
    if tol <= 0:
        raise ValueError("rank tolerance must be positive")
    s = np.linalg.svd(as_matrix(a), compute_uv=False)
    if s.size == 0 or s[0] == 0:
        return 0
    return int(np.sum(s > tol * s[0]))


def solve_linear(basis, target, rank_tol: float = RANK_TOL) -> LinearSolution:
    """Least-squares coefficients of ``target`` over the columns of ``basis``.

    The basis must have full column rank; the returned residual is
    ``||basis @ x - target||_2``.
    """
    basis = as_matrix(basis)
    target = np.asarray(target, dtype=complex).reshape(-1)
    if basis.shape[0] != target.shape[0]:
        raise ValueError(
            f"basis has {basis.shape[0]} rows but target has length {target.shape[0]}"
        )
    r = rank(basis, rank_tol)
    if r < basis.shape[1]:
        raise RankDeficientBasis(
            f"basis has column rank {r} < {basis.shape[1]} columns"
        )
    x, *_ = np.linalg.lstsq(basis, target, rcond=None)
    residual = float(np.linalg.norm(basis @ x - target))
    return LinearSolution(x, residual)


def is_unitary(u: np.ndarray, tol: float = 1e-10) -> bool:
    u = np.asarray(u)
    if u.ndim != 2 or u.shape[0] != u.shape[1]:
        return False
    return unitarity_defect(u) <= tol


def unitarity_defect(u: np.ndarray) -> float:
    u = np.asarray(u)
    return float(np.linalg.norm(dag(u) @ u - np.eye(u.shape[1])))


def elementary(a: int, b: int, n: int) -> np.ndarray:
    """The n x n matrix with a single 1 at (a, b); indices are 1-based."""
    e = np.zeros((n, n), dtype=complex)
    e[a - 1, b - 1] = 1.0
    return e


def vec(a: np.ndarray) -> np.ndarray:
    """Row-major vectorization."""
    return np.asarray(a).reshape(-1)


def orthonormal_complement(q: np.ndarray) -> np.ndarray:
    """Columns completing the orthonormal columns of ``q`` to a unitary."""
    m, k = q.shape
    if k == 0:
        return np.eye(m, dtype=complex)
    w, s, _ = np.linalg.svd(q, full_matrices=True)
    return w[:, k:]
