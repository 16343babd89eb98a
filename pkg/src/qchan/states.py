"""Density matrices, pure states, seeded samplers and Bloch-vector metrics.

Density matrices and pure states are plain numpy arrays; ``check_density``
and ``check_pure`` enforce the invariants where a caller needs them.
"""

from __future__ import annotations

import numpy as np

from .errors import DimensionMismatch, InvalidState
from .linalg import as_matrix, dag, eig_hermitian

STATE_TOL = 1e-10


def rng_for(seed: int, index: int | None = None) -> np.random.Generator:
    """Generator for ``seed``, or for sample ``index`` derived from it.

    Per-index streams make a sample's draw independent of how many samples
    came before it, so serial and parallel loops agree.
    """
    if index is None:
        return np.random.default_rng(np.random.SeedSequence(seed))
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(index,)))


def _as_rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return rng_for(seed)


def check_density(rho, tol: float = STATE_TOL) -> np.ndarray:
    rho = as_matrix(rho)
    n, m = rho.shape
    if n != m:
        raise InvalidState(f"density matrix must be square, got {rho.shape}")
    herm = np.linalg.norm(rho - dag(rho))
    if herm > tol:
        raise InvalidState(f"not Hermitian (defect {herm:.3e})")
    tr = np.trace(rho).real
    if abs(tr - 1) > tol:
        raise InvalidState(f"trace is {tr!r}, expected 1")
    lmin = np.linalg.eigvalsh((rho + dag(rho)) / 2)[0]
    if lmin < -tol:
        raise InvalidState(f"negative eigenvalue {lmin:.3e}")
    return rho


def check_pure(psi, tol: float = 1e-12) -> np.ndarray:
    psi = np.asarray(psi, dtype=complex).reshape(-1)
    norm = np.linalg.norm(psi)
    if abs(norm - 1) > tol:
        raise InvalidState(f"state vector has norm {norm!r}")
    return psi


def projector(psi) -> np.ndarray:
    psi = np.asarray(psi, dtype=complex).reshape(-1)
    return np.outer(psi, np.conj(psi))


def maximally_mixed(n: int) -> np.ndarray:
    return np.eye(n, dtype=complex) / n


def random_density(n: int, seed) -> np.ndarray:
    """Ginibre-ensemble mixed state ``G G^dag / tr(G G^dag)``."""
    if n < 2:
        raise ValueError("random_density needs n >= 2")
    rng = _as_rng(seed)
    g = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    rho = g @ dag(g)
    rho = rho / np.trace(rho).real
    return (rho + dag(rho)) / 2


def random_pure(n: int, seed) -> np.ndarray:
    if n < 2:
        raise ValueError("random_pure needs n >= 2")
    rng = _as_rng(seed)
    v = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    return v / np.linalg.norm(v)


def bloch_purity(rho) -> float:
    """``(n tr(rho^2) - 1) / (n - 1)``: 1 for pure states, 0 for I/n.

    Not clamped, so roundoff can push it slightly outside [0, 1].
    """
    rho = as_matrix(rho)
    n = rho.shape[0]
    if n < 2:
        raise ValueError("Bloch purity is undefined for n = 1")
    purity = np.trace(rho @ rho).real
    return float((n * purity - 1) / (n - 1))


def bloch_distance_sq(a, b) -> float:
    """Squared distance between Bloch vectors, ``n/(n-1) tr((A-B)^2)``."""
    a = as_matrix(a)
    b = as_matrix(b)
    if a.shape != b.shape:
        raise DimensionMismatch(f"{a.shape} vs {b.shape}")
    n = a.shape[0]
    if n < 2:
        raise ValueError("Bloch distance is undefined for n = 1")
    d = a - b
    return float(n / (n - 1) * np.trace(d @ d).real)


def kron(a, b) -> np.ndarray:
    return np.kron(np.asarray(a, dtype=complex), np.asarray(b, dtype=complex))


def partial_trace_ancilla(rho, n_sys: int, n_anc: int) -> np.ndarray:
    """Trace out the second tensor factor of an (n_sys*n_anc)-dim operator."""
    rho = as_matrix(rho)
    if rho.shape != (n_sys * n_anc, n_sys * n_anc):
        raise DimensionMismatch(
            f"operator of shape {rho.shape} is not {n_sys}x{n_anc} composite"
        )
    return np.einsum("iaja->ij", rho.reshape(n_sys, n_anc, n_sys, n_anc))


def purify(rho, tol: float = 1e-12) -> np.ndarray:
    """Purification ``sum_j sqrt(l_j) |e_j> (x) |j>`` on dimension n*R."""
    rho = check_density(rho)
    lam, vecs = eig_hermitian(rho)
    keep = lam > tol
    lam, vecs = lam[keep], vecs[:, keep]
    r = lam.size
    n = rho.shape[0]
    psi = np.zeros(n * r, dtype=complex)
    for j in range(r):
        psi += np.sqrt(lam[j]) * np.kron(vecs[:, j], np.eye(r)[j])
    return psi / np.linalg.norm(psi)
