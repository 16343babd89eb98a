"""State-dependent random-unitary decomposition of a (pure input, output) pair.

For a pure input ``psi`` and any output ``rho_out = sum_j l_j |e_j><e_j|``,
the unitaries ``U_j = B(e_j) B(psi)^dag`` send ``psi`` to ``e_j``, where
``B(v)`` is any unitary whose first column is ``v``. Then
``sum_j l_j U_j |psi><psi| U_j^dag = rho_out``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channels import KrausSet
from .errors import DimensionMismatch, InvalidState, NonPureInput
from .linalg import as_matrix, dag, eig_hermitian
from .states import check_density

RANK_CUTOFF = 1e-12


def eigbasis_with_first_column(v, completion: str = "householder") -> np.ndarray:
    """Unitary whose first column is ``v``.

    The default completion is a Householder reflection (``I`` for
    ``v = e_1``). ``completion="qr"`` gives a different valid completion and
    exists to show that the decomposition's action does not depend on it.
    """
    v = np.asarray(v, dtype=complex).reshape(-1)
    if abs(np.linalg.norm(v) - 1) > 1e-10:
        raise InvalidState("vector is not normalized")
    n = v.size
    if completion == "qr":
        q, r = np.linalg.qr(np.column_stack([v, np.eye(n)]))
        q[:, 0] *= r[0, 0] / abs(r[0, 0])
        return q
    if completion != "householder":
        raise ValueError(f"unknown completion {completion!r}")
    theta = v[0] / abs(v[0]) if abs(v[0]) > 0 else 1.0
    w = np.zeros(n, dtype=complex)
    w[0] = 1
    w -= np.conj(theta) * v
    norm2 = np.vdot(w, w).real
    h = np.eye(n, dtype=complex)
    if norm2 > 1e-30:
        h -= 2 * np.outer(w, np.conj(w)) / norm2
    h[:, 0] *= theta
    return h


@dataclass
class StateRuDecomposition:
    weights: np.ndarray
    unitaries: list[np.ndarray]
    kraus: KrausSet

    def reconstruct(self, psi) -> np.ndarray:
        psi = np.asarray(psi, dtype=complex).reshape(-1)
        return sum(
            w * np.outer(u @ psi, np.conj(u @ psi))
            for w, u in zip(self.weights, self.unitaries)
        )


def _pure_vector(psi) -> np.ndarray:
    arr = np.asarray(psi, dtype=complex)
    if arr.ndim == 1:
        norm = np.linalg.norm(arr)
        if abs(norm - 1) > 1e-8:
            raise NonPureInput(f"state vector has norm {norm}")
        return arr / norm
    rho = check_density(arr)
    defect = 1 - np.trace(rho @ rho).real
    if defect > 1e-8:
        raise NonPureInput(f"input is mixed (1 - tr(rho^2) = {defect:.3e}); purify it first")
    lam, vecs = eig_hermitian(rho)
    return vecs[:, 0]


def decompose(psi, rho_out, completion: str = "householder") -> StateRuDecomposition:
    psi = _pure_vector(psi)
    rho_out = check_density(as_matrix(rho_out))
    if rho_out.shape[0] != psi.size:
        raise DimensionMismatch(f"input dim {psi.size} vs output dim {rho_out.shape[0]}")
    lam, vecs = eig_hermitian(rho_out)
    keep = lam > RANK_CUTOFF
    lam, vecs = lam[keep], vecs[:, keep]
    b_in = eigbasis_with_first_column(psi, completion)
    unitaries = [
        eigbasis_with_first_column(vecs[:, j], completion) @ dag(b_in) for j in range(lam.size)
    ]
    kraus = KrausSet(
        [np.sqrt(l) * u for l, u in zip(lam, unitaries)],
        label="state_ru",
        trace_preserving=False,
    )
    return StateRuDecomposition(lam, unitaries, kraus)
