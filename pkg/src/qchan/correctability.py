"""Correctability conditions and conversion of Kraus sets onto a known-correctable set.

The conditions checked are the Knill-Laflamme ones: for a code projector P
and errors ``{E_k}``, ``P E_j^dag E_k P = alpha_jk P`` with ``alpha``
Hermitian. ``check_correctability`` measures how far a set is from that; it
never assumes the answer.

``convert`` rewrites any Kraus set ``{F_j}`` as ``{sqrt(lambda_r) G_r}``,
where the ``G_r`` are unitary mixtures of a reference set ``{E_k}`` and
``lambda_r`` are the eigenvalues of the Gram-like matrix ``H = m^T m*`` built
from the expansion coefficients ``F_j = sum_k m_jk E_k``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channels import KrausSet, completeness_defect
from .errors import (
    ExpansionResidual,
    NonHermitianInput,
    NotAProjector,
    NonUnitary,
    ParameterOutOfRange,
)
from .linalg import (
    RANK_TOL,
    as_matrix,
    dag,
    eig_hermitian,
    hermiticity_defect,
    solve_linear,
    unitarity_defect,
)
from .ru import ru_operator

VERDICT_TOL = 1e-8


def check_projector(p, tol: float = 1e-10) -> np.ndarray:
    p = as_matrix(p)
    if p.shape[0] != p.shape[1]:
        raise NotAProjector(f"projector must be square, got {p.shape}")
    if np.linalg.norm(p @ p - p) > tol or hermiticity_defect(p) > tol:
        raise NotAProjector("P is not an orthogonal projector (P^2 != P or P^dag != P)")
    if np.trace(p).real < 0.5:
        raise NotAProjector("P is the zero projector")
    return p


def _ops(kraus) -> np.ndarray:
    return np.stack([np.asarray(k, dtype=complex) for k in kraus])


def sandwiches(kraus, p) -> np.ndarray:
    """Array ``S[j, k] = P E_j^dag E_k P``."""
    ops = _ops(kraus)
    ep = ops @ p
    return np.einsum("jab,kac->jkbc", np.conj(ep), ep)


def build_alpha(kraus, p) -> np.ndarray:
    """``alpha_lm = tr(P E_l^dag E_m P) / tr(P)``."""
    p = check_projector(p)
    ep = _ops(kraus) @ p
    return np.einsum("jab,kab->jk", np.conj(ep), ep) / np.trace(p).real


@dataclass
class CorrectabilityReport:
    alpha: np.ndarray
    max_residual: float
    hermiticity_defect: float
    tol: float

    @property
    def satisfied(self) -> bool:
        return self.max_residual <= self.tol and self.hermiticity_defect <= self.tol

    @property
    def verdict(self) -> str:
        return "satisfied" if self.satisfied else "violated"


def _residual(kraus, p, alpha) -> float:
    s = sandwiches(kraus, p)
    diff = s - alpha[:, :, None, None] * p[None, None, :, :]
    return float(np.sqrt(np.sum(np.abs(diff) ** 2, axis=(2, 3))).max())


def check_correctability(kraus, p, tol: float = VERDICT_TOL) -> CorrectabilityReport:
    """Measure the correctability residual ``max_jk ||P E_j^dag E_k P - alpha_jk P||_F``.

    ``alpha`` is the trace-normalized candidate; the tolerance is scaled by
    ``tr(P)``.
    """
    p = check_projector(p)
    alpha = build_alpha(kraus, p)
    return CorrectabilityReport(
        alpha=alpha,
        max_residual=_residual(kraus, p, alpha),
        hermiticity_defect=hermiticity_defect(alpha),
        tol=tol * np.trace(p).real,
    )


def beta_from_alpha(alpha, u) -> np.ndarray:
    """``beta_jk = sum_lm U_lj U*_mk alpha_lm``."""
    u = as_matrix(u)
    return u.T @ alpha @ np.conj(u)


def transfer_correctability(kraus, alpha, u, p, tol: float = VERDICT_TOL) -> CorrectabilityReport:
    """Correctability of ``G_l = sum_m U*_ml E_m`` predicted from that of ``{E}``.

    The residual is measured on the actual ``G`` set against the predicted
    ``beta``, so a wrong prediction shows up as a violation.
    """
    u = as_matrix(u)
    if unitarity_defect(u) > 1e-10:
        raise NonUnitary(f"U is not unitary (defect {unitarity_defect(u):.3e})")
    p = check_projector(p)
    ops = _ops(kraus)
    g = np.einsum("ml,mab->lab", np.conj(u), ops)
    beta = beta_from_alpha(alpha, u)
    return CorrectabilityReport(
        alpha=beta,
        max_residual=_residual(g, p, beta),
        hermiticity_defect=hermiticity_defect(beta),
        tol=tol * np.trace(p).real,
    )


@dataclass
class ConversionResult:
    m: np.ndarray
    H: np.ndarray
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    G: KrausSet
    F_tilde: KrausSet
    kept: np.ndarray  # indices r with lambda_r above the rank tolerance
    expansion_residual: float


def expansion_coefficients(kraus, basis) -> tuple[np.ndarray, float]:
    """Rows ``m[j]`` with ``F_j = sum_k m[j, k] E_k``, plus the worst residual."""
    cols = np.stack([np.asarray(e, dtype=complex).reshape(-1) for e in basis], axis=1)
    rows, worst = [], 0.0
    for f in kraus:
        sol = solve_linear(cols, np.asarray(f).reshape(-1))
        scale = max(1.0, float(np.linalg.norm(f)))
        worst = max(worst, sol.residual / scale)
        rows.append(sol.x)
    return np.array(rows), worst


def h_matrix(m) -> np.ndarray:
    """``H_kl = sum_j m_jk m*_jl``."""
    m = np.asarray(m, dtype=complex)
    return m.T @ np.conj(m)


def convert(
    kraus: KrausSet,
    basis,
    coefficients=None,
    rank_tol: float = RANK_TOL,
    residual_tol: float = 1e-10,
) -> ConversionResult:
    """Rewrite ``kraus`` as ``{sqrt(lambda_r) G_r}`` over the reference set ``basis``.

    ``coefficients`` may be passed when the reference set is overcomplete and
    a particular expansion is wanted; it is checked, not trusted.
    """
    basis_ops = list(basis)
    if coefficients is None:
        m, residual = expansion_coefficients(kraus, basis_ops)
    else:
        m = np.asarray(coefficients, dtype=complex)
        recon = np.einsum("jk,kab->jab", m, _ops(basis_ops))
        residual = max(
            float(np.linalg.norm(recon[j] - f)) / max(1.0, float(np.linalg.norm(f)))
            for j, f in enumerate(kraus)
        )
    if residual > residual_tol:
        raise ExpansionResidual(
            f"Kraus operators are not in the span of the basis (residual {residual:.3e})"
        )

    h = h_matrix(m)
    lam, eps = eig_hermitian(h)
    lam = np.where(lam < 0, 0.0, lam)
    cutoff = rank_tol * max(lam.max(), 0.0)
    kept = np.flatnonzero(lam > cutoff)

    e = _ops(basis_ops)
    g_all = np.einsum("kr,kab->rab", eps, e)
    g = KrausSet(list(g_all), label="G", trace_preserving=False)
    f_tilde = KrausSet(
        [np.sqrt(lam[r]) * g_all[r] for r in kept],
        label=f"{kraus.label}~" if kraus.label else "F~",
        trace_preserving=False,
    )
    return ConversionResult(m, h, lam, eps, g, f_tilde, kept, residual)


def gamma_matrix(lam, eps_h, alpha, tol: float = 1e-12) -> np.ndarray:
    """``gamma_jk = sqrt(l_j l_k) sum_sr conj(eps[s, j]) eps[r, k] alpha[s, r]``."""
    lam = np.asarray(lam, dtype=float)
    if lam.min() < -tol:
        raise ParameterOutOfRange(f"negative eigenvalue {lam.min():.3e}")
    root = np.sqrt(np.clip(lam, 0, None))
    eps_h = np.asarray(eps_h, dtype=complex)
    alpha = as_matrix(alpha)
    if hermiticity_defect(alpha) > 1e-10 * max(1.0, float(np.linalg.norm(alpha))):
        raise NonHermitianInput("alpha is not Hermitian")
    core = dag(eps_h) @ alpha @ eps_h
    return root[:, None] * core * root[None, :]


def ou_channel(p: float) -> KrausSet:
    """Four diagonal Kraus operators of Ornstein-Uhlenbeck phase noise on 4 levels."""
    if not 0 <= p <= 1:
        raise ParameterOutOfRange(f"p = {p} outside [0, 1]")
    q = np.sqrt(1 - p * p)
    ops = [
        np.diag([p * p, p, p, 1]),
        np.diag([p * q, 0, q, 0]),
        np.diag([q * p, q, 0, 0]),
        np.diag([q * q, 0, 0, 0]),
    ]
    return KrausSet([o.astype(complex) for o in ops], label=f"ou(p={p})")


def ou_reference_set() -> list[np.ndarray]:
    """The five diagonal RU operators ``Pi_1 N_x / sqrt(32)`` for x = 0, 1, 2, 3, 4."""
    return [ru_operator(1, x, 4) for x in [(), (1,), (2,), (3,), (4,)]]


def coefficient_matrix_ou(p: float) -> np.ndarray:
    """Closed-form expansion of ``ou_channel(p)`` over ``ou_reference_set()``.

    The five reference operators are linearly dependent, so this is one
    particular expansion (the one using ``E_kk = (N_0 - N_k) / 2``).
    """
    if not 0 <= p <= 1:
        raise ParameterOutOfRange(f"p = {p} outside [0, 1]")
    q = np.sqrt(1 - p * p)
    a = np.sqrt(32)
    m = np.array(
        [
            [(p + 1) ** 2, -p * p, -p, -p, -1],
            [(p + 1) * q, -p * q, 0, -q, 0],
            [(p + 1) * q, -p * q, -q, 0, 0],
            [q * q, -q * q, 0, 0, 0],
        ],
        dtype=complex,
    )
    return a / 2 * m


def h_matrix_ou(p: float) -> np.ndarray:
    """Closed form of ``h_matrix(coefficient_matrix_ou(p))`` with ``s = 1 + p``."""
    s2 = (1 + p) ** 2
    h = np.array(
        [
            [4 * s2, -s2, -s2, -s2, -s2],
            [-s2, 1, p, p, p * p],
            [-s2, p, 1, p * p, p],
            [-s2, p, p * p, 1, p],
            [-s2, p * p, p, p, 1],
        ],
        dtype=complex,
    )
    return 8 * h


def ou_converted(p: float) -> ConversionResult:
    """Conversion of the OU channel over the five-operator reference set."""
    return convert(ou_channel(p), ou_reference_set(), coefficients=coefficient_matrix_ou(p))


def converted_completeness(result: ConversionResult) -> float:
    return completeness_defect(result.F_tilde)
