"""Recovery channels built from correctable error sets.

A plan is a list of orthogonal syndrome projectors ``P_k`` with correction
unitaries ``U_k``; the recovery map is ``sigma -> sum_k U_k^dag P_k sigma P_k U_k``.
Each ``U_k`` comes from the polar decomposition of ``Fbar_k P`` where the
``Fbar_k`` are the error operators rotated so that their correctability
matrix is diagonal.

Two ways in:

* ``plan_from_correctable(Q, code)`` diagonalizes ``alpha`` of a known
  correctable set and builds a plan that then corrects every channel whose
  Kraus operators lie in the span of ``Q``;
* ``plan_for_noise(noise, code)`` first converts the noise onto the code's
  reference set (``correctability.convert``), diagonalizes ``gamma`` and
  builds a plan tailored to that channel.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .channels import KrausSet, apply, completeness_defect
from .correctability import (
    build_alpha,
    check_correctability,
    check_projector,
    convert,
    gamma_matrix,
)
from .errors import DimensionMismatch, NonHermitianInput, ProjectorDefect, ZeroTrace
from .linalg import (
    RANK_TOL,
    as_matrix,
    dag,
    eig_hermitian,
    hermiticity_defect,
    svd,
    unitarity_defect,
)
from .ru import gram_rank
from .states import partial_trace_ancilla

PROJECTOR_TOL = 1e-8
COMPLETION_TOL = 1e-9

PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)


def embed(op: np.ndarray, qubit: int, n_qubits: int) -> np.ndarray:
    """Single-qubit ``op`` on ``qubit`` (1-based, qubit 1 most significant)."""
    out = np.eye(1, dtype=complex)
    for q in range(1, n_qubits + 1):
        out = np.kron(out, op if q == qubit else np.eye(2))
    return out


@dataclass
class CodeSpec:
    n_sys: int
    n_anc: int
    P: np.ndarray
    U_C: np.ndarray
    description: str = ""
    correctable: KrausSet | None = None  # reference error set known to be correctable
    ancilla_state: np.ndarray | None = None

    def __post_init__(self):
        self.P = check_projector(self.P)
        self.U_C = as_matrix(self.U_C)
        dim = self.n_sys * self.n_anc
        if self.P.shape != (dim, dim) or self.U_C.shape != (dim, dim):
            raise DimensionMismatch(f"code operators must be {dim} x {dim}")
        if unitarity_defect(self.U_C) > 1e-10:
            raise ValueError("encoding operator is not unitary")
        if np.trace(self.P).real < self.n_sys - 0.5:
            raise ValueError("code projector has rank below the system dimension")
        if self.ancilla_state is None:
            self.ancilla_state = np.eye(self.n_anc, dtype=complex)[0]

    @property
    def dim(self) -> int:
        return self.n_sys * self.n_anc

    def encode(self, rho) -> np.ndarray:
        anc = np.outer(self.ancilla_state, np.conj(self.ancilla_state))
        return self.U_C @ np.kron(as_matrix(rho), anc) @ dag(self.U_C)

    def decode(self, rho_c) -> np.ndarray:
        return partial_trace_ancilla(dag(self.U_C) @ rho_c @ self.U_C, self.n_sys, self.n_anc)


def bitflip_errors() -> list[np.ndarray]:
    """``{I, X1, X2, X3} / 2`` on three qubits (a complete Kraus set)."""
    ops = [np.eye(8, dtype=complex)] + [embed(PAULI_X, q, 3) for q in (1, 2, 3)]
    return [op / 2 for op in ops]


def bitflip_code() -> CodeSpec:
    """Three-qubit repetition code: system qubit 1, ancilla qubits 2 and 3.

    ``U_C`` is the pair of CNOTs ``|b, a1, a2> -> |b, a1^b, a2^b>``, taking
    ``|b>|00>`` to ``|bbb>``.
    """
    u = np.zeros((8, 8), dtype=complex)
    for b in range(2):
        for a1 in range(2):
            for a2 in range(2):
                src = 4 * b + 2 * a1 + a2
                dst = 4 * b + 2 * (a1 ^ b) + (a2 ^ b)
                u[dst, src] = 1
    p = np.zeros((8, 8), dtype=complex)
    p[0, 0] = p[7, 7] = 1
    return CodeSpec(
        n_sys=2,
        n_anc=4,
        P=p,
        U_C=u,
        description="3-qubit bit-flip code",
        correctable=KrausSet(bitflip_errors(), label="{I,X1,X2,X3}/2"),
    )


def random_bitflip_channel(rng) -> KrausSet:
    """Random channel whose Kraus operators are combinations of ``{I, X1, X2, X3}``.

    ``K_j = sum_k V[j, k] sqrt(p_k) sigma_k`` with ``V`` an isometry, which
    makes the set complete for any probability vector ``p``.
    """
    paulis = np.stack([2 * e for e in bitflip_errors()])
    probs = rng.dirichlet(np.ones(4))
    j = int(rng.integers(4, 7))
    g = rng.standard_normal((j, 4)) + 1j * rng.standard_normal((j, 4))
    iso, _ = np.linalg.qr(g)
    coeffs = iso[:, :4] * np.sqrt(probs)[None, :]
    return KrausSet(list(np.einsum("jk,kab->jab", coeffs, paulis)), label="random_bitflip")


def trivial_code(n: int) -> CodeSpec:
    """No encoding: ``P = I``, ``U_C = I`` on the bare n-level system."""
    return CodeSpec(n_sys=n, n_anc=1, P=np.eye(n), U_C=np.eye(n), description="trivial")


class BarSet(NamedTuple):
    kraus: KrausSet
    d: np.ndarray
    eigenvectors: np.ndarray


def bar_set(f_tilde, gamma) -> BarSet:
    """``Fbar_a = sum_k conj((eps^dag)[a, k]) F~_k`` so that P Fbar_a^dag Fbar_b P is diagonal."""
    gamma = as_matrix(gamma)
    if hermiticity_defect(gamma) > 1e-10 * max(1.0, float(np.linalg.norm(gamma))):
        raise NonHermitianInput("gamma is not Hermitian")
    d, eps = eig_hermitian(gamma)
    ops = np.stack([np.asarray(f, dtype=complex) for f in f_tilde])
    fbar = np.einsum("ka,kij->aij", eps, ops)
    return BarSet(KrausSet(list(fbar), label="Fbar", trace_preserving=False), d, eps)


@dataclass
class RecoveryPlan:
    projectors: list[np.ndarray]
    unitaries: list[np.ndarray]
    weights: np.ndarray
    r_alpha: int
    has_completion: bool = False
    diagnostics: dict = field(default_factory=dict)

    @property
    def recovery_ops(self) -> list[np.ndarray]:
        """Kraus operators ``R_k = U_k^dag P_k^dag``."""
        return [dag(u) @ dag(p) for p, u in zip(self.projectors, self.unitaries)]


def build_recovery(fbar, code: CodeSpec, d, rank_tol: float = RANK_TOL) -> RecoveryPlan:
    """Syndrome projectors and correction unitaries from a diagonalized error set.

    Raises ``ProjectorDefect`` if the resulting ``P_k`` are not orthogonal
    projectors, which happens when ``fbar`` was not correctable on ``code``.
    """
    d = np.asarray(d, dtype=float)
    p = code.P
    dim = code.dim
    cutoff = rank_tol * max(d.max(), 0.0)
    projectors, unitaries, weights = [], [], []
    for k, fk in enumerate(fbar):
        if d[k] <= cutoff:
            continue
        fp = np.asarray(fk) @ p
        w, _, x = svd(fp)
        uk = w @ dag(x)
        pk = fp @ dag(uk) / np.sqrt(d[k])
        projectors.append(pk)
        unitaries.append(uk)
        weights.append(d[k])

    worst_idem, worst_orth, worst_herm = 0.0, 0.0, 0.0
    for i, pi in enumerate(projectors):
        worst_idem = max(worst_idem, float(np.linalg.norm(pi @ pi - pi)))
        worst_herm = max(worst_herm, hermiticity_defect(pi))
        for pj in projectors[i + 1 :]:
            worst_orth = max(worst_orth, float(np.linalg.norm(pi @ pj)))
    if max(worst_idem, worst_orth, worst_herm) > PROJECTOR_TOL:
        raise ProjectorDefect(
            f"syndrome projectors defective: idempotence {worst_idem:.3e}, "
            f"orthogonality {worst_orth:.3e}, hermiticity {worst_herm:.3e}"
        )
    projectors = [(pk + dag(pk)) / 2 for pk in projectors]
    r = len(projectors)
    rest = np.eye(dim) - sum(projectors)
    has_completion = np.linalg.norm(rest) > COMPLETION_TOL
    if has_completion:
        projectors.append(rest)
        unitaries.append(np.eye(dim, dtype=complex))
    return RecoveryPlan(
        projectors,
        unitaries,
        np.array(weights),
        r,
        has_completion,
        {"idempotence": worst_idem, "orthogonality": worst_orth, "hermiticity": worst_herm},
    )


def plan_from_correctable(q, code: CodeSpec) -> RecoveryPlan:
    """Plan from a known correctable set via the eigenvectors of its ``alpha``."""
    alpha = build_alpha(q, code.P)
    bar = bar_set(q, alpha)
    return build_recovery(bar.kraus, code, bar.d)


def plan_for_noise(noise: KrausSet, code: CodeSpec, reference=None) -> RecoveryPlan:
    """Plan tailored to ``noise`` after converting it onto the code's reference set."""
    reference = code.correctable if reference is None else reference
    if reference is None:
        raise ValueError("code has no reference correctable set; pass one explicitly")
    conv = convert(noise, reference)
    alpha = build_alpha(reference, code.P)
    gamma = gamma_matrix(conv.eigenvalues[conv.kept], conv.eigenvectors[:, conv.kept], alpha)
    bar = bar_set(conv.F_tilde, gamma)
    return build_recovery(bar.kraus, code, bar.d)


def apply_recovery(plan: RecoveryPlan, sigma) -> np.ndarray:
    """Recovery map followed by renormalization to unit trace."""
    sigma = as_matrix(sigma)
    out = np.zeros_like(sigma)
    for r in plan.recovery_ops:
        out += r @ sigma @ dag(r)
    tr = np.trace(out).real
    if abs(tr) < 1e-14:
        raise ZeroTrace("state is annihilated by every syndrome projector")
    return out / tr


def recover_end_to_end(rho, code: CodeSpec, noise: KrausSet, plan: RecoveryPlan | None = None) -> np.ndarray:
    """Encode, apply noise, recover, decode and trace out the ancilla."""
    if plan is None:
        plan = plan_for_noise(noise, code)
    rho_c = code.encode(rho)
    sigma = apply(noise, rho_c)
    return code.decode(apply_recovery(plan, sigma))


def syndrome_identity_residual(plan: RecoveryPlan, fbar, code: CodeSpec) -> float:
    """``max_kl ||U_k^dag P_k^dag Fbar_l P - delta_kl sqrt(d_k) P||_F`` over syndrome k."""
    worst = 0.0
    p = code.P
    for k in range(plan.r_alpha):
        rk = dag(plan.unitaries[k]) @ dag(plan.projectors[k])
        for l, fl in enumerate(fbar):
            target = np.sqrt(plan.weights[k]) * p if l == k else 0 * p
            worst = max(worst, float(np.linalg.norm(rk @ fl @ p - target)))
    return worst


def diagonality_residual(fbar, d, p) -> float:
    """``max_ab ||P Fbar_a^dag Fbar_b P - delta_ab d_b P||_F``."""
    ops = np.stack([np.asarray(f) for f in fbar])
    worst = 0.0
    for a in range(len(ops)):
        for b in range(len(ops)):
            lhs = p @ dag(ops[a]) @ ops[b] @ p
            rhs = d[b] * p if a == b else 0 * p
            worst = max(worst, float(np.linalg.norm(lhs - rhs)))
    return worst


@dataclass
class UniversalConditionsReport:
    hs_complete: bool
    gram_rank: int
    required_rank: int
    correctable: bool
    correctability_residual: float
    alpha_hermiticity_defect: float
    eps_alpha_unitarity_defect: float
    stabilized: bool
    stabilization_residual: float
    completeness_defect: float
    warnings: list[str] = field(default_factory=list)

    @property
    def all_passed(self) -> bool:
        return self.hs_complete and self.correctable and self.stabilized

    def to_dict(self) -> dict:
        return {
            "hs_complete": self.hs_complete,
            "gram_rank": self.gram_rank,
            "required_rank": self.required_rank,
            "correctable": self.correctable,
            "correctability_residual": self.correctability_residual,
            "alpha_hermiticity_defect": self.alpha_hermiticity_defect,
            "eps_alpha_unitarity_defect": self.eps_alpha_unitarity_defect,
            "stabilized": self.stabilized,
            "stabilization_residual": self.stabilization_residual,
            "completeness_defect": self.completeness_defect,
            "all_passed": self.all_passed,
            "warnings": list(self.warnings),
        }


def check_universal_conditions(q, code: CodeSpec, tol: float = 1e-8) -> UniversalConditionsReport:
    """Measure the three requirements on a candidate universal error set ``q``.

    1. HS completeness on the joint space (Gram rank ``n_Q**2``);
    2. correctability on ``code.P``, plus unitarity of the eigenvectors of alpha;
    3. encoded inputs are left alone by ``P``, checked on every ``E_(a,b)``.
    """
    ops = [as_matrix(op) for op in q]
    n_q = ops[0].shape[0]
    notes = []
    if code.n_anc < code.n_sys**2:
        notes.append(
            f"ancilla dimension {code.n_anc} is below n_sys**2 = {code.n_sys ** 2}"
        )
    r = gram_rank(ops)
    report = check_correctability(ops, code.P, tol)
    _, eps = eig_hermitian(report.alpha, tol=max(1e-10, 10 * report.hermiticity_defect + 1e-10))
    stab = 0.0
    for a in range(code.n_sys):
        for b in range(code.n_sys):
            e = np.zeros((code.n_sys, code.n_sys), dtype=complex)
            e[a, b] = 1
            rc = code.encode(e)
            stab = max(stab, float(np.linalg.norm(code.P @ rc @ code.P - rc)))
    eps_defect = unitarity_defect(eps)
    return UniversalConditionsReport(
        hs_complete=r == n_q * n_q,
        gram_rank=r,
        required_rank=n_q * n_q,
        correctable=report.satisfied and eps_defect <= tol,
        correctability_residual=report.max_residual,
        alpha_hermiticity_defect=report.hermiticity_defect,
        eps_alpha_unitarity_defect=eps_defect,
        stabilized=stab <= tol,
        stabilization_residual=stab,
        completeness_defect=completeness_defect(ops),
        warnings=notes,
    )
