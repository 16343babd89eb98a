"""Kraus-set channels: application, completeness, equality and unitary freedom."""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import DimensionMismatch, IncompleteKrausSet, ParameterOutOfRange
from .linalg import as_matrix, dag, orthonormal_complement, unitarity_defect
from .states import bloch_distance_sq, random_density, rng_for

COMPLETENESS_TOL = 1e-10


@dataclass
class KrausSet:
    """Ordered Kraus operators, all ``dim_out x dim_in``.

    ``trace_preserving=False`` marks raw operator lists (projectors, partial
    expansions) that are not expected to satisfy completeness. Incomplete
    sets only warn here; ``apply`` refuses them.
    """

    operators: list[np.ndarray]
    label: str = ""
    trace_preserving: bool = True
    dim_in: int = field(init=False)
    dim_out: int = field(init=False)

    def __post_init__(self):
        ops = [as_matrix(k) for k in self.operators]
        if not ops:
            raise ValueError("a Kraus set needs at least one operator")
        shape = ops[0].shape
        for k in ops:
            if k.shape != shape:
                raise DimensionMismatch(f"mixed operator shapes {shape} and {k.shape}")
        self.operators = ops
        self.dim_out, self.dim_in = shape
        if self.trace_preserving:
            defect = completeness_defect(self)
            if defect > COMPLETENESS_TOL:
                warnings.warn(
                    f"Kraus set {self.label!r} is incomplete (defect {defect:.3e})",
                    stacklevel=2,
                )

    def __len__(self) -> int:
        return len(self.operators)

    def __iter__(self):
        return iter(self.operators)

    def __getitem__(self, i):
        return self.operators[i]

    def stacked(self) -> np.ndarray:
        return np.stack(self.operators)


def kraus_set(ops: Iterable, label: str = "", trace_preserving: bool = True) -> KrausSet:
    return KrausSet(list(ops), label=label, trace_preserving=trace_preserving)


def completeness_defect(kraus: KrausSet | Sequence[np.ndarray]) -> float:
    """``||sum K^dag K - I||_F``."""
    ops = np.stack([np.asarray(k, dtype=complex) for k in kraus])
    total = np.einsum("kji,kjl->il", np.conj(ops), ops)
    return float(np.linalg.norm(total - np.eye(total.shape[0])))


check_completeness = completeness_defect


def apply(kraus: KrausSet, rho, tol: float = 1e-9) -> np.ndarray:
    """``sum_k K rho K^dag``."""
    rho = as_matrix(rho)
    if rho.shape != (kraus.dim_in, kraus.dim_in):
        raise DimensionMismatch(
            f"state of shape {rho.shape} does not fit a {kraus.dim_in}-dim input"
        )
    defect = completeness_defect(kraus)
    if defect > tol:
        raise IncompleteKrausSet(
            f"Kraus set {kraus.label!r} is incomplete (defect {defect:.3e})"
        )
    return apply_unchecked(kraus, rho)


def apply_unchecked(kraus, rho) -> np.ndarray:
    ops = np.stack([np.asarray(k, dtype=complex) for k in kraus])
    return np.einsum("kij,jl,kml->im", ops, rho, np.conj(ops))


def depolarize_reference(rho, p: float) -> np.ndarray:
    """Depolarizing channel in closed form, ``p I/n + (1-p) rho``."""
    if not 0 <= p <= 1:
        raise ParameterOutOfRange(f"p = {p} outside [0, 1]")
    rho = as_matrix(rho)
    n = rho.shape[0]
    return p * np.eye(n) / n + (1 - p) * rho


def pauli_depolarizing(p: float) -> KrausSet:
    """Single-qubit depolarizing channel via the four Pauli operators."""
    if not 0 <= p <= 1:
        raise ParameterOutOfRange(f"p = {p} outside [0, 1]")
    i2 = np.eye(2)
    x = np.array([[0, 1], [1, 0]])
    y = np.array([[0, -1j], [1j, 0]])
    z = np.diag([1, -1])
    ops = [np.sqrt(1 - 3 * p / 4) * i2] + [np.sqrt(p) / 2 * s for s in (x, y, z)]
    return KrausSet(ops, label=f"depolarizing(p={p})")


def process_matrix(kraus) -> np.ndarray:
    """``sum_k vec(K) vec(K)^dag``; equal for two Kraus sets iff same channel."""
    a = np.stack([np.asarray(k, dtype=complex).reshape(-1) for k in kraus], axis=1)
    return a @ dag(a)


def process_distance(a, b) -> float:
    pa, pb = process_matrix(a), process_matrix(b)
    if pa.shape != pb.shape:
        raise DimensionMismatch(f"process matrices {pa.shape} vs {pb.shape}")
    return float(np.linalg.norm(pa - pb))


def unitary_relate(e: KrausSet, g: KrausSet, tol: float = 1e-8) -> np.ndarray | None:
    """Unitary ``U`` with ``E_k = sum_l U[k, l] G_l``, or None if none exists.

    The shorter set is padded with zero operators. The columns of the two
    stacked operator matrices share a range exactly when the channels agree;
    ``U`` maps one set of reduced coordinates onto the other and is completed
    on the orthogonal complement.
    """
    if (e.dim_in, e.dim_out) != (g.dim_in, g.dim_out):
        raise DimensionMismatch("Kraus sets act between different spaces")
    size = max(len(e), len(g))
    a = _padded_columns(e, size)
    b = _padded_columns(g, size)

    evals, evecs = np.linalg.eigh(a @ dag(a))
    scale = max(evals.max(), 1e-300)
    keep = evals > 1e-12 * scale
    w = evecs[:, keep]
    inv_sqrt = 1 / np.sqrt(evals[keep])
    xa = dag(a) @ w * inv_sqrt
    xb = dag(b) @ w * inv_sqrt
    # xb only has orthonormal columns if the channels match; verified below
    ut = xb @ dag(xa) + orthonormal_complement(_orthonormalize(xb)) @ dag(
        orthonormal_complement(xa)
    )
    u = ut.T
    residual = float(np.linalg.norm(a - b @ ut)) / max(1.0, float(np.linalg.norm(a)))
    if residual > tol or unitarity_defect(u) > tol:
        return None
    return u


def _padded_columns(kraus: KrausSet, size: int) -> np.ndarray:
    cols = [k.reshape(-1) for k in kraus.operators]
    cols += [np.zeros(kraus.dim_in * kraus.dim_out, dtype=complex)] * (size - len(cols))
    return np.stack(cols, axis=1)


def _orthonormalize(q: np.ndarray) -> np.ndarray:
    if q.shape[1] == 0:
        return q
    u, _, vh = np.linalg.svd(q, full_matrices=False)
    return u @ vh


@dataclass
class ChannelEqualityReport:
    max_bloch_distance_sq: float
    samples: int
    seed: int
    distances: list[float] = field(default_factory=list, repr=False)


def channels_equal(a: KrausSet, b: KrausSet, samples: int = 1000, seed: int = 0) -> ChannelEqualityReport:
    """Monte-Carlo equality test on seeded random mixed inputs."""
    if (a.dim_in, a.dim_out) != (b.dim_in, b.dim_out):
        raise DimensionMismatch("channels act between different spaces")
    dists = []
    for i in range(samples):
        rho = random_density(a.dim_in, rng_for(seed, i))
        dists.append(bloch_distance_sq(apply(a, rho), apply(b, rho)))
    return ChannelEqualityReport(max(dists) if dists else 0.0, samples, seed, dists)
