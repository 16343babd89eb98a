"""Random-unitary decompositions of the maximal-mixing and depolarizing channels.

Two routes to the same channel live here:

* the recursive one, ``dephase_full`` (sign-flip averaging) followed by
  ``permutation_channel`` (cyclic-shift averaging), which never builds a
  Kraus list and so scales to any dimension;
* the explicit one, ``ru_kraus_set(n)``: every cyclic shift ``Pi_m`` times
  every one of the ``2**(n-1)`` sign patterns ``N_x`` that are not global
  negatives of one another, each weighted by ``1/sqrt(n 2**(n-1))``.

The first ``n`` members of each shift family already span all ``n x n``
matrices (``hs_basis``); ``transformation_T`` is the matrix relating them to
the elementary matrices supporting that shift.

Indices are 1-based throughout, to match the usual written form of these
operators.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations, islice
from typing import Iterator

import numpy as np

from .channels import KrausSet
from .errors import ParameterOutOfRange, RankDeficientBasis
from .linalg import as_matrix, dag, elementary, rank, solve_linear

MAX_EXPLICIT_DIM = 16


def n_flip(k: int, n: int) -> np.ndarray:
    """``I - 2 E_(k,k)``."""
    if not 1 <= k <= n:
        raise ParameterOutOfRange(f"flip index {k} outside 1..{n}")
    return np.eye(n, dtype=complex) - 2 * elementary(k, k, n)


def n_flip_multi(x: tuple[int, ...], n: int) -> np.ndarray:
    """Diagonal sign-flip operator for index vector ``x``; ``()`` is the identity."""
    x = tuple(x)
    if len(set(x)) != len(x) or any(not 1 <= k <= n for k in x):
        raise ParameterOutOfRange(f"invalid flip indices {x} for n = {n}")
    signs = np.ones(n)
    signs[[k - 1 for k in x]] = -1
    return np.diag(signs).astype(complex)


def dephase_step(rho, k: int) -> np.ndarray:
    rho = as_matrix(rho)
    n = rho.shape[0]
    if not 1 <= k <= n - 1:
        raise ParameterOutOfRange(f"dephasing step {k} outside 1..{n - 1}")
    nk = n_flip(k, n)
    return 0.5 * rho + 0.5 * nk @ rho @ dag(nk)


def dephase_full(rho) -> np.ndarray:
    """Apply the dephasing steps ``1 .. n-1`` in order; leaves only the diagonal."""
    rho = as_matrix(rho)
    for k in range(1, rho.shape[0]):
        rho = dephase_step(rho, k)
    return rho


def permutation_matrix(m: int, n: int) -> np.ndarray:
    """Cyclic shift whose rows are ``R_m, R_(m+1), ..., R_(m-1)``."""
    if not 1 <= m <= n:
        raise ParameterOutOfRange(f"permutation index {m} outside 1..{n}")
    p = np.zeros((n, n), dtype=complex)
    for r in range(n):
        p[r, (m - 1 + r) % n] = 1
    return p


def permutation_channel(rho) -> np.ndarray:
    rho = as_matrix(rho)
    n = rho.shape[0]
    out = np.zeros_like(rho)
    for m in range(1, n + 1):
        pm = permutation_matrix(m, n)
        out += pm @ rho @ dag(pm)
    return out / n


def maximal_mixing(rho) -> np.ndarray:
    return permutation_channel(dephase_full(rho))


def depolarize_ru(rho, p: float) -> np.ndarray:
    if not 0 <= p <= 1:
        raise ParameterOutOfRange(f"p = {p} outside [0, 1]")
    rho = as_matrix(rho)
    return p * maximal_mixing(rho) + (1 - p) * rho


def _all_sign_vectors(n: int) -> Iterator[tuple[int, ...]]:
    yield ()
    for k in range(1, n + 1):
        yield from combinations(range(1, n + 1), k)


def enumerate_sign_vectors(n: int) -> list[tuple[int, ...]]:
    """The first ``2**(n-1)`` flip-index vectors: ``()``, singletons, pairs, ...

    Combinations of each size come in lexicographic order. ``()`` stands for
    "no flips".
    """
    if n < 2:
        raise ValueError("need n >= 2")
    return list(islice(_all_sign_vectors(n), 2 ** (n - 1)))


def ru_weight(n: int) -> float:
    return 1 / np.sqrt(n * 2 ** (n - 1))


@dataclass(frozen=True)
class RuLabel:
    m: int
    x: tuple[int, ...]

    def __str__(self):
        flips = ",".join(map(str, self.x)) if self.x else "0"
        return f"Pi{self.m}N({flips})"


def ru_labels(n: int) -> list[RuLabel]:
    """Operator order used by ``ru_kraus_set``: shift ``m`` outer, flips inner."""
    xs = enumerate_sign_vectors(n)
    return [RuLabel(m, x) for m in range(1, n + 1) for x in xs]


def ru_operator(m: int, x: tuple[int, ...], n: int) -> np.ndarray:
    return ru_weight(n) * permutation_matrix(m, n) @ n_flip_multi(x, n)


def ru_kraus_set(n: int, max_dim: int = MAX_EXPLICIT_DIM) -> KrausSet:
    """Explicit RU Kraus set of the maximal-mixing channel (``n 2**(n-1)`` ops)."""
    if n < 2:
        raise ValueError("need n >= 2")
    if n > max_dim:
        raise MemoryError(
            f"n = {n} gives {n * 2 ** (n - 1)} operators; raise max_dim to allow it"
        )
    ops = [ru_operator(lab.m, lab.x, n) for lab in ru_labels(n)]
    return KrausSet(ops, label=f"ru_maximal_mixing(n={n})")


def transformation_T(n: int) -> np.ndarray:
    """``(Omega - 2 sum_k E_(k+1,k)) / sqrt(n 2**(n-1))`` with Omega all ones."""
    if n < 2:
        raise ValueError("need n >= 2")
    t = np.ones((n, n), dtype=complex)
    for k in range(1, n):
        t[k, k - 1] -= 2
    return ru_weight(n) * t


def det_T_closed_form(n: int) -> float:
    """Determinant of ``transformation_T(n)``: ``2**(n-1) / (n 2**(n-1))**(n/2)``."""
    return 2.0 ** (n - 1) / (n * 2.0 ** (n - 1)) ** (n / 2)


def family_support(m: int, n: int) -> list[tuple[int, int]]:
    """Positions (row, col) of the nonzeros of ``Pi_m``, ordered by column."""
    return [(((k - m) % n) + 1, k) for k in range(1, n + 1)]


@dataclass
class HsBasis:
    """The ``n**2`` operators formed by the first ``n`` members of each shift family."""

    n: int
    labels: list[RuLabel]
    operators: list[np.ndarray]
    relation_residual: float
    gram_rank: int

    def as_kraus(self) -> KrausSet:
        return KrausSet(self.operators, label=f"hs_basis(n={self.n})", trace_preserving=False)

    def columns(self) -> np.ndarray:
        return np.stack([op.reshape(-1) for op in self.operators], axis=1)


def hs_basis(n: int) -> HsBasis:
    if n < 2:
        raise ValueError("need n >= 2")
    xs = enumerate_sign_vectors(n)[:n]
    t = transformation_T(n)
    labels, ops = [], []
    residual = 0.0
    for m in range(1, n + 1):
        family = [ru_operator(m, x, n) for x in xs]
        support = [elementary(r, c, n) for r, c in family_support(m, n)]
        for j in range(n):
            from_t = sum(t[j, k] * support[k] for k in range(n))
            residual = max(residual, float(np.abs(from_t - family[j]).max()))
        labels.extend(RuLabel(m, x) for x in xs)
        ops.extend(family)
    cols = np.stack([op.reshape(-1) for op in ops], axis=1)
    gram = dag(cols) @ cols
    r = rank(gram)
    if r != n * n:
        raise RankDeficientBasis(f"selected operators have Gram rank {r} < {n * n}")
    return HsBasis(n, labels, ops, residual, r)


def gram_rank(ops, tol: float = 1e-9) -> int:
    cols = np.stack([np.asarray(op).reshape(-1) for op in ops], axis=1)
    return rank(dag(cols) @ cols, tol)


def hs_expand(a, basis) -> np.ndarray:
    """Coefficients ``c`` with ``A = sum_k c_k basis_k``.

    Solved as a linear system; the RU operators are not HS-orthogonal, so
    trace inner products would give the wrong coefficients.
    """
    ops = basis.operators if hasattr(basis, "operators") else list(basis)
    cols = np.stack([np.asarray(op, dtype=complex).reshape(-1) for op in ops], axis=1)
    sol = solve_linear(cols, as_matrix(a).reshape(-1))
    return sol.x
