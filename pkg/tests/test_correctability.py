import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qchan import correctability as cr
from qchan.channels import KrausSet, apply, completeness_defect, process_distance
from qchan.errors import (
    ExpansionResidual,
    NonUnitary,
    NotAProjector,
    ParameterOutOfRange,
    RankDeficientBasis,
)
from qchan.linalg import elementary
from qchan.recovery import PAULI_Z, bitflip_code, embed
from qchan.ru import hs_basis, ru_kraus_set
from qchan.states import random_density, rng_for

from conftest import random_kraus, random_unitary


def loop_alpha(ops, p):
    tr = np.trace(p).real
    return np.array([[np.trace(p @ a.conj().T @ b @ p) / tr for b in ops] for a in ops])


def loop_residual(ops, p, alpha):
    return max(
        np.linalg.norm(p @ a.conj().T @ b @ p - alpha[j, k] * p)
        for j, a in enumerate(ops)
        for k, b in enumerate(ops)
    )


def test_alpha_of_identity():
    p = np.diag([1, 0, 1]).astype(complex)
    np.testing.assert_allclose(cr.build_alpha([np.eye(3)], p), [[1]])


def test_alpha_bitflip_is_diagonal():
    code = bitflip_code()
    ops = code.correctable.operators
    alpha = cr.build_alpha(ops, code.P)
    np.testing.assert_allclose(alpha, loop_alpha(ops, code.P), atol=1e-15)
    np.testing.assert_allclose(alpha, np.eye(4) / 4, atol=1e-15)


def test_alpha_with_identity_projector_reduces_to_trace():
    ops = ru_kraus_set(4).operators
    alpha = cr.build_alpha(ops, np.eye(4))
    ref = np.array([[np.trace(a.conj().T @ b) / 4 for b in ops] for a in ops])
    np.testing.assert_allclose(alpha, ref, atol=1e-15)


def test_projector_validation():
    with pytest.raises(NotAProjector):
        cr.build_alpha([np.eye(2)], np.array([[1, 1], [0, 0]]))
    with pytest.raises(NotAProjector):
        cr.build_alpha([np.eye(2)], np.zeros((2, 2)))
    with pytest.raises(NotAProjector):
        cr.build_alpha([np.eye(2)], np.diag([0.5, 0.5]))


def test_bitflip_errors_are_correctable():
    code = bitflip_code()
    rep = cr.check_correctability(code.correctable, code.P)
    assert rep.verdict == "satisfied"
    assert loop_residual(code.correctable.operators, code.P, rep.alpha) < 1e-12


def test_phase_error_is_not_correctable_on_bitflip_code():
    code = bitflip_code()
    ops = code.correctable.operators + [embed(PAULI_Z, 1, 3) / 2]
    rep = cr.check_correctability(ops, code.P)
    assert rep.verdict == "violated"
    # P Z1 P = |000><000| - |111><111| is not a multiple of P
    pzp = code.P @ embed(PAULI_Z, 1, 3) @ code.P
    np.testing.assert_allclose(np.diag(pzp)[[0, 7]], [1, -1])
    assert rep.max_residual == pytest.approx(loop_residual(ops, code.P, rep.alpha), rel=1e-12)


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), n=st.integers(2, 5), count=st.integers(1, 6))
def test_rank_one_projector_is_always_satisfied(seed, n, count):
    rng = np.random.default_rng(seed)
    ops = [rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n)) for _ in range(count)]
    j = int(rng.integers(1, n + 1))
    rep = cr.check_correctability(ops, elementary(j, j, n))
    assert rep.satisfied
    assert rep.hermiticity_defect < 1e-12


def test_transfer_identity_and_permutation():
    code = bitflip_code()
    ops = code.correctable
    alpha = cr.build_alpha(ops, code.P)
    rep = cr.transfer_correctability(ops, alpha, np.eye(4), code.P)
    np.testing.assert_allclose(rep.alpha, alpha)
    perm = np.eye(4)[[2, 0, 3, 1]]
    a = np.diag([1.0, 2.0, 3.0, 4.0])
    np.testing.assert_allclose(cr.beta_from_alpha(a, perm), perm.T @ a @ perm)


def test_transfer_random_unitary_on_bitflip(rng):
    code = bitflip_code()
    ops = code.correctable
    alpha = cr.build_alpha(ops, code.P)
    for _ in range(20):
        u = random_unitary(rng, 4)
        rep = cr.transfer_correctability(ops, alpha, u, code.P)
        assert np.linalg.norm(rep.alpha - rep.alpha.conj().T) < 1e-12
        assert rep.max_residual < 1e-10
        # independent check: build G explicitly and run the loop oracle
        g = [sum(np.conj(u[m, l]) * ops[m] for m in range(4)) for l in range(4)]
        assert loop_residual(g, code.P, rep.alpha) < 1e-10


def test_transfer_rejects_non_unitary():
    code = bitflip_code()
    with pytest.raises(NonUnitary):
        cr.transfer_correctability(code.correctable, np.eye(4), 2 * np.eye(4), code.P)


def test_convert_identity_channel():
    res = cr.convert(KrausSet([np.eye(3)]), hs_basis(3).as_kraus())
    assert len(res.F_tilde) == 1
    op = res.F_tilde[0]
    phase = op[0, 0] / abs(op[0, 0])
    np.testing.assert_allclose(op / phase, np.eye(3), atol=1e-12)


@pytest.mark.parametrize("p", [0.0, 0.1, 0.3, 0.5, 0.77, 1.0])
def test_ou_h_matrix_matches_closed_form(p):
    s2 = (1 + p) ** 2
    literal = 8 * np.array(
        [
            [4 * s2, -s2, -s2, -s2, -s2],
            [-s2, 1, p, p, p**2],
            [-s2, p, 1, p**2, p],
            [-s2, p, p**2, 1, p],
            [-s2, p**2, p, p, 1],
        ]
    )
    res = cr.ou_converted(p)
    np.testing.assert_allclose(res.H, literal, atol=1e-10)
    np.testing.assert_allclose(cr.h_matrix_ou(p), literal, atol=1e-12)


def test_ou_coefficient_matrix_rows():
    p = 0.62
    q = np.sqrt(1 - p * p)
    a = np.sqrt(32)
    m = cr.coefficient_matrix_ou(p)
    np.testing.assert_allclose(m[3], a / 2 * np.array([q * q, -q * q, 0, 0, 0]))
    np.testing.assert_allclose(m[0], a / 2 * np.array([(p + 1) ** 2, -p * p, -p, -p, -1]))


def test_ou_coefficients_reconstruct_channel_over_p_grid():
    refs = np.stack(cr.ou_reference_set())
    cols = refs.reshape(5, -1).T
    null = np.array([-2, 1, 1, 1, 1])
    for i in range(100):
        p = rng_for(5, i).uniform()
        m = cr.coefficient_matrix_ou(p)
        f = cr.ou_channel(p)
        for j in range(4):
            recon = np.einsum("k,kab->ab", m[j], refs)
            assert np.abs(recon - f[j]).max() < 1e-10
            # any other solution differs by a multiple of the null vector
            lsq = np.linalg.lstsq(cols, f[j].reshape(-1), rcond=None)[0]
            diff = m[j] - lsq
            t = np.vdot(null, diff) / 8
            assert np.abs(diff - t * null).max() < 1e-10


def test_five_reference_operators_are_rank_deficient():
    with pytest.raises(RankDeficientBasis):
        cr.convert(cr.ou_channel(0.3), cr.ou_reference_set())


def test_ou_conversion_is_same_channel():
    worst = 0.0
    for i in range(1000):
        g = rng_for(17, i)
        p = g.uniform()
        rho = random_density(4, g)
        res = cr.ou_converted(p)
        d = apply(cr.ou_channel(p), rho) - apply(res.F_tilde, rho)
        worst = max(worst, 4 / 3 * np.trace(d @ d).real)
    assert worst < 1e-10


def test_ou_conversion_over_full_hs_basis():
    for p in (0.2, 0.6, 0.95):
        res = cr.convert(cr.ou_channel(p), hs_basis(4).as_kraus())
        assert completeness_defect(res.F_tilde) < 1e-9
        assert process_distance(cr.ou_channel(p), res.F_tilde) < 1e-9


def test_ou_channel_values():
    one = cr.ou_channel(1.0)
    np.testing.assert_allclose(one[0], np.eye(4))
    for op in one.operators[1:]:
        np.testing.assert_allclose(op, 0)
    zero = cr.ou_channel(0.0)
    for op, diag in zip(zero, ([0, 0, 0, 1], [0, 0, 1, 0], [0, 1, 0, 0], [1, 0, 0, 0])):
        np.testing.assert_allclose(op, np.diag(diag))
    assert completeness_defect(cr.ou_channel(0.41)) < 1e-12
    rho = random_density(4, 3)
    out = apply(cr.ou_channel(0.5), rho)
    assert out[0, 3] == pytest.approx(0.25 * rho[0, 3], abs=1e-15)
    with pytest.raises(ParameterOutOfRange):
        cr.ou_channel(1.5)


def test_gamma_examples(rng):
    lam = np.array([3.0, 2.0, 0.5])
    np.testing.assert_allclose(cr.gamma_matrix(lam, np.eye(3), np.eye(3)), np.diag(lam))
    u = random_unitary(rng, 3)
    a = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
    a = a + a.conj().T
    g = cr.gamma_matrix(np.ones(3), u, a)
    np.testing.assert_allclose(g, u.conj().T @ a @ u, atol=1e-12)
    with pytest.raises(ParameterOutOfRange):
        cr.gamma_matrix(np.array([1.0, -1.0]), np.eye(2), np.eye(2))


def test_gamma_for_ou_on_rank_one_code():
    p = elementary(1, 1, 4)
    res = cr.ou_converted(0.3)
    alpha = cr.build_alpha(cr.ou_reference_set(), p)
    kept = res.kept
    gamma = cr.gamma_matrix(res.eigenvalues[kept], res.eigenvectors[:, kept], alpha)
    assert np.abs(gamma - gamma.conj().T).max() < 1e-12
    ft = res.F_tilde.operators
    worst = max(
        np.linalg.norm(p @ ft[j].conj().T @ ft[k] @ p - gamma[j, k] * p)
        for j in range(len(ft))
        for k in range(len(ft))
    )
    assert worst < 1e-10


def test_convert_rejects_out_of_span_operator():
    code = bitflip_code()
    z = KrausSet([embed(PAULI_Z, 1, 3)])
    with pytest.raises(ExpansionResidual):
        cr.convert(z, code.correctable)


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), n=st.integers(2, 4), count=st.integers(1, 6))
def test_convert_random_channels(seed, n, count):
    rng = np.random.default_rng(seed)
    f = random_kraus(rng, n, count)
    res = cr.convert(f, hs_basis(n).as_kraus())
    h = res.H
    assert np.abs(h - h.conj().T).max() < 1e-9 * max(1, np.linalg.norm(h))
    assert np.linalg.eigvalsh(h)[0] >= -1e-9 * np.linalg.norm(h)
    assert completeness_defect(res.F_tilde) < 1e-9
    assert process_distance(f, res.F_tilde) < 1e-9
    again = cr.convert(res.F_tilde, hs_basis(n).as_kraus())
    assert process_distance(f, again.F_tilde) < 1e-9
