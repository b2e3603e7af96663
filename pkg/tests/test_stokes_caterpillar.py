import numpy as np
import pytest
from numpy.testing import assert_allclose
from scipy.special import gamma

from functions.errors import DomainError
from functions.gt_coordinates import gt_spectra
from functions.linalg_core import StokesPair
from functions.stokes_caterpillar import (
    block_connection_product,
    connection_product,
    monodromy_residual,
    normalized_connection_block,
    regularized_gauge_limit,
    rhb_map,
    stokes_by_columns,
    stokes_finite_u_2x2,
    stokes_full,
    stokes_subdiag_explicit,
    tau_monodromy_residual,
    wall_crossing_tau,
)


def test_flip_connection_entry(flip):
    block = normalized_connection_block(flip, 2)
    assert abs(block[1, 0]) ** 2 == pytest.approx(1 / (1 + np.e), rel=1e-12)
    assert_allclose(block @ block.conj().T, np.eye(2), atol=1e-12)


def test_diagonal_connection_is_identity():
    A = np.diag([0.5, 1.5, 2.0])
    for k in range(1, 4):
        assert_allclose(normalized_connection_block(A, k), np.eye(3))


def test_connection_blocks_unitary(gue):
    for _ in range(100):
        A = gue(4)
        for k in range(2, 5):
            C = normalized_connection_block(A, k)
            assert np.linalg.norm(C @ C.conj().T - np.eye(4)) <= 1e-8


def test_connection_product_order(gue):
    A = gue(3)
    data = connection_product(A)
    assert_allclose(data.product, data.blocks[0] @ data.blocks[1] @ data.blocks[2])
    assert not np.allclose(data.product, data.blocks[2] @ data.blocks[1] @ data.blocks[0])


def test_rhb_examples():
    assert_allclose(rhb_map(np.diag([1.0, 2.0])), np.diag([np.e, np.e ** 2]))
    assert_allclose(rhb_map(np.zeros((3, 3))), np.eye(3))


@pytest.mark.parametrize("n", [3, 4, 5])
def test_rhb_intertwines_gt_maps(gue, n):
    A = gue(n)
    nu = rhb_map(A)
    assert np.all(np.linalg.eigvalsh(nu) > 0)
    for lam, mu in zip(gt_spectra(A).levels, gt_spectra(nu).levels):
        assert_allclose(mu, np.exp(lam), rtol=1e-7)


@pytest.mark.parametrize("n", [3, 4, 5, 6])
def test_monodromy_relation(gue, n):
    for _ in range(5):
        assert monodromy_residual(gue(n)) <= 1e-9


def test_stokes_full_structure(gue):
    A = gue(4)
    S = stokes_full(A)
    assert np.array_equal(S.s_minus, S.s_plus.conj().T)
    assert_allclose(np.abs(np.diag(S.s_plus)) ** 2, np.exp(np.diag(A).real), rtol=1e-8)
    assert_allclose(np.tril(S.s_plus, -1), 0)


def test_stokes_full_diagonal():
    A = np.diag([0.2, 1.0, 3.0])
    assert_allclose(stokes_full(A).s_plus, np.diag(np.exp(np.diag(A) / 2)))


def test_subdiag_matches_gauss_route(gue, flip):
    A = gue(4)
    S = stokes_full(A)
    for k in range(1, 4):
        value, conj = stokes_subdiag_explicit(A, k)
        assert value == pytest.approx(S.s_plus[k - 1, k], abs=1e-8)
        assert conj == np.conj(value)
    assert stokes_subdiag_explicit(flip, 1)[0] == pytest.approx(stokes_full(flip).s_plus[0, 1], abs=1e-10)


def test_subdiag_rank_two_modulus():
    t1, t2, a = 0.4, -0.7, 0.8 - 0.3j
    A = np.array([[t1, a], [np.conj(a), t2]])
    lam = np.linalg.eigvalsh(A)
    expected = np.exp((t1 + t2) / 4) * abs(a) / abs(
        gamma(1 + (lam[0] - t1) / (2j * np.pi)) * gamma(1 + (lam[1] - t1) / (2j * np.pi))
    )
    assert abs(stokes_subdiag_explicit(A, 1)[0]) == pytest.approx(expected, rel=1e-10)
    assert stokes_subdiag_explicit(np.diag([1.0, 2.0]), 1) == (0, 0)


def test_subdiag_matches_column_route(gue):
    for n in (3, 4, 5):
        A = gue(n)
        S = stokes_by_columns(A)
        for k in range(1, n):
            assert stokes_subdiag_explicit(A, k)[0] == pytest.approx(S.s_plus[k - 1, k], abs=1e-8)


def test_subdiag_rank_two_trace_identity(gue):
    for _ in range(10):
        A = gue(2)
        t1, t2 = np.diag(A).real
        lam = np.linalg.eigvalsh(A)
        value = abs(stokes_subdiag_explicit(A, 1)[0]) ** 2
        assert value == pytest.approx(np.exp(lam).sum() - np.exp(t1) - np.exp(t2), rel=1e-9)


def test_subdiag_decoupled_middle_level():
    A = np.array([[0.3, 0.0, 0.5], [0.0, -0.4, 0.7], [0.5, 0.7, 1.1]], dtype=complex)
    assert stokes_subdiag_explicit(A, 1)[0] == 0
    assert stokes_subdiag_explicit(A, 2)[0] == pytest.approx(stokes_full(A).s_plus[1, 2], abs=1e-9)


def test_columns_match_gauss_route(gue):
    A = gue(4)
    S = stokes_by_columns(A)
    assert_allclose(S.s_plus, stokes_full(A).s_plus, atol=1e-8)
    assert_allclose(np.diag(S.s_plus), np.exp(np.diag(A).real / 2))


def test_subdiag_index_range(flip):
    with pytest.raises(DomainError):
        stokes_subdiag_explicit(flip, 2)


def test_finite_u_examples(flip):
    S = stokes_finite_u_2x2(0.0, 1.0, np.diag([1.0, 2.0]))
    assert_allclose(S.s_plus, np.diag(np.exp([0.5, 1.0])))
    with pytest.raises(DomainError):
        stokes_finite_u_2x2(1.0, 1.0, flip)


def test_regularized_limit_converges(gue):
    A = gue(2)
    target = rhb_map(A)
    errors = []
    for ratio in (1e2, 1e4, 1e6):
        S = stokes_finite_u_2x2(1.0, ratio, A)
        errors.append(np.linalg.norm(regularized_gauge_limit((1.0, ratio), S) - target))
    assert errors[0] > errors[1] > errors[2]
    assert errors[2] <= 1e-3


def test_regularized_limit_diagonal():
    S = StokesPair(s_plus=np.diag([1.0, 2.0, 3.0]).astype(complex), s_minus=np.diag([1.0, 2.0, 3.0]).astype(complex))
    assert_allclose(regularized_gauge_limit((1.0, 5.0, 40.0), S), np.diag([1.0, 4.0, 9.0]))
    with pytest.raises(DomainError):
        regularized_gauge_limit((0.0, 1.0, 2.0), S)


def test_tau_one_is_identity(gue):
    S = stokes_full(gue(3))
    assert_allclose(wall_crossing_tau(S, 1).s_plus, S.s_plus, atol=1e-14)


def test_tau_reverses_diagonal():
    S = StokesPair(s_plus=np.diag([1.0, 2.0, 3.0]).astype(complex), s_minus=np.diag([1.0, 2.0, 3.0]).astype(complex))
    assert_allclose(wall_crossing_tau(S, 3).s_plus, np.diag([3.0, 2.0, 1.0]))
    with pytest.raises(DomainError):
        wall_crossing_tau(S, 4)


@pytest.mark.parametrize("i", [1, 2, 3])
def test_tau_monodromy_relation(gue, i):
    for _ in range(3):
        assert tau_monodromy_residual(gue(3), i) <= 1e-8


def test_block_connection_distinct_labels(gue):
    A = gue(4)
    C, w = block_connection_product(A, [1, 2, 3, 4])
    assert_allclose(C @ np.diag(np.exp(w)) @ C.conj().T, rhb_map(A), atol=1e-9)


def test_block_connection_repeated_first_label():
    t, d = 0.3, -0.5
    A = np.array([[t, 0, 0.4 + 0.2j], [0, t, -0.6j], [0.4 - 0.2j, 0.6j, d]])
    C, w = block_connection_product(A, [1, 1, 2])
    nu = C @ np.diag(np.exp(w)) @ C.conj().T
    assert_allclose(C @ C.conj().T, np.eye(3), atol=1e-10)
    assert_allclose(nu[:2, :2], np.exp(t) * np.eye(2), atol=1e-9)
    assert_allclose(np.linalg.eigvalsh(nu), np.exp(np.linalg.eigvalsh(A)), rtol=1e-9)


def test_block_connection_repeated_last_label():
    d = 0.8
    A = np.array([[-0.2, 0.5, 0.3j], [0.5, d, 0], [-0.3j, 0, d]])
    C, w = block_connection_product(A, [1, 2, 2])
    nu = C @ np.diag(np.exp(w)) @ C.conj().T
    assert nu[0, 0] == pytest.approx(np.exp(-0.2), rel=1e-10)
    assert_allclose(np.linalg.eigvalsh(nu), np.exp(np.linalg.eigvalsh(A)), rtol=1e-9)


def test_block_connection_rejects_bad_labels(flip):
    with pytest.raises(DomainError):
        block_connection_product(flip, [2, 1])
    with pytest.raises(DomainError):
        block_connection_product(flip, [1, 1])
    with pytest.raises(DomainError):
        block_connection_product(flip, [1])
