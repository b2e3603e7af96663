import numpy as np
import pytest
from numpy.testing import assert_allclose

from functions.errors import DomainError, NonGenericError
from functions.gt_coordinates import (
    diagonalize_in_stages,
    gt_spectra,
    interlacing_gaps,
    m_coeff,
    m_minor,
    reconstruct_from_gt,
    thimm_action,
)


def test_spectra_examples(flip):
    spectra = gt_spectra(np.diag([1.0, 2.0]))
    assert_allclose(spectra.level(1), [1.0])
    assert_allclose(spectra.level(2), [1.0, 2.0])
    spectra = gt_spectra(flip)
    assert_allclose(spectra.level(1), [0.0])
    assert_allclose(spectra.level(2), [-1.0, 1.0], atol=1e-14)


def test_interlacing(gue):
    for _ in range(100):
        spectra = gt_spectra(gue(5))
        for k in range(1, 5):
            upper, lower = spectra.level(k + 1), spectra.level(k)
            assert np.all(upper[:-1] <= lower + 1e-12)
            assert np.all(lower <= upper[1:] + 1e-12)
        assert np.all(interlacing_gaps(spectra) >= 0)


def test_flip_coordinates(flip):
    coords = diagonalize_in_stages(flip)
    assert_allclose(coords.spectra.level(2), [-1.0, 1.0], atol=1e-14)
    assert_allclose(coords.angles.N(2), [np.sqrt(2), np.sqrt(2)])
    assert_allclose(coords.angles.a(1), [1.0])
    assert m_coeff(flip, 1, 1) == pytest.approx(1 / np.sqrt(2))


def test_diagonal_input_is_trivial():
    coords = diagonalize_in_stages(np.diag([1.0, 2.0, 3.0]))
    for P in coords.chain.P:
        assert_allclose(P, np.eye(3))
    for k in range(1, 3):
        assert_allclose(coords.angles.a(k), 0)
        assert m_coeff(np.diag([1.0, 2.0, 3.0]), k, 1) == 0


def test_m_minor_cofactor_formula(gue):
    for _ in range(5):
        A = gue(3)
        assert m_minor(A, 1, 1) == pytest.approx(A[0, 1], abs=1e-12)
        lam = gt_spectra(A).level(2)
        for i in (1, 2):
            x, other = lam[i - 1], lam[2 - i]
            expected = (A[1, 0] * A[0, 2] + (x - A[0, 0]) * A[1, 2]) / (x - other)
            assert m_minor(A, 2, i) == pytest.approx(expected, abs=1e-10)
    with pytest.raises(DomainError):
        m_minor(gue(3), 3, 1)


def test_chain_diagonalizes(gue):
    for _ in range(10):
        A = gue(4)
        coords = diagonalize_in_stages(A)
        P = coords.chain.P[-1]
        assert_allclose(P.conj().T @ P, np.eye(4), atol=1e-10)
        assert np.linalg.norm(P.conj().T @ A @ P - np.diag(coords.spectra.level(4))) <= 1e-9
        for k in range(1, 5):
            row = coords.chain.P[k - 1][k - 1, :k]
            assert np.all(row.real > 0)
            assert_allclose(row.imag, 0, atol=1e-12)


def test_angle_modulus_identity(gue):
    A = gue(4)
    coords = diagonalize_in_stages(A)
    for k in range(1, 4):
        lam, mu = coords.spectra.level(k), coords.spectra.level(k + 1)
        for i in range(k):
            others = np.delete(lam, i)
            expected = -np.prod(lam[i] - mu) / np.prod(lam[i] - others)
            assert abs(coords.angles.a(k)[i]) ** 2 == pytest.approx(expected, rel=1e-8)


def test_reconstruct_from_gt(gue):
    A = gue(4)
    coords = diagonalize_in_stages(A)
    rebuilt = reconstruct_from_gt(coords.spectra, coords.angles.angles)
    assert np.linalg.norm(rebuilt - A) <= 1e-8 * np.linalg.norm(A)


def test_non_generic_collision():
    A = np.array([[1, 0, 1], [0, 1, 1], [1, 1, 0]], dtype=complex)
    with pytest.raises(NonGenericError):
        diagonalize_in_stages(A)


def test_thimm_identity_and_flip(flip):
    A = np.array([[0.3, 1 + 0.5j], [1 - 0.5j, -0.2]])
    assert_allclose(thimm_action([[0.0]], A), A, atol=1e-12)
    rotated = thimm_action([[np.pi]], A)
    assert_allclose(diagonalize_in_stages(rotated).angles.a(1), -diagonalize_in_stages(A).angles.a(1), atol=1e-12)
    assert_allclose(gt_spectra(rotated).level(2), gt_spectra(A).level(2), atol=1e-12)


def test_thimm_preserves_spectra(gue, rng):
    A = gue(3)
    rotated = thimm_action([rng.uniform(0, 2 * np.pi, 1), rng.uniform(0, 2 * np.pi, 2)], A)
    for lam, mu in zip(gt_spectra(A).levels, gt_spectra(rotated).levels):
        assert_allclose(lam, mu, atol=1e-9)


def test_thimm_wrong_shape(flip):
    with pytest.raises(DomainError):
        thimm_action([], flip)
