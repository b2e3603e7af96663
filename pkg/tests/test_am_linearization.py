import numpy as np
import pytest
from numpy.testing import assert_allclose

from functions.am_linearization import am_closed_form_2x2, am_map, psi_chain, psi_factor
from functions.errors import DomainError
from functions.gt_coordinates import gt_spectra


def test_diagonal_input():
    A = np.diag([0.5, -1.0, 2.0])
    assert_allclose(am_map(A), np.diag(np.exp([0.5, -1.0, 2.0])), atol=1e-12)


@pytest.mark.parametrize("A", [
    [[0.3, 1.0], [1.0, -0.4]],
    [[1.2, 0.5 - 0.8j], [0.5 + 0.8j, 0.1]],
])
def test_rank_two_closed_form(A):
    A = np.array(A, dtype=complex)
    assert_allclose(am_map(A), am_closed_form_2x2(A), atol=1e-10)


def test_real_input_gives_real_image(rng):
    for _ in range(5):
        X = rng.standard_normal((4, 4))
        image = am_map((X + X.T) / 2)
        assert np.max(np.abs(image.imag)) <= 1e-10


def test_psi_factors_unitary(gue):
    A = gue(4)
    chain = psi_chain(A)
    for factor in chain.factors:
        assert_allclose(factor @ factor.conj().T, np.eye(4), atol=1e-8)
    assert_allclose(chain.product @ chain.product.conj().T, np.eye(4), atol=1e-8)


@pytest.mark.parametrize("n", [2, 3, 4, 5])
def test_am_intertwines_gt_maps(gue, n):
    A = gue(n)
    image = am_map(A)
    assert np.all(np.linalg.eigvalsh(image) > 0)
    for lam, mu in zip(gt_spectra(A).levels, gt_spectra(image).levels):
        assert_allclose(mu, np.exp(lam), rtol=1e-7)


def test_psi_factor_range(flip):
    assert_allclose(psi_factor(flip, 1), np.eye(2))
    with pytest.raises(DomainError):
        psi_factor(flip, 3)
