import numpy as np
import pytest
from numpy.testing import assert_allclose

from functions.errors import DomainError
from functions.linalg_core import delta_k, unitary_phase_power
from functions.isomonodromy_flow import (
    FlowState,
    caterpillar_gauge,
    extract_asymptotics,
    integrate_ray,
    iso_rhs,
    leading_term_subdiag,
    seed_from_asymptotics,
    solve_with_asymptotics,
)
from functions.stokes_caterpillar import stokes_finite_u_2x2, stokes_subdiag_explicit, stokes_subdiag_terms


def test_iso_rhs_hand_example():
    phi = np.array([[0, 1], [1, 1]], dtype=complex)
    expected = np.array([[0, -1], [1, 0]]) / (2j * np.pi)
    assert_allclose(iso_rhs([0.0, 1.0], phi, 2), expected)


def test_iso_rhs_vanishes_on_diagonal():
    assert_allclose(iso_rhs([1.0, 2.0, 3.0], np.diag([1.0, 5.0, 2.0]), 2), 0)


def test_iso_rhs_hermitian(gue):
    phi = gue(4)
    for k in range(1, 5):
        rhs = iso_rhs([1.0, 2.0, 4.0, 8.0], phi, k)
        assert_allclose(rhs, rhs.conj().T, atol=1e-12)


def test_iso_rhs_collision(flip):
    with pytest.raises(DomainError):
        iso_rhs([1.0, 1.0], flip, 2)


def test_gauge_unitary(gue):
    g = caterpillar_gauge([1.0, 10.0, 100.0, 1000.0], gue(4))
    assert_allclose(g @ g.conj().T, np.eye(4), atol=1e-12)


def test_gauge_rank_two_is_diagonal():
    B = np.array([[0.7, 0.2 + 0.1j], [0.2 - 0.1j, -0.3]])
    expected = np.diag(np.exp(-np.array([0.7, -0.3]) * np.log(50.0) / (2j * np.pi)))
    assert_allclose(caterpillar_gauge([2.0, 50.0], B), expected, atol=1e-14)


def test_seed_extract_round_trip(gue):
    A = gue(3)
    u = [1.0, 1e3, 1e6]
    state = FlowState(u=np.array(u), phi=seed_from_asymptotics(u, A))
    assert_allclose(extract_asymptotics(state), A, atol=1e-10)


def test_nested_gauge_needed_beyond_rank_two(gue):
    A = gue(3)
    u = np.array([1.0, 1e3, 1e6])
    phi = seed_from_asymptotics(u, A)
    plain = np.eye(3, dtype=complex)
    previous = 1.0
    for k in range(3):
        plain = plain @ unitary_phase_power(previous / u[k], delta_k(phi, k))
        previous = u[k]
    nested = caterpillar_gauge(u, phi)
    assert np.linalg.norm(nested @ phi @ nested.conj().T - A) <= 1e-10
    assert np.linalg.norm(plain @ phi @ plain.conj().T - A) >= 1e-2


def test_integrate_ray_diagonal_is_constant():
    state = FlowState(u=np.array([1.0, 2.0, 3.0]), phi=np.diag([1.0, 2.0, 3.0]).astype(complex))
    moved = integrate_ray(state, 3, 10.0)
    assert_allclose(moved.phi, state.phi, atol=1e-12)
    assert moved.u[2] == 10.0


def test_integrate_ray_chamber(gue):
    state = FlowState(u=np.array([1.0, 2.0, 3.0]), phi=gue(3))
    with pytest.raises(DomainError):
        integrate_ray(state, 2, 5.0)


@pytest.mark.slow
def test_flow_conserves_spectrum(gue):
    A = gue(3)
    state = solve_with_asymptotics(A, [1.0, 2.0, 3.0], 1e4)
    assert_allclose(np.linalg.eigvalsh(state.phi), np.linalg.eigvalsh(A), atol=1e-7)
    assert_allclose(state.phi, state.phi.conj().T)


def test_leading_term_diagonal():
    assert leading_term_subdiag([1.0, 2.0], np.diag([1.0, 2.0]), 1) == 0


def test_leading_term_rank_two(gue):
    A = gue(2)
    reference = abs(stokes_subdiag_explicit(A, 1)[0])
    for u in ([1.0, 2.0], [1.0, 1e3], [0.5, 40.0]):
        assert abs(leading_term_subdiag(u, A, 1)) == pytest.approx(reference, rel=1e-10)


def test_leading_term_approaches_finite_u(gue):
    A = gue(2)
    u = [1.0, 1e6]
    exact = stokes_finite_u_2x2(u[0], u[1], A).s_plus[0, 1]
    assert abs(leading_term_subdiag(u, A, 1)) == pytest.approx(abs(exact), rel=1e-3)


def test_leading_term_first_row_modulus(gue):
    A = gue(3)
    reference = abs(stokes_subdiag_explicit(A, 1)[0])
    for u in ([1.0, 2.0, 3.0], [0.2, 50.0, 60.0], [1.0, 1e3, 1e6]):
        assert abs(leading_term_subdiag(u, A, 1)) == pytest.approx(reference, rel=1e-10)


def test_leading_term_log_periodic_in_last_coordinate():
    A = np.array([[0.0, 1.0, 0.3], [1.0, 0.0, 0.5j], [0.3, -0.5j, 0.7]])
    period = 4 * np.pi ** 2 / 2.0
    base = leading_term_subdiag([1.0, 2.0, 3.0], A, 2)
    shifted = leading_term_subdiag([1.0, 2.0, 3.0 * np.exp(period)], A, 2)
    assert abs(shifted) == pytest.approx(abs(base), rel=1e-9)
    assert abs(base) <= np.sum(np.abs(stokes_subdiag_terms(A, 2))) + 1e-12


def test_leading_term_shape_check(flip):
    with pytest.raises(DomainError):
        leading_term_subdiag([1.0, 2.0, 3.0], flip, 1)
