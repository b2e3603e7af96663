import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.integrate import solve_ivp

from config import DRIFT_FACTOR, FLOW_TOL, GAP_TOL_REL
from functions.errors import DomainError, IntegrationError
from functions.gt_coordinates import diagonalize_in_stages
from functions.linalg_core import TWO_PI_I, as_hermitian, delta_k, unitary_phase_power
from functions.stokes_caterpillar import stokes_subdiag_terms

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class FlowState:
    u: np.ndarray
    phi: np.ndarray

    @property
    def n(self) -> int:
        return len(self.u)


def _check_positive_increasing(u) -> np.ndarray:
    u = np.asarray(u, dtype=float)
    if np.any(u <= 0) or np.any(np.diff(u) <= 0):
        raise DomainError(f"need 0 < u_1 < ... < u_n, got {u.tolist()}")
    return u


def iso_rhs(u, phi, k: int, gap_tol: Optional[float] = None) -> np.ndarray:
    """
    d Phi / d u_k = [Phi, M] / 2 pi i with M_ij = [E_k, Phi]_ij / (u_i - u_j), M_ii = 0.
    """
    u = np.asarray(u, dtype=float)
    n = len(u)
    diff = u[:, None] - u[None, :]
    off = ~np.eye(n, dtype=bool)
    tol = gap_tol if gap_tol is not None else GAP_TOL_REL * max(np.max(np.abs(u)), 1.0)
    if n > 1 and np.min(np.abs(diff[off])) <= tol:
        raise DomainError(f"u has colliding entries: {u.tolist()}")
    X = np.zeros((n, n), dtype=complex)
    X[k - 1, :] = phi[k - 1, :]
    X[:, k - 1] -= phi[:, k - 1]
    M = np.zeros((n, n), dtype=complex)
    M[off] = X[off] / diff[off]
    return (phi @ M - M @ phi) / TWO_PI_I


def _invariants(phi: np.ndarray):
    return np.linalg.eigvalsh(0.5 * (phi + phi.conj().T)), float(np.real(np.trace(phi.conj().T @ phi)))


def integrate_ray(state: FlowState, k: int, u_k_target: float, tol: float = FLOW_TOL) -> FlowState:
    """
    Move u_k to u_k_target with the other coordinates fixed.

    Uses an adaptive embedded Runge-Kutta pair (DOP853) on the complex entries of Phi;
    every accepted step is checked for drift of the spectrum, of Tr(Phi^dagger Phi) and of
    Hermiticity against DRIFT_FACTOR * tol.
    """
    u = np.array(state.u, dtype=float)
    n = len(u)
    lower = u[k - 2] if k > 1 else -np.inf
    upper = u[k] if k < n else np.inf
    if not lower < u_k_target < upper:
        raise DomainError(f"target u_{k} = {u_k_target} leaves the ordered chamber ({lower}, {upper})")
    if u_k_target == u[k - 1]:
        return state

    phi0 = np.array(state.phi, dtype=complex)
    scale = max(np.linalg.norm(phi0), 1.0)

    def rhs(t, y):
        point = u.copy()
        point[k - 1] = t
        return iso_rhs(point, y.reshape(n, n), k).ravel()

    logger.debug(f"integrating u_{k}: {u[k - 1]:.6g} -> {u_k_target:.6g}")
    sol = solve_ivp(rhs, (u[k - 1], u_k_target), phi0.ravel(), method='DOP853',
                    rtol=tol, atol=tol * scale)
    if sol.status != 0:
        raise IntegrationError(f"u_{k} = {sol.t[-1]:.6g}", sol.message)

    spectrum0, norm0 = _invariants(phi0)
    limit = DRIFT_FACTOR * tol * scale
    for t, y in zip(sol.t, sol.y.T):
        phi = y.reshape(n, n)
        spectrum, norm = _invariants(phi)
        drift = max(np.max(np.abs(spectrum - spectrum0)), abs(norm - norm0) / scale,
                    np.linalg.norm(phi - phi.conj().T))
        if drift > limit:
            raise IntegrationError(f"u_{k} = {t:.6g}", f"conserved-quantity drift {drift:.3e}")

    u[k - 1] = u_k_target
    phi = sol.y[:, -1].reshape(n, n)
    return FlowState(u=u, phi=0.5 * (phi + phi.conj().T))


def _gauge_factor(u: np.ndarray, k: int, B: np.ndarray) -> np.ndarray:
    """(u_k / u_{k+1})^{delta_k(B) / 2 pi i} with u_0 = 1 (0-based k runs 0..n-1)"""
    previous = u[k - 1] if k > 0 else 1.0
    return unitary_phase_power(previous / u[k], delta_k(B, k))


def caterpillar_gauge(u, B) -> np.ndarray:
    """
    Ordered product g(u; B) = F_0 F_1 ... F_{n-1}, F_k = (u_k/u_{k+1})^{delta_k / 2 pi i}, u_0 = 1.

    F_{n-1} is built from delta_{n-1}(B); each following F_k is built from delta_k of B
    after conjugation by the factors to its right, so that g B g^{-1} peels the scales
    from the largest down. For n = 2 all factors are diagonal and this is the plain product.
    """
    u = _check_positive_increasing(u)
    B = np.asarray(B, dtype=complex)
    n = len(u)
    g = np.eye(n, dtype=complex)
    X = B.copy()
    for k in range(n - 1, -1, -1):
        F = _gauge_factor(u, k, X)
        X = F @ X @ F.conj().T
        g = F @ g
    return g


def extract_asymptotics(state: FlowState) -> np.ndarray:
    """g(u; Phi) Phi g(u; Phi)^{-1}, which tends to A along the caterpillar limit"""
    g = caterpillar_gauge(state.u, state.phi)
    return g @ state.phi @ g.conj().T


def seed_from_asymptotics(u, A) -> np.ndarray:
    """Exact inverse of extract_asymptotics: Phi with g(u; Phi) Phi g(u; Phi)^{-1} = A"""
    u = _check_positive_increasing(u)
    Y = as_hermitian(A)
    for k in range(len(u)):
        F = _gauge_factor(u, k, Y)
        Y = F.conj().T @ Y @ F
    return Y


def far_point(u_target, ratio: float) -> np.ndarray:
    u_target = _check_positive_increasing(u_target)
    return u_target[0] * ratio ** np.arange(len(u_target))


def solve_with_asymptotics(A, u_target, u_far_ratio: float, tol: float = FLOW_TOL) -> FlowState:
    """
    Approximate Phi(u_target; A): seed at a far caterpillar point, then integrate u_2..u_n
    down to their targets. The seeding error is O(ln(r) / r), r = u_far_ratio.
    """
    if u_far_ratio <= 1:
        raise DomainError(f"u_far_ratio must exceed 1, got {u_far_ratio}")
    u_target = _check_positive_increasing(u_target)
    u_far = far_point(u_target, u_far_ratio)
    if np.any(u_far[1:] <= u_target[1:]):
        raise DomainError("u_far_ratio too small for the requested target")
    state = FlowState(u=u_far, phi=seed_from_asymptotics(u_far, A))
    for k in range(2, len(u_target) + 1):
        state = integrate_ray(state, k, u_target[k - 1], tol)
    return state


def extraction_error(A, u_target, ratio: float, reference_ratio: float = 1e8, tol: float = FLOW_TOL) -> float:
    """
    ||extract(Phi(u_far)) - A|| where Phi is obtained at u_target from a reference seed
    and carried back out to the far point of the given ratio.
    """
    H = as_hermitian(A)
    state = solve_with_asymptotics(H, u_target, reference_ratio, tol)
    u_far = far_point(u_target, ratio)
    for k in range(len(u_far), 1, -1):
        state = integrate_ray(state, k, u_far[k - 1], tol)
    return float(np.linalg.norm(extract_asymptotics(state) - H))


def leading_term_subdiag(u, A, k: int) -> complex:
    """
    (S_+)_{k,k+1}(u) to leading order near the caterpillar point: every summand i of the caterpillar
    formula picks up u_k^{-A_kk / 2 pi i} (u_k / u_{k+1})^{lambda^(k)_i / 2 pi i}.
    """
    u = _check_positive_increasing(u)
    H = as_hermitian(A)
    if len(u) != H.shape[0]:
        raise DomainError(f"u has {len(u)} entries for a rank {H.shape[0]} system")
    coords = diagonalize_in_stages(H)
    terms = stokes_subdiag_terms(H, k, coords)
    lam = coords.spectra.level(k)
    phases = np.exp((-H[k - 1, k - 1].real * np.log(u[k - 1]) + lam * np.log(u[k - 1] / u[k])) / TWO_PI_I)
    return complex(np.sum(terms * phases))
