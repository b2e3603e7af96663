import logging
from dataclasses import dataclass, field
from typing import List, Tuple

import numpy as np
from scipy.integrate import solve_ivp
from scipy.linalg import expm

from config import ASYMPTOTIC_TERMS, FROBENIUS_TERMS, ODE_TOL, ORACLE_MATCH_TOL, Z_MIN, Z_OUT
from functions.errors import ConvergenceError, DomainError, IntegrationError
from functions.gt_coordinates import diagonalize_in_stages
from functions.linalg_core import TWO_PI_I, StokesPair, as_hermitian, cholesky_gauss, hermitian_eigen

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Segment:
    """'log' runs z0 (z1/z0)^s along a ray, 'line' runs z0 + s (z1 - z0); s in [0, 1]"""
    kind: str
    z0: complex
    z1: complex

    def point(self, s: float) -> complex:
        if self.kind == 'log':
            return self.z0 * (self.z1 / self.z0) ** s
        return self.z0 + s * (self.z1 - self.z0)

    def velocity(self, s: float) -> complex:
        if self.kind == 'log':
            return self.point(s) * np.log(self.z1 / self.z0)
        return self.z1 - self.z0

    def distance_to_origin(self) -> float:
        if self.kind == 'log':
            return min(abs(self.z0), abs(self.z1))
        d = self.z1 - self.z0
        s = np.clip(-(np.conj(d) * self.z0).real / abs(d) ** 2, 0.0, 1.0) if d != 0 else 0.0
        return abs(self.z0 + s * d)


@dataclass(frozen=True)
class PathSpec:
    segments: List[Segment] = field(default_factory=list)
    tol: float = ODE_TOL
    z_min: float = Z_MIN

    @property
    def start(self) -> complex:
        return self.segments[0].z0

    @property
    def end(self) -> complex:
        return self.segments[-1].z1


def default_path(z_min: float = Z_MIN, z_out: float = Z_OUT, tol: float = ODE_TOL) -> PathSpec:
    """Log-scaled ray from z_min to 1, then a straight line out to z_out"""
    return PathSpec([Segment('log', z_min, 1.0), Segment('line', 1.0, z_out)], tol=tol, z_min=z_min)


def transport(u, A, path: PathSpec) -> np.ndarray:
    """Fundamental solution transport T(end <- start) of dF/dz = (i u - A / (2 pi i z)) F"""
    U = np.diag(np.asarray(u, dtype=float)).astype(complex)
    A = np.asarray(A, dtype=complex)
    n = A.shape[0]
    T = np.eye(n, dtype=complex)
    for segment in path.segments:
        if segment.distance_to_origin() < path.z_min * (1 - 1e-12):
            raise DomainError(f"segment {segment} passes closer than {path.z_min} to the origin")

        def rhs(s, y, segment=segment):
            z = segment.point(s)
            coefficient = 1j * U - A / (TWO_PI_I * z)
            return (coefficient @ y.reshape(n, n) * segment.velocity(s)).ravel()

        sol = solve_ivp(rhs, (0.0, 1.0), np.eye(n, dtype=complex).ravel(), method='DOP853',
                        rtol=path.tol, atol=path.tol)
        if sol.status != 0:
            raise IntegrationError(f"z = {segment.point(sol.t[-1])}", sol.message)
        T = sol.y[:, -1].reshape(n, n) @ T
        logger.debug(f"{segment.kind} segment {segment.z0} -> {segment.z1}: {sol.nfev} evaluations")
    return T


def frobenius_coefficients(u, A, terms: int = FROBENIUS_TERMS) -> List[np.ndarray]:
    """
    H_m of the solution F_0 = (sum H_m z^m) z^{-A / 2 pi i} at the regular singularity,
    from (m + ad_A / 2 pi i) H_m = i u H_{m-1}, solved in the eigenbasis of A.
    """
    decomposition = hermitian_eigen(A)
    V, lam = decomposition.eigenvectors, decomposition.eigenvalues
    u_tilde = V.conj().T @ np.diag(np.asarray(u, dtype=float)) @ V
    shifts = (lam[:, None] - lam[None, :]) / TWO_PI_I
    coefficients = [np.eye(len(lam), dtype=complex)]
    H = coefficients[0]
    for m in range(1, terms + 1):
        H = (1j * u_tilde @ H) / (m + shifts)
        coefficients.append(V @ H @ V.conj().T)
    return coefficients


def asymptotic_coefficients(u, A, terms: int = ASYMPTOTIC_TERMS) -> List[np.ndarray]:
    """
    H_k of the formal solution (sum H_k z^{-k}) e^{i u z} z^{-[A] / 2 pi i} at infinity.

    [i u, H_{k+1}] = (A H_k - H_k [A]) / 2 pi i - k H_k fixes entries with u_a != u_b; the
    remaining entries follow from the next order, which needs the residue to be diagonal
    on every block of equal u.
    """
    u = np.asarray(u, dtype=float)
    A = np.asarray(A, dtype=complex)
    n = len(u)
    same = np.isclose(u[:, None], u[None, :], rtol=0.0, atol=1e-14)
    if np.any(np.abs(A[same & ~np.eye(n, dtype=bool)]) > 1e-12):
        raise DomainError("residue must be diagonal on blocks of equal irregular entries")
    diag = np.diag(A).real
    du = u[:, None] - u[None, :]
    coefficients = [np.eye(n, dtype=complex)]
    for k in range(terms):
        H = coefficients[-1]
        source = (A @ H - H * diag[None, :]) / TWO_PI_I - k * H
        nxt = np.zeros((n, n), dtype=complex)
        nxt[~same] = source[~same] / (1j * du[~same])
        for a_idx in range(n):
            others = ~same[a_idx]
            for b_idx in np.flatnonzero(same[a_idx]):
                rhs = np.sum(A[a_idx, others] * nxt[others, b_idx]) / TWO_PI_I
                nxt[a_idx, b_idx] = rhs / (k + 1 - (diag[a_idx] - diag[b_idx]) / TWO_PI_I)
        coefficients.append(nxt)
    return coefficients


def solution_at_zero(u, A, z: float, terms: int = FROBENIUS_TERMS) -> np.ndarray:
    decomposition = hermitian_eigen(A)
    V = decomposition.eigenvectors
    power = V @ np.diag(np.exp(-decomposition.eigenvalues * np.log(z) / TWO_PI_I)) @ V.conj().T
    H = sum(Hm * z ** m for m, Hm in enumerate(frobenius_coefficients(u, A, terms)))
    return H @ power


def solution_at_infinity(u, A, z: float, terms: int = ASYMPTOTIC_TERMS) -> np.ndarray:
    u = np.asarray(u, dtype=float)
    diag = np.diag(np.asarray(A)).real
    H = sum(Hk * z ** (-k) for k, Hk in enumerate(asymptotic_coefficients(u, A, terms)))
    return H @ np.diag(np.exp(1j * u * z - diag * np.log(z) / TWO_PI_I))


def connection_numeric(u, A, z_min: float = Z_MIN, z_out: float = Z_OUT, tol: float = ODE_TOL,
                       match_tol: float = ORACLE_MATCH_TOL) -> np.ndarray:
    """C with F_0 = F_+ C, matched on the positive real axis at z_min and z_out"""
    H = as_hermitian(A)
    path = default_path(z_min, z_out, tol)
    T = transport(u, H, path)
    C = np.linalg.solve(solution_at_infinity(u, H, z_out), T @ solution_at_zero(u, H, z_min))
    defect = np.linalg.norm(C @ C.conj().T - np.eye(len(C)))
    if defect > match_tol:
        raise ConvergenceError(
            f"connection matrix unitarity defect {defect:.3e}; try a larger z_out or a smaller z_min"
        )
    return C


def stokes_numeric(u, A, **kwargs) -> Tuple[np.ndarray, StokesPair]:
    """Gauss factors of C e^A C^dagger for the numerically computed C (unitary within match_tol)"""
    H = as_hermitian(A)
    C = connection_numeric(u, H, **kwargs)
    return C, cholesky_gauss(C @ expm(H) @ C.conj().T)


def connection_block_numeric(A, k: int, **kwargs) -> np.ndarray:
    """Numeric counterpart of the level-k normalized connection block: C(E_k, delta_k(A_{k-1})) L^(k)"""
    coords = diagonalize_in_stages(A)
    n = coords.n
    if not 2 <= k <= n:
        raise DomainError(f"level {k} out of range 2..{n}")
    stage = coords.stage(k - 1)
    B = np.diag(stage.lam).astype(complex)
    B = np.pad(B, ((0, 1), (0, 1)))
    B[:k - 1, k - 1] = stage.a
    B[k - 1, :k - 1] = np.conj(stage.a)
    B[k - 1, k - 1] = stage.d
    u = np.zeros(k)
    u[-1] = 1.0
    block = np.eye(n, dtype=complex)
    block[:k, :k] = connection_numeric(u, B, **kwargs) @ stage.L
    return block


def abel_determinant(u, A, z0: complex, z1: complex) -> complex:
    """det of the transport from z0 to z1 along a path not winding around 0"""
    return complex(np.exp(1j * np.sum(u) * (z1 - z0) - np.trace(A) / TWO_PI_I * np.log(z1 / z0)))
