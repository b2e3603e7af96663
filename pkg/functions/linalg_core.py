import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np
import scipy.linalg
import scipy.special

from config import BLOCK_COND_CAP, HERMITIAN_TOL, POLE_TOL, UNITARITY_TOL
from functions.errors import (
    ConsistencyError,
    ConvergenceError,
    DomainError,
    InputError,
    NotPositiveDefiniteError,
    PoleError,
    SingularBlockError,
)

logger = logging.getLogger(__name__)

TWO_PI_I = 2j * np.pi


@dataclass(frozen=True, eq=False)
class SpectralDecomposition:
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def reconstruct(self) -> np.ndarray:
        U = self.eigenvectors
        return (U * self.eigenvalues) @ U.conj().T


@dataclass(frozen=True, eq=False)
class StokesPair:
    """Upper and lower triangular pair with S_minus S_plus equal to the monodromy datum"""
    s_plus: np.ndarray
    s_minus: np.ndarray

    @property
    def n(self) -> int:
        return self.s_plus.shape[0]

    def product(self) -> np.ndarray:
        return self.s_minus @ self.s_plus


@dataclass(frozen=True, eq=False)
class OperatorMatrix:
    """n x n array of dim x dim blocks, stored with shape (n, n, dim, dim)"""
    blocks: np.ndarray

    @property
    def n(self) -> int:
        return self.blocks.shape[0]

    @property
    def dim(self) -> int:
        return self.blocks.shape[2]

    def block(self, i: int, j: int) -> np.ndarray:
        """1-based block accessor"""
        return self.blocks[i - 1, j - 1]

    def to_dense(self) -> np.ndarray:
        n, d = self.n, self.dim
        return self.blocks.transpose(0, 2, 1, 3).reshape(n * d, n * d)

    @classmethod
    def from_dense(cls, M: np.ndarray, n: int) -> "OperatorMatrix":
        d = M.shape[0] // n
        return cls(np.asarray(M, dtype=complex).reshape(n, d, n, d).transpose(0, 2, 1, 3).copy())


def as_hermitian(A, tol: float = HERMITIAN_TOL) -> np.ndarray:
    """Validate a square matrix as Hermitian, symmetrize it and zero the diagonal imaginary parts"""
    M = np.asarray(A, dtype=complex)
    if M.ndim != 2 or M.shape[0] != M.shape[1] or M.shape[0] < 1:
        raise InputError(f"expected a square matrix, got shape {M.shape}")
    if not np.all(np.isfinite(M)):
        raise InputError("matrix has non-finite entries")
    scale = max(np.linalg.norm(M), 1.0)
    if np.linalg.norm(M - M.conj().T) > tol * scale:
        raise InputError("matrix is not Hermitian")
    H = 0.5 * (M + M.conj().T)
    H[np.diag_indices_from(H)] = H.diagonal().real
    return H


def hermitian_eigen(A) -> SpectralDecomposition:
    """
    Ascending eigen-decomposition of a Hermitian matrix.

    Each eigenvector is rotated so its largest-magnitude component is real positive
    (the first such component on ties).
    """
    H = np.asarray(A, dtype=complex)
    try:
        w, U = np.linalg.eigh(H)
    except np.linalg.LinAlgError as e:
        raise ConvergenceError(f"eigen-solver did not converge for matrix of norm {np.linalg.norm(H):.3e}: {e}")
    U = U.copy()
    for j in range(U.shape[1]):
        col = U[:, j]
        idx = int(np.argmax(np.abs(col) - 1e-12 * np.arange(len(col))))
        phase = col[idx] / abs(col[idx])
        U[:, j] = col / phase
    return SpectralDecomposition(w.astype(float), U)


def hermitian_function(X, func) -> np.ndarray:
    decomposition = hermitian_eigen(X)
    U = decomposition.eigenvectors
    return (U * func(decomposition.eigenvalues)) @ U.conj().T


def cholesky_gauss(M) -> StokesPair:
    """Gauss decomposition M = S_minus S_plus with S_minus = S_plus^dagger and positive diagonal"""
    P = np.asarray(M, dtype=complex)
    try:
        lower = np.linalg.cholesky(P)
    except np.linalg.LinAlgError:
        raise NotPositiveDefiniteError(f"matrix of norm {np.linalg.norm(P):.3e} is not positive definite")
    s_plus = lower.conj().T
    return StokesPair(s_plus=s_plus, s_minus=s_plus.conj().T)


def unitary_phase_power(r: float, X) -> np.ndarray:
    """r^{X/(2 pi i)} for Hermitian X; unitary since the exponent is anti-Hermitian"""
    if r <= 0:
        raise DomainError(f"unitary_phase_power needs r > 0, got {r}")
    if r == 1.0:
        return np.eye(np.shape(X)[0], dtype=complex)
    log_r = np.log(r)
    return hermitian_function(X, lambda w: np.exp(w * log_r / TWO_PI_I))


def unitarity_defect(C) -> float:
    C = np.asarray(C, dtype=complex)
    return float(np.linalg.norm(C @ C.conj().T - np.eye(C.shape[0])))


def check_unitary(C, what: str, tol: float = UNITARITY_TOL) -> np.ndarray:
    """Return C unchanged, or raise ConsistencyError when ||C C^dagger - I||_F exceeds tol"""
    defect = unitarity_defect(C)
    if defect > tol:
        raise ConsistencyError(f"{what} is not unitary: defect {defect:.3e}")
    return C


def _check_pole(z: complex):
    nearest = np.round(z.real)
    if nearest <= 0 and abs(z - nearest) < POLE_TOL:
        raise PoleError(z, int(nearest))


def complex_gamma(z) -> complex:
    z = complex(z)
    _check_pole(z)
    return complex(scipy.special.gamma(z))


def log_gamma(z) -> complex:
    """Principal log Gamma; products of Gamma values are formed as exp of sums of these"""
    z = complex(z)
    _check_pole(z)
    return complex(scipy.special.loggamma(z))


def posdef_sqrt_log(P, mode: str = 'sqrt') -> np.ndarray:
    """
    Spectral functions of a positive definite Hermitian matrix.

    Args:
        P: positive definite Hermitian matrix
        mode: 'sqrt', 'invsqrt' or 'log'
    """
    decomposition = hermitian_eigen(P)
    w = decomposition.eigenvalues
    if w.min() <= 0:
        raise DomainError(f"matrix is not positive definite (smallest eigenvalue {w.min():.3e})")
    if mode == 'sqrt':
        f = np.sqrt(w)
    elif mode == 'invsqrt':
        f = 1.0 / np.sqrt(w)
    elif mode == 'log':
        f = np.log(w)
    else:
        raise DomainError(f"unknown mode {mode}")
    U = decomposition.eigenvectors
    return (U * f) @ U.conj().T


def block_gauss(M: OperatorMatrix, cond_cap: float = BLOCK_COND_CAP):
    """
    Block Gauss decomposition M = L U.

    The block LDU factors are split symmetrically: with D_k = sqrt(pivot_k),
    L = L_unit diag(D) and U = diag(D) U_unit, so the diagonal blocks of L and U agree.

    Returns:
        (L, U) as OperatorMatrix instances
    """
    W = np.array(M.blocks, dtype=complex)
    n, d = W.shape[0], W.shape[2]
    L = np.zeros_like(W)
    U = np.zeros_like(W)
    for k in range(n):
        pivot = W[k, k]
        cond = np.linalg.cond(pivot)
        if not np.isfinite(cond) or cond > cond_cap:
            raise SingularBlockError(k + 1, cond)
        pivot_inv = np.linalg.inv(pivot)
        root = scipy.linalg.sqrtm(pivot)
        L[k, k] = root
        U[k, k] = root
        for i in range(k + 1, n):
            L[i, k] = W[i, k] @ pivot_inv @ root
        for j in range(k + 1, n):
            U[k, j] = root @ pivot_inv @ W[k, j]
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                W[i, j] = W[i, j] - W[i, k] @ pivot_inv @ W[k, j]
    logger.debug(f"block_gauss done for {n}x{n} blocks of size {d}")
    return OperatorMatrix(L), OperatorMatrix(U)


def delta_k(M, k: int) -> np.ndarray:
    """Keep the top-left k x k block plus the diagonal; k = 0 is the diagonal part"""
    M = np.asarray(M)
    out = np.diag(np.diag(M)).astype(M.dtype)
    if k > 0:
        out[:k, :k] = M[:k, :k]
    return out


def random_gue(n: int, rng: Optional[np.random.Generator] = None) -> np.ndarray:
    """GUE sample with unit variance off-diagonal entries"""
    rng = rng if rng is not None else np.random.default_rng()
    X = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / np.sqrt(2)
    return as_hermitian((X + X.conj().T) / np.sqrt(2))


def random_real_symmetric(n: int, rng: Optional[np.random.Generator] = None) -> np.ndarray:
    rng = rng if rng is not None else np.random.default_rng()
    X = rng.standard_normal((n, n))
    return as_hermitian((X + X.T) / np.sqrt(2))
