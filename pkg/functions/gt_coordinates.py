import logging
from dataclasses import dataclass, field
from typing import List, Optional, Sequence

import numpy as np

from config import GAP_TOL_REL
from functions.errors import DomainError, NonGenericError
from functions.linalg_core import as_hermitian

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class GTSpectra:
    """levels[k-1] holds the ascending eigenvalues of the top-left k x k block"""
    levels: List[np.ndarray]

    @property
    def n(self) -> int:
        return len(self.levels)

    def level(self, k: int) -> np.ndarray:
        return self.levels[k - 1]


@dataclass(frozen=True, eq=False)
class StageData:
    """
    One step of diagonalization in stages, from level k to level k+1.

    kinds[j] is ('pass', i) when column j of L is the decoupled basis vector e_i,
    or ('mu', i) when it is the i-th eigenvector of the coupled subsystem.
    """
    k: int
    lam: np.ndarray
    mu: np.ndarray
    a: np.ndarray
    d: float
    coupled: np.ndarray
    kinds: list
    L: np.ndarray
    normalizers: np.ndarray

    @property
    def coupled_indices(self) -> np.ndarray:
        return np.flatnonzero(self.coupled)

    def mu_coupled(self) -> np.ndarray:
        return np.array([self.mu[j] for j, kind in enumerate(self.kinds) if kind[0] == 'mu'])


@dataclass(frozen=True, eq=False)
class GTAngles:
    """angles[k-1] = a^(k) for k = 1..n-1; normalizers[k-1] = N^(k) for k = 1..n (N^(1) = 1)"""
    angles: List[np.ndarray]
    normalizers: List[np.ndarray]

    def a(self, k: int) -> np.ndarray:
        return self.angles[k - 1]

    def N(self, k: int) -> np.ndarray:
        return self.normalizers[k - 1]

    def phases(self) -> List[np.ndarray]:
        return [np.angle(a) for a in self.angles]


@dataclass(frozen=True, eq=False)
class DiagChain:
    """P[k-1] is the n x n unitary P_k (acting on the first k coordinates); A[k-1] = P_k^{-1} A P_k"""
    P: List[np.ndarray]
    A: List[np.ndarray]


@dataclass(frozen=True, eq=False)
class GTCoordinates:
    spectra: GTSpectra
    angles: GTAngles
    chain: DiagChain
    stages: List[StageData] = field(default_factory=list)
    tol: float = 0.0

    @property
    def n(self) -> int:
        return self.spectra.n

    def stage(self, k: int) -> StageData:
        """Stage from level k to level k+1"""
        return self.stages[k - 1]


def gap_tolerance(A, gap_tol: Optional[float] = None) -> float:
    if gap_tol is not None:
        return gap_tol
    return GAP_TOL_REL * max(np.linalg.norm(A), 1.0)


def gt_spectra(A) -> GTSpectra:
    H = np.asarray(A, dtype=complex)
    return GTSpectra([np.linalg.eigvalsh(H[:k, :k]) for k in range(1, H.shape[0] + 1)])


def _stage(lam: np.ndarray, a: np.ndarray, d: float, k: int, tol: float) -> StageData:
    """Eigenbasis of [[diag(lam), a], [a^dagger, d]] with the decoupled indices split off"""
    coupled = np.abs(a) > tol
    K = np.flatnonzero(coupled)
    lam_K = lam[K]
    if len(K) > 1 and np.min(np.diff(np.sort(lam_K))) <= tol:
        raise NonGenericError(k, "repeated coupled eigenvalue")

    block = np.zeros((len(K) + 1, len(K) + 1), dtype=complex)
    block[np.arange(len(K)), np.arange(len(K))] = lam_K
    block[:len(K), -1] = a[K]
    block[-1, :len(K)] = np.conj(a[K])
    block[-1, -1] = d
    mu_K = np.linalg.eigvalsh(block)
    if len(K) and np.min(np.abs(mu_K[:, None] - lam_K[None, :])) <= tol:
        raise NonGenericError(k + 1, "interlacing gap below tolerance")

    entries = [(lam[i], 'pass', int(i)) for i in np.flatnonzero(~coupled)]
    entries += [(mu_K[j], 'mu', j) for j in range(len(mu_K))]
    entries.sort(key=lambda e: e[0])

    size = k + 1
    L = np.zeros((size, size), dtype=complex)
    N = np.ones(size)
    for col, (value, kind, idx) in enumerate(entries):
        if kind == 'pass':
            L[idx, col] = 1.0
            continue
        denom = value - lam_K
        N[col] = np.sqrt(1.0 + np.sum(np.abs(a[K]) ** 2 / denom ** 2))
        L[K, col] = a[K] / (N[col] * denom)
        L[k, col] = 1.0 / N[col]
    return StageData(
        k=k,
        lam=lam,
        mu=np.array([e[0] for e in entries], dtype=float),
        a=a,
        d=float(d),
        coupled=coupled,
        kinds=[(e[1], e[2]) for e in entries],
        L=L,
        normalizers=N,
    )


def _embed(M: np.ndarray, n: int) -> np.ndarray:
    out = np.eye(n, dtype=complex)
    out[:M.shape[0], :M.shape[1]] = M
    return out


def diagonalize_in_stages(A, gap_tol: Optional[float] = None) -> GTCoordinates:
    """
    Diagonalize A level by level: P_{k+1} = P_k L^(k+1).

    Args:
        A: Hermitian matrix
        gap_tol: absolute genericity tolerance (defaults to GAP_TOL_REL * ||A||)
    Returns:
        GTCoordinates with the chain, the angles a^(k) and the normalizers N^(k)
    """
    H = as_hermitian(A)
    n = H.shape[0]
    tol = gap_tolerance(H, gap_tol)

    P = np.eye(n, dtype=complex)
    levels = [np.array([H[0, 0].real])]
    angles, normalizers = [], [np.ones(1)]
    Ps, As, stages = [P.copy()], [H.copy()], []
    for k in range(1, n):
        A_k = P.conj().T @ H @ P
        a = A_k[:k, k].copy()
        stage = _stage(levels[-1], a, A_k[k, k].real, k, tol)
        logger.debug(f"stage {k}->{k + 1}: {int(stage.coupled.sum())} coupled indices")
        P = P @ _embed(stage.L, n)
        angles.append(a)
        normalizers.append(stage.normalizers)
        levels.append(stage.mu)
        stages.append(stage)
        Ps.append(P.copy())
        As.append(P.conj().T @ H @ P)
    return GTCoordinates(
        spectra=GTSpectra(levels),
        angles=GTAngles(angles, normalizers),
        chain=DiagChain(Ps, As),
        stages=stages,
        tol=tol,
    )


def m_coeff(A, k: int, i: int, coords: Optional[GTCoordinates] = None) -> complex:
    """m^(k)_i = a^(k)_i / N^(k+1)_i, the level-(k+1) normalizer (1-based k, i)"""
    coords = coords if coords is not None else diagonalize_in_stages(A)
    if not 1 <= k <= coords.n - 1 or not 1 <= i <= k:
        raise DomainError(f"m_coeff index out of range: k={k}, i={i}")
    return complex(coords.angles.a(k)[i - 1] / coords.angles.N(k + 1)[i - 1])


def m_minor(A, k: int, i: int, coords: Optional[GTCoordinates] = None) -> complex:
    """
    sum_j adj(lambda^(k)_i - A_k)_{kj} A_{j,k+1} / prod_{l != i} (lambda^(k)_i - lambda^(k)_l), 1-based k, i.

    Equals (v_i)_k a^(k)_i for the level-k eigenvector v_i, which is a^(k)_i / N^(k)_i when the
    eigenvector is coupled at the previous stage and 0 when it is a decoupled basis vector.
    """
    coords = coords if coords is not None else diagonalize_in_stages(A)
    if not 1 <= k <= coords.n - 1 or not 1 <= i <= k:
        raise DomainError(f"m_minor index out of range: k={k}, i={i}")
    last = 1.0 if k == 1 else coords.stage(k - 1).L[k - 1, i - 1]
    return complex(last * coords.angles.a(k)[i - 1])


def thimm_action(theta: Sequence[Sequence[float]], A) -> np.ndarray:
    """
    Rotate the GT angles: a^(k)_i -> e^{i theta^(k)_i} a^(k)_i, spectra fixed.

    theta[k-1] holds the k phases of level k, k = 1..n-1. Conjugation by
    g_k = P_k diag(e^{i theta^(k)}) P_k^{-1} leaves every level <= k and every
    angle above level k untouched, so levels are applied top-down with the
    original chain.
    """
    H = as_hermitian(A)
    n = H.shape[0]
    if len(theta) != n - 1:
        raise DomainError(f"expected {n - 1} phase vectors, got {len(theta)}")
    coords = diagonalize_in_stages(H)
    B = H.copy()
    for k in range(n - 1, 0, -1):
        phases = np.asarray(theta[k - 1], dtype=float)
        if phases.shape != (k,):
            raise DomainError(f"level {k} needs {k} phases")
        P = coords.chain.P[k - 1]
        t = np.ones(n, dtype=complex)
        t[:k] = np.exp(1j * phases)
        g = (P * t) @ P.conj().T
        B = g @ B @ g.conj().T
    return as_hermitian(B, tol=1e-8)


def reconstruct_from_gt(spectra: GTSpectra, angles: Sequence[np.ndarray], gap_tol: Optional[float] = None) -> np.ndarray:
    """Inverse of diagonalize_in_stages: rebuild A from the GT spectra and the angles a^(k)"""
    n = spectra.n
    scale = max(float(np.max(np.abs(spectra.level(n)))), 1.0)
    tol = gap_tol if gap_tol is not None else GAP_TOL_REL * scale
    P = np.eye(n, dtype=complex)
    H = np.zeros((n, n), dtype=complex)
    H[0, 0] = spectra.level(1)[0]
    for k in range(1, n):
        lam = spectra.level(k)
        a = np.asarray(angles[k - 1], dtype=complex)
        d = float(np.sum(spectra.level(k + 1)) - np.sum(lam))
        block = np.diag(lam).astype(complex)
        block = np.pad(block, ((0, 1), (0, 1)))
        block[:k, k] = a
        block[k, :k] = np.conj(a)
        block[k, k] = d
        Pk = _embed(P[:k, :k], k + 1)
        H[:k + 1, :k + 1] = Pk @ block @ Pk.conj().T
        stage = _stage(lam, a, d, k, tol)
        P = P @ _embed(stage.L, n)
    return as_hermitian(H, tol=1e-8)


def interlacing_gaps(spectra: GTSpectra) -> np.ndarray:
    """Smallest |lambda^(k+1)_j - lambda^(k)_i| for each k = 1..n-1"""
    gaps = []
    for k in range(1, spectra.n):
        diff = spectra.level(k + 1)[:, None] - spectra.level(k)[None, :]
        gaps.append(np.min(np.abs(diff)))
    return np.array(gaps)
