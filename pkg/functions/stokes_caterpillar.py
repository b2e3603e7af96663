import logging
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np
import scipy.linalg

from functions.errors import DomainError, NonGenericError
from functions.gt_coordinates import GTCoordinates, StageData, diagonalize_in_stages, gap_tolerance, m_minor
from functions.linalg_core import (
    TWO_PI_I,
    StokesPair,
    as_hermitian,
    check_unitary,
    cholesky_gauss,
    delta_k,
    log_gamma,
    posdef_sqrt_log,
    unitary_phase_power,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class ConnectionData:
    """blocks[k-1] is the normalized connection block of level k (blocks[0] is the identity)"""
    blocks: List[np.ndarray]
    product: np.ndarray
    eigenvalues: np.ndarray


def _lg(x: float) -> complex:
    """log Gamma(1 + x / 2 pi i)"""
    return log_gamma(1.0 + x / TWO_PI_I)


def _connection_block_from_stage(stage: StageData, n: int) -> np.ndarray:
    k = stage.k + 1
    lam, a = stage.lam, stage.a
    K = stage.coupled_indices
    mu_K = stage.mu_coupled()
    block = np.eye(n, dtype=complex)
    block[:k, :k] = 0.0
    for col, (kind, idx) in enumerate(stage.kinds):
        if kind == 'pass':
            block[idx, col] = 1.0
            continue
        mu_j = mu_K[idx]
        N_j = stage.normalizers[col]
        common = sum(_lg(m - mu_j) for m in mu_K)
        for i in K:
            log_entry = (
                common
                + sum(_lg(lam[v] - lam[i]) for v in K)
                - sum(_lg(lam[v] - mu_j) for v in K if v != i)
                - sum(_lg(mu_K[v] - lam[i]) for v in range(len(mu_K)) if v != idx)
            )
            prefactor = -np.exp((lam[i] - mu_j) / 4.0) * a[i] / (N_j * (lam[i] - mu_j))
            block[i, col] = prefactor * np.exp(log_entry)
        log_last = common - sum(_lg(lam[v] - mu_j) for v in K)
        block[k - 1, col] = np.exp((mu_j - stage.d) / 4.0) / N_j * np.exp(log_last)
    return block


def normalized_connection_block(A, k: int, coords: Optional[GTCoordinates] = None) -> np.ndarray:
    """
    Normalized connection block of level k (levels k-1 -> k), embedded in n x n.

    Decoupled columns are basis vectors; coupled columns follow the Gamma formula
    in the eigenvalues of levels k-1 and k, the angles a^(k-1) and the normalizers N^(k).
    """
    coords = coords if coords is not None else diagonalize_in_stages(A)
    n = coords.n
    if not 1 <= k <= n:
        raise DomainError(f"level {k} out of range 1..{n}")
    if k == 1:
        return np.eye(n, dtype=complex)
    return _connection_block_from_stage(coords.stage(k - 1), n)


def connection_product(A, coords: Optional[GTCoordinates] = None) -> ConnectionData:
    """C(u_cat) as the left-to-right product of the level blocks 1..n"""
    coords = coords if coords is not None else diagonalize_in_stages(A)
    n = coords.n
    blocks = [normalized_connection_block(A, k, coords) for k in range(1, n + 1)]
    product = np.eye(n, dtype=complex)
    for block in blocks:
        product = product @ block
    return ConnectionData(blocks=blocks, product=product, eigenvalues=coords.spectra.level(n))


def rhb_map(A, coords: Optional[GTCoordinates] = None) -> np.ndarray:
    """nu(A) = C e^{Lambda_n} C^dagger with C the unitary connection product"""
    data = connection_product(A, coords)
    C = check_unitary(data.product, "caterpillar connection product")
    return C @ np.diag(np.exp(data.eigenvalues)) @ C.conj().T


def _clusters(values: np.ndarray, tol: float) -> List[np.ndarray]:
    order = np.argsort(values)
    groups = [[order[0]]] if len(order) else []
    for prev, cur in zip(order[:-1], order[1:]):
        if values[cur] - values[prev] <= tol:
            groups[-1].append(cur)
        else:
            groups.append([cur])
    return [np.array(g) for g in groups]


def _joint_right_vectors(blocks: List[np.ndarray], m: int, tol: float, level: int) -> np.ndarray:
    """Unitary V with V^dagger B^dagger B V diagonal for every B in blocks"""
    weight = np.zeros((m, m), dtype=complex)
    for c, B in enumerate(blocks):
        weight += np.sqrt(2.0 + c) * (B.conj().T @ B)
    _, V = np.linalg.eigh(weight)
    for B in blocks:
        G = V.conj().T @ B.conj().T @ B @ V
        off = G - np.diag(np.diag(G))
        if np.linalg.norm(off) > tol * max(1.0, float(np.linalg.norm(G))):
            raise NonGenericError(level, "couplings of a repeated label admit no simultaneous singular basis")
    return V


def block_connection_product(A, labels: Sequence[int], gap_tol: Optional[float] = None) -> Tuple[np.ndarray, np.ndarray]:
    """
    Connection matrix of dF/dz = (u + A/z) F at the caterpillar point when u = diag(labels) may repeat.

    labels must be nondecreasing and A scalar on every run of equal labels. Each run is attached to the
    spectrum of the previous runs at once: a simultaneous singular basis of the couplings splits the
    step into rank-one attachments, each solved by the normalized connection block.
    Returns (C, w) with C unitary and nu = C e^{w} C^dagger.
    """
    H = as_hermitian(A)
    labels = list(labels)
    n = H.shape[0]
    if len(labels) != n:
        raise DomainError(f"{len(labels)} labels for a {n} x {n} matrix")
    if any(b < a for a, b in zip(labels[:-1], labels[1:])):
        raise DomainError(f"labels must be nondecreasing, got {labels}")
    tol = gap_tolerance(H, gap_tol)
    runs, start = [], 0
    for end in range(1, n + 1):
        if end == n or labels[end] != labels[start]:
            runs.append((start, end))
            start = end

    C = np.zeros((0, 0), dtype=complex)
    P = np.zeros((0, 0), dtype=complex)
    w = np.zeros(0)
    for s, e in runs:
        m = e - s
        d = H[s, s].real
        if np.linalg.norm(H[s:e, s:e] - d * np.eye(m)) > tol:
            raise DomainError(f"A is not scalar on the run of label {labels[s]}")
        groups = _clusters(w, tol)
        a = P.conj().T @ H[:s, s:e]
        V = _joint_right_vectors([a[g] for g in groups], m, tol, e) if groups else np.eye(m, dtype=complex)

        U = np.zeros((s, s), dtype=complex)
        position, column = {}, 0
        complements = []
        for c, g in enumerate(groups):
            BV = a[g] @ V
            sigma = np.linalg.norm(BV, axis=0)
            coupled = [j for j in range(m) if sigma[j] > tol]
            vectors = [BV[:, j] / sigma[j] for j in coupled]
            if len(vectors) > len(g):
                raise NonGenericError(e, "more coupled directions than the eigenspace holds")
            basis = np.array(vectors).T if vectors else np.zeros((len(g), 0), dtype=complex)
            rest = scipy.linalg.null_space(basis.conj().T) if vectors else np.eye(len(g), dtype=complex)
            for j, vec in zip(coupled, basis.T):
                U[g, column] = vec
                position[(c, j)] = (column, sigma[j])
                column += 1
            for vec in rest.T:
                U[g, column] = vec
                complements.append((column, float(np.mean(w[g]))))
                column += 1

        size = e
        block_rot = np.zeros((size, size), dtype=complex)
        frame_rot = np.zeros((size, size), dtype=complex)
        w_new = np.zeros(size)
        col = 0
        for row, value in complements:
            block_rot[row, col] = frame_rot[row, col] = 1.0
            w_new[col] = value
            col += 1
        means = [float(np.mean(w[g])) for g in groups]
        for j in range(m):
            attached = [c for c in range(len(groups)) if (c, j) in position]
            rows = [position[(c, j)][0] for c in attached] + [s + j]
            r = len(attached)
            H_j = np.diag([means[c] for c in attached] + [d]).astype(complex)
            H_j[:r, r] = H_j[r, :r] = [position[(c, j)][1] for c in attached]
            coords = diagonalize_in_stages(H_j, tol)
            cols = list(range(col, col + r + 1))
            block_rot[np.ix_(rows, cols)] = normalized_connection_block(H_j, r + 1, coords)
            frame_rot[np.ix_(rows, cols)] = coords.chain.P[r]
            w_new[cols] = coords.spectra.level(r + 1)
            col += r + 1

        R = scipy.linalg.block_diag(U, V)
        C = scipy.linalg.block_diag(C, np.eye(m)) @ R @ block_rot
        P = scipy.linalg.block_diag(P, np.eye(m)) @ R @ frame_rot
        w = w_new
        logger.debug(f"attached run {labels[s]} of size {m} to {len(groups)} eigenvalue clusters")
    return check_unitary(C, "block connection product"), w



def stokes_full(A, coords: Optional[GTCoordinates] = None) -> StokesPair:
    return cholesky_gauss(rhb_map(A, coords))


def relative_stokes_column(A, k: int, coords: Optional[GTCoordinates] = None) -> np.ndarray:
    """
    Relative Stokes column b of the rank-(k+1) subsystem, indexed by the level-k eigenvectors.

    b_j = e^{(lambda_j + A_{k+1,k+1})/4} prod_i Gamma(1+(lambda_i-lambda_j)/2 pi i)
          / prod_i Gamma(1+(mu_i-lambda_j)/2 pi i) * a_j
    """
    coords = coords if coords is not None else diagonalize_in_stages(A)
    stage = coords.stage(k)
    lam, a = stage.lam, stage.a
    K = stage.coupled_indices
    mu_K = stage.mu_coupled()
    b = np.zeros(k, dtype=complex)
    for j in K:
        log_b = sum(_lg(lam[i] - lam[j]) for i in K) - sum(_lg(m - lam[j]) for m in mu_K)
        b[j] = np.exp((lam[j] + stage.d) / 4.0 + log_b) * a[j]
    return b


def stokes_subdiag_explicit(A, k: int, coords: Optional[GTCoordinates] = None) -> Tuple[complex, complex]:
    """
    ((S_+)_{k,k+1}, (S_-)_{k+1,k}) at the caterpillar point, 1-based k.

    (S_+)_{k,k+1} = e^{(A_kk + A_{k+1,k+1})/4} sum_i m_i prod_{l in mu^(k-1)} G(l - lambda_i)
    prod_{v in K^(k)} G(lambda_v - lambda_i) / prod_{l in mu^(k+1)} G(l - lambda_i)
    prod_{v in K^(k-1)} G(lambda^(k-1)_v - lambda_i), with G(x) = Gamma(1 + x / 2 pi i),
    lambda_i the level-k eigenvalues, m_i = m_minor(A, k, i), and only the coupled indices taking part.
    """
    value = complex(np.sum(stokes_subdiag_terms(A, k, coords)))
    return value, complex(np.conj(value))


def stokes_subdiag_terms(A, k: int, coords: Optional[GTCoordinates] = None) -> np.ndarray:
    """Summands of stokes_subdiag_explicit indexed by the level-k eigenvalues (0 where an index takes no part)"""
    H = as_hermitian(A)
    coords = coords if coords is not None else diagonalize_in_stages(H)
    n = coords.n
    if not 1 <= k <= n - 1:
        raise DomainError(f"subdiagonal index {k} out of range 1..{n - 1}")
    stage = coords.stage(k)
    lam, K, mu_next = stage.lam, stage.coupled_indices, stage.mu_coupled()
    below = coords.stage(k - 1) if k > 1 else None
    terms = np.zeros(k, dtype=complex)
    for i in K:
        log_term = sum(_lg(lam[v] - lam[i]) for v in K) - sum(_lg(m - lam[i]) for m in mu_next)
        if below is not None:
            if below.kinds[i][0] == 'pass':
                continue
            log_term += sum(_lg(l - lam[i]) for l in below.mu_coupled())
            log_term -= sum(_lg(below.lam[v] - lam[i]) for v in below.coupled_indices)
        terms[i] = np.exp(log_term) * m_minor(H, k, i + 1, coords)
    return np.exp((H[k - 1, k - 1].real + H[k, k].real) / 4.0) * terms


def stokes_by_columns(A, coords: Optional[GTCoordinates] = None) -> StokesPair:
    """
    S_+ built one column at a time: diagonal e^{A_kk/2}, and above the diagonal of column k+1
    the vector S_{k+} C_k e^{-Lambda_k/2} b^(k), with S_{k+} and C_k the top-left k x k parts of S_+
    and of the product of the normalized blocks 1..k, b^(k) the relative Stokes column.
    """
    H = as_hermitian(A)
    coords = coords if coords is not None else diagonalize_in_stages(H)
    n = coords.n
    s_plus = np.diag(np.exp(np.diag(H).real / 2.0)).astype(complex)
    C = np.eye(n, dtype=complex)
    for k in range(1, n):
        C = C @ normalized_connection_block(H, k, coords)
        lam = coords.spectra.level(k)
        b = relative_stokes_column(H, k, coords)
        s_plus[:k, k] = s_plus[:k, :k] @ C[:k, :k] @ (np.exp(-lam / 2.0) * b)
    return StokesPair(s_plus=s_plus, s_minus=s_plus.conj().T)


def stokes_finite_u_2x2(u1: float, u2: float, A) -> StokesPair:
    """Closed-form Stokes matrices of the rank two system at finite irregular data (u1, u2)"""
    H = as_hermitian(A)
    if H.shape != (2, 2):
        raise DomainError("stokes_finite_u_2x2 needs a 2 x 2 matrix")
    if u1 >= u2:
        raise DomainError(f"need u1 < u2, got ({u1}, {u2})")
    t1, t2 = H[0, 0].real, H[1, 1].real
    a = H[0, 1]
    mu = np.linalg.eigvalsh(H)
    s = np.exp((t1 + t2) / 4.0) * a * np.exp(np.log(u2 - u1) * (t2 - t1) / TWO_PI_I)
    s = s * np.exp(-_lg(mu[0] - t1) - _lg(mu[1] - t1))
    s_plus = np.array([[np.exp(t1 / 2.0), s], [0.0, np.exp(t2 / 2.0)]], dtype=complex)
    return StokesPair(s_plus=s_plus, s_minus=s_plus.conj().T)


def _check_u(u) -> np.ndarray:
    u = np.asarray(u, dtype=float)
    if np.any(u <= 0) or np.any(np.diff(u) <= 0):
        raise DomainError(f"need 0 < u_1 < ... < u_n, got {u.tolist()}")
    return u


def regularized_gauge_limit(u, S: StokesPair) -> np.ndarray:
    """
    G (S_- S_+) G^{-1} with G the increasing product over k = 0..n-1 of
    (u_{k+1}/u_k)^{log(delta_k(S_-) delta_k(S_+)) / 2 pi i}, u_0 = 1.
    """
    u = _check_u(u)
    n = S.n
    if len(u) != n:
        raise DomainError(f"u has {len(u)} entries for a rank {n} pair")
    G = np.eye(n, dtype=complex)
    previous = 1.0
    for k in range(n):
        log_block = posdef_sqrt_log(delta_k(S.s_minus, k) @ delta_k(S.s_plus, k), mode='log')
        G = G @ unitary_phase_power(u[k] / previous, log_block)
        previous = u[k]
    return G @ S.product() @ G.conj().T


def _reversal(i: int) -> np.ndarray:
    return np.eye(i)[::-1]


def wall_crossing_tau(S: StokesPair, i: int) -> StokesPair:
    """
    Stokes data after the planar-embedding change tau_i.

    With K the top-left i x i block and B the top-right block of S_+:
    K -> P K^dagger P, B -> P K^dagger (K K^dagger)^{-1/2} B, bottom-right block fixed.
    """
    n = S.n
    if not 1 <= i <= n:
        raise DomainError(f"tau index {i} out of range 1..{n}")
    K = S.s_plus[:i, :i]
    if np.min(np.abs(np.diag(K))) == 0:
        raise DomainError("singular top-left block")
    B = S.s_plus[:i, i:]
    P = _reversal(i)
    s_plus = S.s_plus.copy()
    s_plus[:i, :i] = P @ K.conj().T @ P
    s_plus[:i, i:] = P @ K.conj().T @ posdef_sqrt_log(K @ K.conj().T, mode='invsqrt') @ B
    return StokesPair(s_plus=s_plus, s_minus=s_plus.conj().T)


def tau_connection(A, i: int, S: Optional[StokesPair] = None, data: Optional[ConnectionData] = None) -> np.ndarray:
    """Connection matrix after tau_i: ((K K^dagger)^{-1/2} K + Id) C"""
    S = S if S is not None else stokes_full(A)
    data = data if data is not None else connection_product(A)
    K = S.s_plus[:i, :i]
    W = np.eye(S.n, dtype=complex)
    W[:i, :i] = posdef_sqrt_log(K @ K.conj().T, mode='invsqrt') @ K
    return W @ data.product


def tau_monodromy_residual(A, i: int) -> float:
    """Relative Frobenius residual of the monodromy relation for the tau_i-transformed data"""
    H = as_hermitian(A)
    coords = diagonalize_in_stages(H)
    data = connection_product(H, coords)
    S = stokes_full(H, coords)
    S_tau = wall_crossing_tau(S, i)
    C_tau = tau_connection(H, i, S, data)
    exp_lambda = np.diag(np.exp(data.eigenvalues))
    P = np.eye(S.n)
    P[:i, :i] = _reversal(i)
    lhs = C_tau @ exp_lambda @ np.linalg.inv(C_tau)
    rhs = P @ S_tau.product() @ P
    return float(np.linalg.norm(lhs - rhs) / np.linalg.norm(exp_lambda))


def monodromy_residual(A) -> float:
    """
    ||C e^{Lambda_n} C^{-1} - S_-^c S_+^c||_F / ||e^{Lambda_n}||_F with S^c = stokes_by_columns(A),
    which is assembled from the relative Stokes columns rather than by factoring the left side.
    """
    H = as_hermitian(A)
    coords = diagonalize_in_stages(H)
    data = connection_product(H, coords)
    S = stokes_by_columns(H, coords)
    exp_lambda = np.diag(np.exp(data.eigenvalues))
    lhs = data.product @ exp_lambda @ np.linalg.inv(data.product)
    return float(np.linalg.norm(lhs - S.product()) / np.linalg.norm(exp_lambda))
