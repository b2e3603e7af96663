import logging
from dataclasses import dataclass, field
from itertools import permutations
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from config import DIM_CAP
from functions.errors import DimensionCapError, DomainError, InputError
from functions.gt_crystals import (
    GTPattern,
    PatternCrystal,
    TensorCrystal,
    check_dominant,
    enumerate_patterns,
    raise_pattern,
    stats,
    string_sums,
    weyl_dimension,
)
from functions.linalg_core import TWO_PI_I, OperatorMatrix, block_gauss, check_unitary, log_gamma
from functions.stokes_caterpillar import block_connection_product

logger = logging.getLogger(__name__)


def _l(P: GTPattern, k: int, i: int) -> int:
    return P.entry(k, i) - i + 1


def zeta_value(P: GTPattern, k: int, i: int) -> float:
    """Eigenvalue of zeta^(k)_i on the basis vector of P"""
    return P.entry(k, i) - i + 1 + (k - 1) / 2.0


def ashift_coefficient(P: GTPattern, k: int, i: int) -> float:
    """
    <xi_{P + delta^(k)_i}, alpha^(k)_i xi_P> in the orthonormal GT basis, 0 when P + delta is not a pattern.

    sqrt(-prod_l (zeta^(k)_i - zeta^(k+1)_l + 1/2) prod_l (zeta^(k)_i - zeta^(k-1)_l + 1/2)
         / prod_{l != i} (zeta^(k)_i - zeta^(k)_l)(zeta^(k)_i - zeta^(k)_l + 1))
    """
    if not P.shifted(k, i, 1).is_valid():
        return 0.0
    li = _l(P, k, i)
    numerator = -np.prod([li - _l(P, k + 1, j) for j in range(1, k + 2)], dtype=float)
    numerator *= np.prod([li - _l(P, k - 1, j) + 1 for j in range(1, k)], dtype=float)
    denominator = np.prod([(li - _l(P, k, j)) * (li - _l(P, k, j) + 1) for j in range(1, k + 1) if j != i],
                          dtype=float)
    return float(np.sqrt(max(numerator / denominator, 0.0)))


@dataclass(frozen=True, eq=False)
class GTBasisRep:
    lam: Tuple[int, ...]
    patterns: List[GTPattern]
    generators: np.ndarray  # (n, n, dim, dim), generators[i-1, j-1] = E_ij

    @property
    def n(self) -> int:
        return len(self.lam)

    @property
    def dim(self) -> int:
        return len(self.patterns)

    def E(self, i: int, j: int) -> np.ndarray:
        return self.generators[i - 1, j - 1]

    def index(self, P: GTPattern) -> int:
        return self.patterns.index(P)

    def basis_vector(self, P: GTPattern) -> np.ndarray:
        v = np.zeros(self.dim, dtype=complex)
        v[self.index(P)] = 1.0
        return v


def build_representation(lam: Sequence[int], dim_cap: int = DIM_CAP) -> GTBasisRep:
    """
    L(lambda) in the orthonormal Gelfand-Tsetlin basis.

    E_kk are diagonal, E_{k,k+1} raise one entry of row k with the coefficients of
    ashift_coefficient (E_{k,k+1} is the sum of the alpha^(k)_i), E_{k+1,k} is the transpose,
    and the remaining generators follow from commutators.
    """
    lam = check_dominant(lam)
    dim = weyl_dimension(lam)
    if dim > dim_cap:
        raise DimensionCapError(dim, dim_cap)
    n = len(lam)
    patterns = enumerate_patterns(lam)
    index = {P: p for p, P in enumerate(patterns)}
    E = np.zeros((n, n, dim, dim), dtype=complex)
    for p, P in enumerate(patterns):
        wt = P.weight()
        for k in range(1, n + 1):
            E[k - 1, k - 1, p, p] = wt[k - 1]
        for k in range(1, n):
            for i in range(1, k + 1):
                c = ashift_coefficient(P, k, i)
                if c != 0.0:
                    E[k - 1, k, index[P.shifted(k, i, 1)], p] = c
    for k in range(1, n):
        E[k, k - 1] = E[k - 1, k].T
    for gap in range(2, n):
        for i in range(1, n - gap + 1):
            j = i + gap
            E[i - 1, j - 1] = E[i - 1, i] @ E[i, j - 1] - E[i, j - 1] @ E[i - 1, i]
            E[j - 1, i - 1] = E[i - 1, j - 1].conj().T
    logger.debug(f"built L{lam}: dim {dim}")
    return GTBasisRep(lam=lam, patterns=patterns, generators=E)


def commutation_residual(rep: GTBasisRep) -> float:
    """max over (i,j,k,l) of ||[E_ij, E_kl] - delta_jk E_il + delta_li E_kj||"""
    n, worst = rep.n, 0.0
    for i in range(1, n + 1):
        for j in range(1, n + 1):
            for k in range(1, n + 1):
                for l in range(1, n + 1):
                    lhs = rep.E(i, j) @ rep.E(k, l) - rep.E(k, l) @ rep.E(i, j)
                    rhs = (j == k) * rep.E(i, l) - (l == i) * rep.E(k, j)
                    worst = max(worst, float(np.linalg.norm(lhs - rhs)))
    return worst


def casimir(rep: GTBasisRep) -> Tuple[np.ndarray, np.ndarray, float]:
    """(sum E_ii, sum E_ij E_ji, expected quadratic eigenvalue sum lambda_i (lambda_i + n + 1 - 2i))"""
    n = rep.n
    first = sum(rep.E(i, i) for i in range(1, n + 1))
    second = sum(rep.E(i, j) @ rep.E(j, i) for i in range(1, n + 1) for j in range(1, n + 1))
    expected = float(sum(l * (l + n + 1 - 2 * i) for i, l in enumerate(rep.lam, start=1)))
    return first, second, expected


def quantum_minor(rep: GTBasisRep, rows: Sequence[int], cols: Sequence[int], zeta: float) -> np.ndarray:
    """
    Delta^{rows}_{cols}(T(zeta)) = sum_sigma sgn(sigma) T_{r_sigma(1) c_1}(zeta) ... T_{r_sigma(m) c_m}(zeta + m - 1)
    with T_ab(w) = w delta_ab - E_ab.
    """
    m = len(rows)
    if len(cols) != m:
        raise InputError("quantum minor needs as many rows as columns")
    identity = np.eye(rep.dim, dtype=complex)
    if m == 0:
        return identity
    total = np.zeros((rep.dim, rep.dim), dtype=complex)
    for perm in permutations(range(m)):
        sign = np.linalg.det(np.eye(m)[list(perm)])
        term = identity
        for position, (r, c) in enumerate(zip((rows[s] for s in perm), cols)):
            term = term @ ((zeta + position) * (r == c) * identity - rep.E(r, c))
        total += round(sign) * term
    return total


@dataclass(frozen=True, eq=False)
class GZDiagonalOps:
    zeta: Dict[Tuple[int, int], np.ndarray]
    alpha: Dict[Tuple[int, int], np.ndarray]
    beta: Dict[Tuple[int, int], np.ndarray]


def gz_operators(rep: GTBasisRep) -> GZDiagonalOps:
    """
    zeta^(k)_i are diagonal; alpha^(k)_i = sum_j (-1)^{k-j} Delta^{1..^j..k}_{1..k-1}(T(zeta^(k)_i - (k-1)/2))
    E_{j,k+1} / prod_{l != i} (zeta^(k)_i - zeta^(k)_l), with zeta evaluated on the output vector
    (it commutes with the minor). beta^(k)_i is the part of E_{k+1,k} lowering entry (k, i).
    """
    n, d = rep.n, rep.dim
    zeta = {(k, i): np.diag([zeta_value(P, k, i) for P in rep.patterns]).astype(complex)
            for k in range(1, n + 1) for i in range(1, k + 1)}
    alpha, beta = {}, {}
    for k in range(1, n):
        for i in range(1, k + 1):
            A = np.zeros((d, d), dtype=complex)
            for b, P in enumerate(rep.patterns):
                z_i = zeta_value(P, k, i)
                denominator = np.prod([z_i - zeta_value(P, k, l) for l in range(1, k + 1) if l != i])
                for j in range(1, k + 1):
                    rows = [r for r in range(1, k + 1) if r != j]
                    minor = quantum_minor(rep, rows, list(range(1, k)), z_i - (k - 1) / 2.0)
                    A[b, :] += (-1) ** (k - j) * (minor[b, :] @ rep.E(j, k + 1)) / denominator
            alpha[(k, i)] = A
            B = np.zeros((d, d), dtype=complex)
            lowering = rep.E(k + 1, k)
            for p, P in enumerate(rep.patterns):
                target = P.shifted(k, i, -1)
                if target.is_valid():
                    q = rep.index(target)
                    B[q, p] = lowering[q, p]
            beta[(k, i)] = B
    return GZDiagonalOps(zeta=zeta, alpha=alpha, beta=beta)


@dataclass(frozen=True)
class Sector:
    """Basis vectors e_i (x) xi_P sharing wt(P) - delta_i; members sorted by i"""
    key: Tuple[int, ...]
    members: Tuple[Tuple[int, int], ...]  # (i, pattern index)

    def position(self, i: int) -> Optional[int]:
        for a, (j, _) in enumerate(self.members):
            if j == i:
                return a
        return None


def sectors(rep: GTBasisRep) -> List[Sector]:
    groups: Dict[Tuple[int, ...], List[Tuple[int, int]]] = {}
    for p, P in enumerate(rep.patterns):
        wt = P.weight()
        for i in range(1, rep.n + 1):
            key = tuple(w - (m == i) for m, w in enumerate(wt, start=1))
            groups.setdefault(key, []).append((i, p))
    result = [Sector(key=key, members=tuple(sorted(members))) for key, members in sorted(groups.items())]
    logger.debug(f"{len(result)} sectors for L{rep.lam}")
    return result


def sector_residue(rep: GTBasisRep, sector: Sector, h: float) -> np.ndarray:
    """h [E_{i_a i_b}]_{p_a p_b}, the residue of the sector subsystem; scalar on members sharing i"""
    return np.array([[h * rep.E(i, j)[p, q] for (j, q) in sector.members] for (i, p) in sector.members],
                    dtype=complex)


def _flat(rep: GTBasisRep, i: int, p: int) -> int:
    return (i - 1) * rep.dim + p


def _check_h(h: float):
    if h == 0 or not np.isfinite(h):
        raise InputError(f"h must be real and nonzero, got {h}")


def _log_gamma_ratio(P: GTPattern, k: int, i: int, h: float, sign: int) -> complex:
    """
    log of prod_{l != i} G(z_i - z_l) G(z_i - z_l - s) / prod_l G(z_i - z^(k+1)_l - s/2) prod_l G(z_i - z^(k-1)_l - s/2)
    with z = zeta on P, s = sign and G(x) = Gamma(1 + s h x / 2 pi i)
    """
    eps = sign * h / TWO_PI_I
    z_i = zeta_value(P, k, i)
    total = 0.0j
    for l in range(1, k + 1):
        if l != i:
            gap = z_i - zeta_value(P, k, l)
            total += log_gamma(1.0 + eps * gap) + log_gamma(1.0 + eps * (gap - sign))
    total -= sum(log_gamma(1.0 + eps * (z_i - zeta_value(P, k + 1, l) - sign / 2.0)) for l in range(1, k + 2))
    total -= sum(log_gamma(1.0 + eps * (z_i - zeta_value(P, k - 1, l) - sign / 2.0)) for l in range(1, k))
    return total


def qstokes_subdiag(rep: GTBasisRep, h: float, k: int) -> Tuple[np.ndarray, np.ndarray]:
    """
    (s+_{k,k+1}, s-_{k+1,k}) in End(L(lambda)) from the Gamma product formula in the GZ operators:

    s+_{k,k+1} = -sum_i (i h)^{h (E_kk - E_{k+1,k+1} - 1) / 2 pi i} G+_i h alpha^(k)_i
    s-_{k+1,k} = -sum_i (i h)^{h (E_kk - E_{k+1,k+1} + 1) / 2 pi i} G-_i h beta^(k)_i

    where the diagonal factors act on the image of alpha (resp. beta) and G+-_i are the ratios
    of _log_gamma_ratio with sign +1 (resp. -1).
    """
    _check_h(h)
    if not 1 <= k <= rep.n - 1:
        raise DomainError(f"subdiagonal index {k} out of range 1..{rep.n - 1}")
    gap = np.diag(rep.E(k, k)).real - np.diag(rep.E(k + 1, k + 1)).real
    log_ih = np.log(1j * h)
    s_plus = np.zeros((rep.dim, rep.dim), dtype=complex)
    s_minus = np.zeros((rep.dim, rep.dim), dtype=complex)
    for p, P in enumerate(rep.patterns):
        for i in range(1, k + 1):
            up = P.shifted(k, i, 1)
            if up.is_valid():
                q = rep.index(up)
                power = np.exp(h * (gap[q] - 1.0) / TWO_PI_I * log_ih)
                ratio = np.exp(_log_gamma_ratio(up, k, i, h, 1))
                s_plus[q, p] -= power * ratio * h * ashift_coefficient(P, k, i)
            down = P.shifted(k, i, -1)
            if down.is_valid():
                q = rep.index(down)
                power = np.exp(h * (gap[q] + 1.0) / TWO_PI_I * log_ih)
                ratio = np.exp(_log_gamma_ratio(down, k, i, h, -1))
                s_minus[q, p] -= power * ratio * h * ashift_coefficient(down, k, i)
    return s_plus, s_minus


@dataclass(frozen=True, eq=False)
class QuantumStokesData:
    connection: OperatorMatrix
    s_minus: OperatorMatrix
    s_plus: OperatorMatrix
    monodromy: np.ndarray


def qconnection_and_full(rep: GTBasisRep, h: float) -> QuantumStokesData:
    """
    S_{h-}, S_{h+} at the caterpillar point: every weight sector is solved with the block caterpillar
    connection (repeated indices i share an irregular eigenvalue), the pieces are assembled into a
    unitary C, and C e^{w} C^dagger is block-Gauss decomposed as S_{h-} S_{h+}.
    """
    _check_h(h)
    size = rep.n * rep.dim
    C = np.zeros((size, size), dtype=complex)
    exponent = np.zeros(size)
    for sector in sectors(rep):
        flat = [_flat(rep, i, p) for i, p in sector.members]
        connection, w = block_connection_product(sector_residue(rep, sector, h), [i for i, _ in sector.members])
        C[np.ix_(flat, flat)] = connection
        exponent[flat] = w
    C = check_unitary(C, "quantum connection matrix")
    nu = C @ np.diag(np.exp(exponent)) @ C.conj().T
    L, U = block_gauss(OperatorMatrix.from_dense(nu, rep.n))
    return QuantumStokesData(connection=OperatorMatrix.from_dense(C, rep.n), s_minus=L, s_plus=U, monodromy=nu)


def _normalized_block(rep: GTBasisRep, h: float, k: int, data: QuantumStokesData) -> np.ndarray:
    """e^{-h E_kk / 2} (S_{h+})_{k,k+1}"""
    return np.diag(np.exp(-h * np.diag(rep.E(k, k)).real / 2.0)) @ data.s_plus.block(k, k + 1)


def cross_route_error(rep: GTBasisRep, h: float, data: Optional[QuantumStokesData] = None) -> float:
    """
    max over k and entries of || e^{-h E_kk / 2} (S_{h+})_{k,k+1} | - | s+_{k,k+1} ||: the Gauss route
    against the Gamma product formula. The two agree in modulus; their phases follow different gauges.
    """
    data = data if data is not None else qconnection_and_full(rep, h)
    worst = 0.0
    for k in range(1, rep.n):
        s_plus, _ = qstokes_subdiag(rep, h, k)
        worst = max(worst, float(np.max(np.abs(np.abs(_normalized_block(rep, h, k, data)) - np.abs(s_plus)))))
    return worst


def r_matrix(n: int, q: float) -> np.ndarray:
    """sum_{i != j} E_ii (x) E_jj + q sum E_ii (x) E_ii + (q - 1/q) sum_{j<i} E_ij (x) E_ji"""
    def unit(i, j):
        M = np.zeros((n, n))
        M[i, j] = 1.0
        return M

    R = np.zeros((n * n, n * n), dtype=complex)
    for i in range(n):
        for j in range(n):
            if i == j:
                R += q * np.kron(unit(i, i), unit(i, i))
            else:
                R += np.kron(unit(i, i), unit(j, j))
            if j < i:
                R += (q - 1.0 / q) * np.kron(unit(i, j), unit(j, i))
    return R


def _leg(S: OperatorMatrix, leg: int) -> np.ndarray:
    n, d = S.n, S.dim
    out = np.zeros((n * n * d, n * n * d), dtype=complex)
    for a in range(n):
        for b in range(n):
            unit = np.zeros((n, n))
            unit[a, b] = 1.0
            spaces = np.kron(unit, np.eye(n)) if leg == 1 else np.kron(np.eye(n), unit)
            out += np.kron(spaces, S.blocks[a, b])
    return out


def rll_residual(rep: GTBasisRep, h: float, data: Optional[QuantumStokesData] = None) -> Tuple[float, float]:
    """
    Relative Frobenius residuals of R S^13 S^23 = S^23 S^13 R (S = S_{h+}) and of
    R M^13 S^23 = S^23 M^13 R (M = S_{h-}^{-1}), with q = e^{h/2}.
    """
    data = data if data is not None else qconnection_and_full(rep, h)
    n, d = rep.n, rep.dim
    R = np.kron(r_matrix(n, np.exp(h / 2.0)), np.eye(d))
    M = OperatorMatrix.from_dense(np.linalg.inv(data.s_minus.to_dense()), n)
    S13, S23 = _leg(data.s_plus, 1), _leg(data.s_plus, 2)
    M13 = _leg(M, 1)

    def relative(lhs, rhs):
        return float(np.linalg.norm(lhs - rhs) / max(np.linalg.norm(lhs), 1e-300))

    return relative(R @ S13 @ S23, S23 @ S13 @ R), relative(R @ M13 @ S23, S23 @ M13 @ R)


def is_generic(P: GTPattern, k: int) -> bool:
    """epsilon_k > 0 and the raising position is the unique maximizer"""
    X, _ = string_sums(P, k)
    epsilon = max(X)
    return epsilon > 0 and X.count(epsilon) == 1


@dataclass
class WKBReport:
    pattern: str
    k: int
    expected: str
    rows: List[dict] = field(default_factory=list)
    tol: float = 1e-2

    @property
    def passed(self) -> bool:
        last = self.rows[-1] if self.rows else None
        return last is not None and last['modulus_error'] <= self.tol and last['selected'] == self.expected


def wkb_limit_check(rep: GTBasisRep, k: int, P: GTPattern, q_list: Sequence[float], tol: float = 1e-2) -> WKBReport:
    """
    v(q) = q^{phi_k(e_k P)} s+_{k,k+1} xi_P with h = 2 log q; as q -> 0 the vector tends in
    modulus to the basis vector of the crystal raise e_k P.
    """
    if not is_generic(P, k):
        raise DomainError(f"pattern {P.label} is not generic for k = {k}")
    target = raise_pattern(P, k)
    report = WKBReport(pattern=P.label, k=k, expected=target.label, tol=tol)
    phi = stats(target, k).phi
    previous = None
    for q in sorted(q_list, reverse=True):
        if not 0 < q < 1:
            raise InputError(f"q must lie in (0, 1), got {q}")
        h = 2.0 * np.log(q)
        s_plus, _ = qstokes_subdiag(rep, h, k)
        v = q ** phi * s_plus @ rep.basis_vector(P)
        selected = int(np.argmax(np.abs(v)))
        phase = float(np.angle(v[selected]))
        report.rows.append({
            'q': q,
            'h': h,
            'modulus_error': abs(float(np.linalg.norm(v)) - 1.0),
            'selected': rep.patterns[selected].label,
            'leakage': float(np.linalg.norm(np.delete(v, selected))),
            'phase_drift': 0.0 if previous is None else float(abs(np.angle(np.exp(1j * (phase - previous))))),
        })
        previous = phase
    return report


@dataclass
class CoproductReport:
    k: int
    rows: List[dict] = field(default_factory=list)
    skipped: List[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(row['match'] for row in self.rows)


def coproduct_wkb(rep1: GTBasisRep, rep2: GTBasisRep, k: int, q_list: Sequence[float],
                  threshold: float = 0.5) -> CoproductReport:
    """
    q^{phi(b) + 1} (1 (x) U_2 + U_1 (x) q^{E_{k+1,k+1} - E_kk}) on product basis vectors b = b1 (x) b2,
    with U = e^{-h E_kk / 2} (S_{h+})_{k,k+1}. The selected product vector (or none, below threshold)
    is compared with the crystal rule acting on b1 iff phi(b1) >= epsilon(b2); elements with
    phi(b1) = epsilon(b2) > 0 are skipped.
    """
    if rep1.n != rep2.n:
        raise InputError("representations of different rank")
    if not 1 <= k <= rep1.n - 1:
        raise DomainError(f"simple root index {k} out of range 1..{rep1.n - 1}")
    report = CoproductReport(k=k)
    q = min(q_list)
    h = 2.0 * np.log(q)
    U1 = _normalized_block(rep1, h, k, qconnection_and_full(rep1, h))
    U2 = _normalized_block(rep2, h, k, qconnection_and_full(rep2, h))
    K2 = np.diag(q ** (np.diag(rep2.E(k + 1, k + 1)).real - np.diag(rep2.E(k, k)).real))
    coproduct = np.kron(np.eye(rep1.dim), U2) + np.kron(U1, K2)
    for p1, P1 in enumerate(rep1.patterns):
        for p2, P2 in enumerate(rep2.patterns):
            b1, b2 = PatternCrystal(P1), PatternCrystal(P2)
            label = TensorCrystal(b1, b2).label
            if b1.phi(k) == b2.epsilon(k) and b1.phi(k) > 0:
                report.skipped.append(label)
                logger.warning(f"skipping {label}: phi(b1) = epsilon(b2) = {b1.phi(k)}")
                continue
            flipped = TensorCrystal(b2, b1)
            v = q ** (flipped.phi(k) + 1) * coproduct[:, p1 * rep2.dim + p2]
            raised = flipped.raising_operator(k)
            expected = TensorCrystal(raised.factors[1], raised.factors[0]).label if raised is not None else None
            if np.linalg.norm(v) < threshold:
                selected = None
            else:
                flat = int(np.argmax(np.abs(v)))
                selected = TensorCrystal(PatternCrystal(rep1.patterns[flat // rep2.dim]),
                                         PatternCrystal(rep2.patterns[flat % rep2.dim])).label
            report.rows.append({
                'element': label,
                'expected': expected,
                'selected': selected,
                'modulus': float(np.linalg.norm(v)),
                'match': selected == expected,
            })
    return report
