import logging
from dataclasses import dataclass
from typing import Iterable, List, Optional

import numpy as np

from config import RADICAND_CLAMP, RADICAND_FAIL, SINH_LOG_SPACE_GAP
from functions.errors import ConsistencyError, DomainError
from functions.gt_coordinates import GTCoordinates, StageData, diagonalize_in_stages
from functions.linalg_core import check_unitary

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class PsiChain:
    factors: List[np.ndarray]
    product: np.ndarray


def _log_abs_sinh_half(x: float) -> float:
    """log|sinh(x/2)|"""
    half = abs(x) / 2.0
    if half > SINH_LOG_SPACE_GAP:
        return half - np.log(2.0) + np.log1p(-np.exp(-2.0 * half))
    return float(np.log(np.abs(np.sinh(half))))


def _sinh_quotient(numerator: Iterable[float], denominator: Iterable[float]) -> float:
    """prod sinh(x/2) over numerator / prod sinh(y/2) over denominator, evaluated in log-space"""
    log_value, sign = 0.0, 1.0
    for x in numerator:
        log_value += _log_abs_sinh_half(x)
        sign *= np.sign(x)
    for y in denominator:
        log_value -= _log_abs_sinh_half(y)
        sign *= np.sign(y)
    return sign * np.exp(log_value)


def _checked_sqrt(radicand: float, where: str) -> float:
    if radicand >= 0:
        return np.sqrt(radicand)
    if radicand < -RADICAND_FAIL:
        raise ConsistencyError(f"negative radicand {radicand:.3e} at {where}")
    if radicand < -RADICAND_CLAMP:
        logger.warning(f"clamping radicand {radicand:.3e} at {where}")
    return 0.0


def _psi_from_stage(stage: StageData, n: int) -> np.ndarray:
    k = stage.k + 1
    lam, a = stage.lam, stage.a
    K = list(stage.coupled_indices)
    mu_K = stage.mu_coupled()
    factor = np.eye(n, dtype=complex)
    factor[:k, :k] = 0.0
    for col, (kind, j) in enumerate(stage.kinds):
        if kind == 'pass':
            factor[j, col] = 1.0
            continue
        mu_j = mu_K[j]
        other_mu = [mu_K[v] for v in range(len(mu_K)) if v != j]
        for i in K:
            other_lam = [lam[v] for v in K if v != i]
            radicand = _sinh_quotient(
                [l - mu_j for l in other_lam] + [m - lam[i] for m in other_mu],
                [m - mu_j for m in other_mu] + [l - lam[i] for l in other_lam],
            )
            root = _checked_sqrt(radicand, f"level {k}, entry ({i + 1}, {col + 1})")
            phase = a[i] / abs(a[i])
            factor[i, col] = np.exp((lam[i] - mu_j) / 4.0) * phase * np.sign(mu_j - lam[i]) * root
        radicand = _sinh_quotient([lam[v] - mu_j for v in K], [m - mu_j for m in other_mu])
        root = _checked_sqrt(radicand, f"level {k}, row {k}")
        factor[k - 1, col] = np.exp((mu_j - stage.d) / 4.0) * root
    return factor


def psi_factor(A, k: int, coords: Optional[GTCoordinates] = None) -> np.ndarray:
    """Unitary factor psi^(k) of the linearization, embedded in n x n (identity for k = 1)"""
    coords = coords if coords is not None else diagonalize_in_stages(A)
    n = coords.n
    if not 1 <= k <= n:
        raise DomainError(f"level {k} out of range 1..{n}")
    if k == 1:
        return np.eye(n, dtype=complex)
    return _psi_from_stage(coords.stage(k - 1), n)


def psi_chain(A, coords: Optional[GTCoordinates] = None) -> PsiChain:
    coords = coords if coords is not None else diagonalize_in_stages(A)
    factors = [psi_factor(A, k, coords) for k in range(1, coords.n + 1)]
    product = np.eye(coords.n, dtype=complex)
    for factor in factors:
        product = product @ factor
    return PsiChain(factors=factors, product=product)


def am_map(A, coords: Optional[GTCoordinates] = None) -> np.ndarray:
    """Gamma_AM(A) = psi(A) e^{A_n} psi(A)^dagger, A_n = diag(lambda^(n)), psi(A) unitary"""
    coords = coords if coords is not None else diagonalize_in_stages(A)
    psi = check_unitary(psi_chain(A, coords).product, "linearization factor psi")
    return psi @ np.diag(np.exp(coords.spectra.level(coords.n))) @ psi.conj().T


def am_closed_form_2x2(A) -> np.ndarray:
    """Explicit rank two linearization, used as a reference for am_map"""
    H = np.asarray(A, dtype=complex)
    lam = H[0, 0].real
    mu1, mu2 = np.linalg.eigvalsh(H)
    phase = H[0, 1] / abs(H[0, 1]) if abs(H[0, 1]) > 0 else 1.0
    modulus_sq = np.exp(lam + mu1) + np.exp(lam + mu2) - np.exp(2 * lam) - np.exp(mu1 + mu2)
    b = phase * np.sqrt(max(modulus_sq, 0.0))
    return np.array([
        [np.exp(lam), b],
        [np.conj(b), np.exp(mu1) + np.exp(mu2) - np.exp(lam)],
    ], dtype=complex)
