import logging
import time
from concurrent.futures import ThreadPoolExecutor
from typing import Dict, List, Optional

import numpy as np

from config import DEFAULT_SEED, THREADS
from functions.am_linearization import am_closed_form_2x2, am_map
from functions.errors import CatStokesError
from functions.gt_coordinates import gt_spectra
from functions.gt_crystals import (
    connected_components,
    pattern_crystal,
    tensor,
    verify_crystal_axioms,
    weyl_dimension,
)
from functions.isomonodromy_flow import FlowState, extraction_error, integrate_ray
from functions.linalg_core import random_gue, random_real_symmetric
from functions.ode_oracle import connection_block_numeric, stokes_numeric
from functions.quantum_stokes import (
    ashift_coefficient,
    build_representation,
    cross_route_error,
    gz_operators,
    is_generic,
    qconnection_and_full,
    rll_residual,
    wkb_limit_check,
)
from functions.stokes_caterpillar import (
    monodromy_residual,
    normalized_connection_block,
    regularized_gauge_limit,
    rhb_map,
    stokes_finite_u_2x2,
    stokes_full,
    tau_monodromy_residual,
    wall_crossing_tau,
)

logger = logging.getLogger(__name__)

CRYSTAL_WEIGHTS = [(1, 0), (2, 0), (1, 1, 0), (2, 1, 0), (3, 1, 0)]
CRYSTAL_DIMENSIONS = [2, 3, 3, 8, 15]


def _gt_intertwining_error(A, image) -> float:
    """max_k relative distance between the level spectra of image and e^{lambda^(k)(A)}"""
    worst = 0.0
    for k, (lam, mu) in enumerate(zip(gt_spectra(A).levels, gt_spectra(image).levels), start=1):
        expected = np.exp(lam)
        worst = max(worst, float(np.max(np.abs(np.sort(mu) - expected) / np.max(np.abs(expected)))))
    return worst


def _samples(rng, sizes, count) -> List[np.ndarray]:
    return [random_gue(n, rng) for n in sizes for _ in range(count)]


def monodromy_identity(rng, quick: bool) -> Dict:
    samples = _samples(rng, (3, 4, 5, 6), 2 if quick else 25)
    residuals = [monodromy_residual(A) for A in samples]
    return {'passed': max(residuals) <= 1e-9, 'metrics': {'samples': len(samples), 'max_residual': max(residuals)}}


def gt_intertwining(rng, quick: bool) -> Dict:
    samples = _samples(rng, (3, 4, 5, 6), 2 if quick else 25)
    errors = [_gt_intertwining_error(A, rhb_map(A)) for A in samples]
    return {'passed': max(errors) <= 1e-7, 'metrics': {'samples': len(samples), 'max_error': max(errors)}}


def oracle_agreement(rng, quick: bool) -> Dict:
    flip = np.array([[0, 1], [1, 0]], dtype=complex)
    samples = [flip]
    for n in ([2, 3] if quick else [2, 3] * 5):
        G = random_gue(n, rng)
        samples.append(2.5 * G / np.linalg.norm(G, 2))
    block_error = 0.0
    for A in samples:
        for k in range(2, A.shape[0] + 1):
            diff = connection_block_numeric(A, k) - normalized_connection_block(A, k)
            block_error = max(block_error, float(np.max(np.abs(diff))))
    finite_error = 0.0
    for A in (s for s in samples if s.shape[0] == 2):
        _, numeric = stokes_numeric((1.0, 2.0), A)
        closed = stokes_finite_u_2x2(1.0, 2.0, A)
        finite_error = max(finite_error, float(np.max(np.abs(numeric.s_plus - closed.s_plus))))
    return {
        'passed': block_error <= 1e-6 and finite_error <= 1e-6,
        'metrics': {'samples': len(samples), 'connection_error': block_error, 'finite_u_error': finite_error},
    }


def regularized_limit(rng, quick: bool) -> Dict:
    A = random_gue(2, rng)
    target = rhb_map(A)
    rows = []
    for ratio in (1e2, 1e4, 1e6):
        S = stokes_finite_u_2x2(1.0, ratio, A)
        rows.append({'ratio': ratio, 'error': float(np.linalg.norm(regularized_gauge_limit((1.0, ratio), S) - target))})
    errors = [row['error'] for row in rows]
    decreasing = all(b < a for a, b in zip(errors, errors[1:]))
    return {'passed': decreasing and errors[-1] <= 1e-3, 'metrics': {'final_error': errors[-1]}, 'rows': rows}


def isomonodromy_conservation(rng, quick: bool) -> Dict:
    A = random_gue(3, rng)
    start = FlowState(u=np.array([1.0, 2.0, 10.0]), phi=A)
    end = integrate_ray(start, 3, 1e4, tol=1e-10)
    spectrum_drift = float(np.max(np.abs(np.linalg.eigvalsh(end.phi) - np.linalg.eigvalsh(A))))
    norm0 = float(np.trace(A.conj().T @ A).real)
    norm_drift = abs(float(np.trace(end.phi.conj().T @ end.phi).real) - norm0) / norm0
    rows = [{'ratio': r, 'error': extraction_error(A, (1.0, 2.0, 3.0), r)} for r in (1e2, 1e4, 1e6)]
    errors = [row['error'] for row in rows]
    passed = (max(spectrum_drift, norm_drift) <= 1e-8 and errors[-1] <= 1e-3
              and all(b < a for a, b in zip(errors, errors[1:])))
    return {
        'passed': passed,
        'metrics': {'spectrum_drift': spectrum_drift, 'norm_drift': norm_drift, 'final_extraction_error': errors[-1]},
        'rows': rows,
    }


def am_checks(rng, quick: bool) -> Dict:
    A2 = random_gue(2, rng)
    closed_form_error = float(np.max(np.abs(am_map(A2) - am_closed_form_2x2(A2))))
    imaginary = max(float(np.linalg.norm(am_map(random_real_symmetric(n, rng)).imag)) for n in range(2, 6))
    intertwining = max(_gt_intertwining_error(A, am_map(A)) for A in _samples(rng, (3, 4), 2 if quick else 5))
    return {
        'passed': closed_form_error <= 1e-10 and imaginary <= 1e-9 and intertwining <= 1e-7,
        'metrics': {'closed_form_error': closed_form_error, 'imaginary_norm': imaginary, 'gt_intertwining': intertwining},
    }


def crystal_checks(rng, quick: bool) -> Dict:
    violations, counts = 0, []
    for lam in CRYSTAL_WEIGHTS:
        B = pattern_crystal(lam)
        violations += len(verify_crystal_axioms(B).violations)
        counts.append(len(B))
    standard = pattern_crystal((1, 0))
    components = sorted(len(c) for c in connected_components(tensor(standard, standard)))
    passed = (violations == 0 and counts == CRYSTAL_DIMENSIONS
              and counts == [weyl_dimension(lam) for lam in CRYSTAL_WEIGHTS] and components == [1, 3])
    return {'passed': passed, 'metrics': {'violations': violations, 'counts': counts, 'tensor_components': components}}


def quantum_checks(rng, quick: bool) -> Dict:
    alpha_error = 0.0
    for lam in [(1, 0), (2, 0), (1, 0, 0), (2, 0, 0)]:
        rep = build_representation(lam)
        ops = gz_operators(rep)
        for (k, i), alpha in ops.alpha.items():
            expected = np.zeros_like(alpha)
            for p, P in enumerate(rep.patterns):
                c = ashift_coefficient(P, k, i)
                if c:
                    expected[rep.index(P.shifted(k, i, 1)), p] = c
            alpha_error = max(alpha_error, float(np.max(np.abs(alpha - expected))))
    cross_route, rll = 0.0, 0.0
    for lam in [(1, 0), (1, 0, 0), (2, 1, 0)]:
        rep = build_representation(lam)
        for h in (-0.5, -1.0):
            data = qconnection_and_full(rep, h)
            cross_route = max(cross_route, cross_route_error(rep, h, data))
            rll = max(rll, *rll_residual(rep, h, data))
    wkb_error, wkb_mismatch, rows = 0.0, 0, []
    for lam in [(2, 0), (1, 0, 0)]:
        rep = build_representation(lam)
        for P in rep.patterns:
            for k in range(1, rep.n):
                if not is_generic(P, k):
                    continue
                report = wkb_limit_check(rep, k, P, [1e-2, 1e-4, 1e-6])
                last = report.rows[-1]
                wkb_error = max(wkb_error, last['modulus_error'])
                wkb_mismatch += last['selected'] != report.expected
                rows.extend({'pattern': report.pattern, 'k': k, **row} for row in report.rows)
    passed = alpha_error <= 1e-9 and cross_route <= 1e-8 and rll <= 1e-7 and wkb_error <= 1e-2 and wkb_mismatch == 0
    return {
        'passed': passed,
        'metrics': {'alpha_error': alpha_error, 'cross_route_error': cross_route, 'rll_residual': rll,
                    'wkb_modulus_error': wkb_error, 'wkb_mismatches': wkb_mismatch},
        'rows': rows,
    }


def wall_crossing(rng, quick: bool) -> Dict:
    samples = _samples(rng, (3,), 2 if quick else 10)
    residual, identity = 0.0, 0.0
    for A in samples:
        for i in (1, 2, 3):
            residual = max(residual, tau_monodromy_residual(A, i))
        S = stokes_full(A)
        identity = max(identity, float(np.max(np.abs(wall_crossing_tau(S, 1).s_plus - S.s_plus))))
    return {'passed': residual <= 1e-8 and identity <= 1e-12,
            'metrics': {'samples': len(samples), 'max_residual': residual, 'tau_1_identity_error': identity}}


CRITERIA: Dict[int, tuple] = {
    1: ("monodromy identity", monodromy_identity),
    2: ("GT intertwining of nu", gt_intertwining),
    3: ("ODE oracle agreement", oracle_agreement),
    4: ("regularized limit", regularized_limit),
    5: ("isomonodromy conservation", isomonodromy_conservation),
    6: ("AM map", am_checks),
    7: ("crystal correctness", crystal_checks),
    8: ("quantum layer", quantum_checks),
    9: ("wall-crossing", wall_crossing),
}


def run_criterion(number: int, seed: int = DEFAULT_SEED, quick: bool = False) -> Dict:
    """One acceptance row; a CatStokesError becomes a failed row instead of propagating"""
    name, check = CRITERIA[number]
    rng = np.random.default_rng([seed, number])
    started = time.perf_counter()
    try:
        row = check(rng, quick)
    except CatStokesError as e:
        logger.error(f"Error in criterion {number} ({name}): {str(e)}")
        row = {'passed': False, 'metrics': {}, 'error': f"{type(e).__name__}: {str(e)}"}
    row.update({'criterion': number, 'name': name, 'seconds': round(time.perf_counter() - started, 3)})
    logger.info(f"criterion {number} ({name}): {'pass' if row['passed'] else 'FAIL'}")
    return row


def run_acceptance(seed: int = DEFAULT_SEED, quick: bool = False, threads: int = THREADS,
                   criteria: Optional[List[int]] = None) -> Dict:
    numbers = sorted(criteria) if criteria else sorted(CRITERIA)
    with ThreadPoolExecutor(max_workers=max(threads, 1)) as executor:
        rows = list(executor.map(lambda number: run_criterion(number, seed, quick), numbers))
    return {'seed': seed, 'quick': quick, 'passed': all(row['passed'] for row in rows), 'criteria': rows}
