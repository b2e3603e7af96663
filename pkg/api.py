import json
import logging
from datetime import datetime, timedelta
from typing import Any, Dict, Optional, Sequence

import numpy as np

from config import CACHE_SIZE, DEFAULT_SEED, DIM_CAP, FLOW_TOL, ODE_TOL, THREADS, Z_MIN, Z_OUT
from functions.acceptance_checks import run_acceptance
from functions.am_linearization import am_map
from functions.errors import CatStokesError, InputError
from functions.gt_coordinates import diagonalize_in_stages, interlacing_gaps, m_coeff
from functions.gt_crystals import pattern_crystal, verify_crystal_axioms, weyl_dimension
from functions.isomonodromy_flow import leading_term_subdiag, solve_with_asymptotics
from functions.linalg_core import as_hermitian
from functions.ode_oracle import stokes_numeric
from functions.quantum_stokes import (
    build_representation,
    cross_route_error,
    is_generic,
    qconnection_and_full,
    qstokes_subdiag,
    rll_residual,
    wkb_limit_check,
)
from functions.stokes_caterpillar import (
    connection_product,
    monodromy_residual,
    rhb_map,
    stokes_finite_u_2x2,
    stokes_full,
)

logger = logging.getLogger(__name__)


def _spectral_intertwining(A, image) -> float:
    H = np.asarray(A, dtype=complex)
    worst = 0.0
    for k in range(1, H.shape[0] + 1):
        expected = np.exp(np.linalg.eigvalsh(H[:k, :k]))
        found = np.linalg.eigvalsh(image[:k, :k])
        worst = max(worst, float(np.max(np.abs(found - expected)) / np.max(expected)))
    return worst


class CatStokesAPI:
    """Facade over the computational modules; every method returns a JSON-ready report dict"""

    def __init__(self, dim_cap: int = DIM_CAP, cache_size: int = CACHE_SIZE):
        if cache_size < 1:
            raise InputError(f"cache_size must be positive, got {cache_size}")
        self.dim_cap = dim_cap
        self.cache_size = cache_size
        self.logger = logging.getLogger(__name__)
        self._initialize_cache()
        self._clear_cache()

    def _clear_cache(self, cache_type=None):
        if cache_type:
            self.cache[cache_type]['data'].clear()
        else:
            for cache_data in self.cache.values():
                cache_data['data'].clear()

    def _initialize_cache(self):
        """Cache stores: 'numeric' for per-matrix results, 'representation' for built gl_n modules"""
        self.cache = {
            'numeric': {'data': {}, 'duration': timedelta(hours=1)},
            'representation': {'data': {}, 'duration': timedelta(hours=24)},
        }

    def _get_from_cache(self, key: str, cache_type: str = 'numeric') -> Optional[Any]:
        cache_store = self.cache[cache_type]['data']
        if key in cache_store:
            data, timestamp = cache_store[key]
            if datetime.now() - timestamp < self.cache[cache_type]['duration']:
                return data
            self.logger.warning(f"cache entry {key} expired")
            del cache_store[key]
        return None

    def _set_cache(self, key: str, data: Any, cache_type: str = 'numeric'):
        """Store data, dropping expired entries and then the oldest ones beyond cache_size"""
        cache_store = self.cache[cache_type]['data']
        now = datetime.now()
        duration = self.cache[cache_type]['duration']
        for stale in [k for k, (_, timestamp) in cache_store.items() if now - timestamp >= duration]:
            del cache_store[stale]
        cache_store.pop(key, None)
        while cache_store and len(cache_store) >= self.cache_size:
            oldest = next(iter(cache_store))
            self.logger.debug(f"evicting cache entry {oldest}")
            del cache_store[oldest]
        cache_store[key] = (data, now)

    @staticmethod
    def _key(command: str, **params) -> str:
        def encode(value):
            if isinstance(value, np.ndarray):
                return [[[z.real, z.imag] for z in row] for row in np.atleast_2d(value).astype(complex)]
            return value
        return f"{command}_{json.dumps({k: encode(v) for k, v in params.items()}, sort_keys=True)}"

    def _cached(self, command: str, compute, cache_type: str = 'numeric', **params) -> Dict:
        key = self._key(command, **params)
        cached = self._get_from_cache(key, cache_type)
        if cached is not None:
            return cached
        try:
            result = compute()
        except CatStokesError as e:
            self.logger.error(f"Error in {command}: {str(e)}")
            raise
        self._set_cache(key, result, cache_type)
        return result

    def representation(self, lam: Sequence[int]):
        key = self._key('representation', lam=list(lam))
        rep = self._get_from_cache(key, 'representation')
        if rep is None:
            rep = build_representation(lam, self.dim_cap)
            self._set_cache(key, rep, 'representation')
        return rep

    def gt(self, A) -> Dict:
        def compute():
            coords = diagonalize_in_stages(A)
            return {
                'spectra': list(coords.spectra.levels),
                'angles': list(coords.angles.angles),
                'normalizers': list(coords.angles.normalizers),
                'interlacing_gaps': interlacing_gaps(coords.spectra),
                'm_coefficients': [[m_coeff(A, k, i, coords) for i in range(1, k + 1)] for k in range(1, coords.n)],
            }
        return self._cached('gt', compute, A=as_hermitian(A))

    def stokes(self, A, u: Optional[Sequence[float]] = None) -> Dict:
        """Stokes matrices at the caterpillar point, or at finite u for rank two"""
        def compute():
            H = as_hermitian(A)
            if u is not None:
                if H.shape != (2, 2) or len(u) != 2:
                    raise InputError("finite u is supported for 2 x 2 matrices only")
                S = stokes_finite_u_2x2(u[0], u[1], H)
                return {'u': list(u), 's_plus': S.s_plus, 's_minus': S.s_minus}
            coords = diagonalize_in_stages(H)
            S = stokes_full(H, coords)
            return {
                's_plus': S.s_plus,
                's_minus': S.s_minus,
                'connection': connection_product(H, coords).product,
                'monodromy_residual': monodromy_residual(H),
            }
        return self._cached('stokes', compute, A=as_hermitian(A), u=list(u) if u is not None else None)

    def rhb(self, A) -> Dict:
        def compute():
            nu = rhb_map(A)
            return {'nu': nu, 'gt_intertwining_error': _spectral_intertwining(A, nu)}
        return self._cached('rhb', compute, A=as_hermitian(A))

    def am(self, A) -> Dict:
        def compute():
            image = am_map(A)
            return {'am': image, 'gt_intertwining_error': _spectral_intertwining(A, image)}
        return self._cached('am', compute, A=as_hermitian(A))

    def isoflow(self, A, u: Sequence[float], ratio: float = 1e6, tol: float = FLOW_TOL) -> Dict:
        """Phi(u) with the prescribed caterpillar asymptotics and the leading subdiagonal Stokes terms at u"""
        def compute():
            H = as_hermitian(A)
            state = solve_with_asymptotics(H, u, ratio, tol)
            return {
                'u': state.u,
                'phi': state.phi,
                'leading_subdiag': [leading_term_subdiag(u, H, k) for k in range(1, len(u))],
            }
        return self._cached('isoflow', compute, A=as_hermitian(A), u=list(u), ratio=ratio, tol=tol)

    def oracle(self, A, u: Optional[Sequence[float]] = None, tol: float = ODE_TOL,
               z_min: float = Z_MIN, z_out: float = Z_OUT) -> Dict:
        def compute():
            H = as_hermitian(A)
            irregular = np.asarray(u, dtype=float) if u is not None else np.arange(1.0, H.shape[0] + 1)
            C, S = stokes_numeric(irregular, H, z_min=z_min, z_out=z_out, tol=tol)
            return {
                'u': irregular,
                'connection': C,
                'unitarity_defect': float(np.linalg.norm(C @ C.conj().T - np.eye(len(C)))),
                's_plus': S.s_plus,
                's_minus': S.s_minus,
            }
        return self._cached('oracle', compute, A=as_hermitian(A), u=list(u) if u is not None else None, tol=tol)

    def crystal(self, lam: Sequence[int], verify: bool = False) -> Dict:
        def compute():
            B = pattern_crystal(lam)
            report = {'elements': len(B), 'weyl_dimension': weyl_dimension(lam), 'graph': B.adjacency()}
            if verify:
                axioms = verify_crystal_axioms(B)
                report['axioms'] = {'checked': axioms.checked, 'passed': axioms.passed,
                                    'violations': axioms.violations}
            return report
        return self._cached('crystal', compute, lam=list(lam), verify=verify)

    def qstokes(self, lam: Sequence[int], h: float, q_list: Optional[Sequence[float]] = None) -> Dict:
        """Quantum Stokes matrices on L(lambda); with q_list, also the WKB sweep over generic patterns"""
        def compute():
            rep = self.representation(lam)
            data = qconnection_and_full(rep, h)
            subdiag = [qstokes_subdiag(rep, h, k)[0] for k in range(1, rep.n)]
            report = {
                'dim': rep.dim,
                'patterns': [P.label for P in rep.patterns],
                'subdiagonal': subdiag,
                's_plus': data.s_plus.to_dense(),
                's_minus': data.s_minus.to_dense(),
                'cross_route_error': cross_route_error(rep, h, data),
            }
            if q_list:
                rows = []
                for P in rep.patterns:
                    for k in range(1, rep.n):
                        if is_generic(P, k):
                            sweep = wkb_limit_check(rep, k, P, q_list)
                            rows.extend({'pattern': sweep.pattern, 'k': k, 'expected': sweep.expected, **row}
                                        for row in sweep.rows)
                report['rows'] = rows
            return report
        return self._cached('qstokes', compute, lam=list(lam), h=h, q_list=list(q_list) if q_list else None)

    def rll(self, lam: Sequence[int], h: float) -> Dict:
        def compute():
            r1, r2 = rll_residual(self.representation(lam), h)
            return {'lambda': list(lam), 'h': h, 'r1': r1, 'r2': r2}
        return self._cached('rll', compute, lam=list(lam), h=h)

    def check(self, seed: int = DEFAULT_SEED, quick: bool = False, threads: int = THREADS) -> Dict:
        return run_acceptance(seed=seed, quick=quick, threads=threads)
