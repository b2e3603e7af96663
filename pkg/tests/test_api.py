from datetime import datetime, timedelta

import numpy as np
import pytest
from numpy.testing import assert_allclose

from api import CatStokesAPI
from functions.errors import DimensionCapError, InputError, NonGenericError


@pytest.fixture
def api():
    return CatStokesAPI()


def test_gt_report(api, flip):
    report = api.gt(flip)
    assert_allclose(report['spectra'][1], [-1.0, 1.0], atol=1e-14)
    assert set(report) == {'spectra', 'angles', 'normalizers', 'interlacing_gaps', 'm_coefficients'}
    assert report['m_coefficients'][0][0] == pytest.approx(1 / np.sqrt(2))


def test_results_are_cached(api, flip):
    first = api.stokes(flip)
    assert api.stokes(flip.copy()) is first
    assert api.stokes(flip, [1.0, 2.0]) is not first


def test_expired_entries_are_recomputed(api, flip):
    first = api.rhb(flip)
    key = api._key('rhb', A=flip)
    data, _ = api.cache['numeric']['data'][key]
    api.cache['numeric']['data'][key] = (data, datetime.now() - timedelta(hours=2))
    second = api.rhb(flip)
    assert second is not first
    assert_allclose(second['nu'], first['nu'])


def test_cache_is_bounded(flip):
    api = CatStokesAPI(cache_size=2)
    first = api.gt(flip)
    api.gt(np.diag([1.0, 2.0]))
    api.gt(np.diag([3.0, 4.0]))
    store = api.cache['numeric']['data']
    assert len(store) == 2
    assert api._key('gt', A=flip) not in store
    assert api.gt(flip) is not first
    with pytest.raises(InputError):
        CatStokesAPI(cache_size=0)


def test_expired_entries_are_dropped_on_write(api, flip):
    api.gt(flip)
    store = api.cache['numeric']['data']
    key = next(iter(store))
    data, _ = store[key]
    store[key] = (data, datetime.now() - timedelta(hours=2))
    api.gt(np.diag([1.0, 2.0]))
    assert key not in store
    assert len(store) == 1


def test_representation_is_shared(api):
    assert api.representation((1, 0)) is api.representation([1, 0])
    api._clear_cache('representation')
    assert not api.cache['representation']['data']


def test_finite_u_needs_rank_two(api, gue):
    with pytest.raises(InputError):
        api.stokes(gue(3), [1.0, 2.0, 3.0])


def test_errors_propagate(api):
    with pytest.raises(NonGenericError):
        api.stokes(np.array([[1, 0, 1], [0, 1, 1], [1, 1, 0]], dtype=complex))
    with pytest.raises(DimensionCapError):
        CatStokesAPI(dim_cap=4).qstokes((2, 1, 0), -1.0)


def test_rhb_and_am_reports(api, gue):
    A = gue(3)
    assert api.rhb(A)['gt_intertwining_error'] <= 1e-7
    assert api.am(A)['gt_intertwining_error'] <= 1e-7


def test_crystal_report(api):
    report = api.crystal((2, 1, 0), verify=True)
    assert report['elements'] == report['weyl_dimension'] == 8
    assert report['axioms']['passed'] and report['axioms']['checked'] == 16
    assert 'axioms' not in api.crystal((2, 1, 0))


def test_qstokes_report(api):
    report = api.qstokes((1, 0), -1.0, [0.1, 0.01])
    assert report['dim'] == 2
    assert report['patterns'] == ['1,0|0', '1,0|1']
    assert report['cross_route_error'] <= 1e-8
    assert report['subdiagonal'][0][1, 0] == pytest.approx(2 * np.sinh(0.5))
    assert [row['q'] for row in report['rows']] == [0.1, 0.01]


def test_rll_report(api):
    report = api.rll((1, 0), -1.0)
    assert report['r1'] <= 1e-8 and report['r2'] <= 1e-8
