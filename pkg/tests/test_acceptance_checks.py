import pytest

from functions import acceptance_checks
from functions.acceptance_checks import CRITERIA, run_acceptance, run_criterion
from functions.errors import ConvergenceError


def strip_timing(report):
    return [{k: v for k, v in row.items() if k != 'seconds'} for row in report['criteria']]


def test_criteria_table():
    assert sorted(CRITERIA) == list(range(1, 10))


def test_crystal_criterion():
    row = run_criterion(7, quick=True)
    assert row['passed']
    assert row['criterion'] == 7 and row['name'] == "crystal correctness"
    assert row['metrics']['counts'] == [2, 3, 3, 8, 15]
    assert row['seconds'] >= 0


def test_monodromy_criterion_quick():
    assert run_criterion(1, seed=3, quick=True)['passed']


def test_failure_becomes_row(monkeypatch):
    def broken(rng, quick):
        raise ConvergenceError("did not settle")

    monkeypatch.setitem(acceptance_checks.CRITERIA, 9, ("wall-crossing", broken))
    row = run_criterion(9, quick=True)
    assert not row['passed']
    assert row['error'] == "ConvergenceError: did not settle"


def test_acceptance_subset_is_deterministic():
    first = run_acceptance(seed=11, quick=True, threads=2, criteria=[7, 1, 9])
    second = run_acceptance(seed=11, quick=True, threads=1, criteria=[1, 7, 9])
    assert [row['criterion'] for row in first['criteria']] == [1, 7, 9]
    assert strip_timing(first) == strip_timing(second)
    assert first['passed']


@pytest.mark.slow
def test_full_acceptance_quick():
    report = run_acceptance(quick=True)
    failed = [row['name'] for row in report['criteria'] if not row['passed']]
    assert not failed
