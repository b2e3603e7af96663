import pytest

from functions.acceptance_checks import CRYSTAL_DIMENSIONS, CRYSTAL_WEIGHTS
from functions.errors import InputError
from functions.gt_crystals import (
    GTPattern,
    PatternCrystal,
    connected_components,
    enumerate_patterns,
    highest_weight_elements,
    lower_pattern,
    lowest_pattern,
    monomial_basis_path,
    monomial_exponents,
    pattern_crystal,
    pattern_from_monomial_exponents,
    raise_pattern,
    stats,
    string_sums,
    tensor,
    verify_crystal_axioms,
    weyl_dimension,
)


def pattern(*rows):
    """Build a pattern from rows given bottom row first"""
    return GTPattern(tuple(tuple(r) for r in rows))


@pytest.mark.parametrize("lam,dim", list(zip(CRYSTAL_WEIGHTS, CRYSTAL_DIMENSIONS)))
def test_pattern_counts(lam, dim):
    patterns = enumerate_patterns(lam)
    assert len(patterns) == dim == weyl_dimension(lam)
    assert len(set(patterns)) == dim
    assert all(P.is_valid() and P.top == lam for P in patterns)


def test_non_dominant_weight():
    with pytest.raises(InputError):
        enumerate_patterns((0, 1))
    with pytest.raises(InputError):
        weyl_dimension(())


def test_label_and_weight():
    P = pattern((1,), (1, 0), (1, 0, 0))
    assert P.label == '1,0,0|1,0|1'
    assert P.weight() == (1, 0, 0)
    assert pattern((0,), (0, 0), (1, 0, 0)).weight() == (0, 0, 1)


def test_stats_rank_two():
    low = pattern((0,), (1, 0))
    s = stats(low, 1)
    assert (s.wt, s.epsilon, s.phi) == (-1, 1, 0)
    high = raise_pattern(low, 1)
    assert high == pattern((1,), (1, 0))
    assert raise_pattern(high, 1) is None
    assert lower_pattern(high, 1) == low


def test_string_sums_index_range():
    with pytest.raises(InputError):
        string_sums(pattern((0,), (1, 0)), 2)


@pytest.mark.parametrize("lam", CRYSTAL_WEIGHTS)
def test_pairing_and_inverse(lam):
    for P in enumerate_patterns(lam):
        for k in range(1, len(lam)):
            s = stats(P, k)
            assert s.phi - s.epsilon == s.wt
            raised = raise_pattern(P, k)
            if raised is not None:
                assert lower_pattern(raised, k) == P
            lowered = lower_pattern(P, k)
            if lowered is not None:
                assert raise_pattern(lowered, k) == P


def test_raise_chain_from_lowest():
    P = lowest_pattern((1, 0, 0))
    assert P == pattern((0,), (0, 0), (1, 0, 0))
    assert raise_pattern(P, 1) is None
    P = raise_pattern(P, 2)
    assert P == pattern((0,), (1, 0), (1, 0, 0))
    P = raise_pattern(P, 1)
    assert P == pattern((1,), (1, 0), (1, 0, 0))
    assert raise_pattern(P, 1) is None and raise_pattern(P, 2) is None


@pytest.mark.parametrize("lam", CRYSTAL_WEIGHTS)
def test_axioms_hold(lam):
    report = verify_crystal_axioms(pattern_crystal(lam))
    assert report.passed
    assert report.checked == weyl_dimension(lam) * (len(lam) - 1)


def test_axiom_violation_is_reported():
    B = pattern_crystal((2, 1, 0))
    b = B.elements[0]
    B.phi[(b, 1)] += 1
    report = verify_crystal_axioms(B)
    assert not report.passed
    assert any(label == b.label for label, _, _ in report.violations)


def test_single_highest_weight():
    B = pattern_crystal((2, 1, 0))
    top = highest_weight_elements(B)
    assert top == [PatternCrystal(pattern((2,), (2, 1), (2, 1, 0)))]
    lowest = PatternCrystal(lowest_pattern((2, 1, 0)))
    for b in B.elements:
        highest, raises = b.to_highest_weight()
        assert highest == top[0]
        assert highest.reverse_raise_seq(raises) == b
        assert b.to_lowest_weight()[0] == lowest
    assert len(connected_components(B)) == 1


def test_tensor_decomposition():
    std = pattern_crystal((1, 0))
    B = tensor(std, std)
    assert len(B) == 4
    assert verify_crystal_axioms(B).passed
    assert sorted(len(c) for c in connected_components(B)) == [1, 3]
    weights = sorted(b.weight() for b in highest_weight_elements(B))
    assert weights == [(1, 1), (2, 0)]


def test_tensor_with_trivial():
    B = pattern_crystal((2, 1, 0))
    T = tensor(pattern_crystal((0, 0, 0)), B)
    assert len(T) == len(B)
    assert verify_crystal_axioms(T).passed
    assert len(connected_components(T)) == 1


def test_tensor_rank_mismatch():
    with pytest.raises(InputError):
        tensor(pattern_crystal((1, 0)), pattern_crystal((1, 0, 0)))


def test_monomial_reaches_highest():
    steps, P = monomial_basis_path((1, 0, 0), [[1], [1, 0]])
    assert P == pattern((1,), (1, 0), (1, 0, 0))
    assert [row for row, _ in steps] == [2, 1]


@pytest.mark.parametrize("lam", [(2, 0), (3, 0), (1, 0, 0)])
def test_monomial_exponents_recover_patterns(lam):
    for P in enumerate_patterns(lam):
        assert pattern_from_monomial_exponents(lam, monomial_exponents(P)) == P


def test_monomial_input_checks():
    with pytest.raises(InputError):
        monomial_basis_path((1, 0, 0), [[1]])
    with pytest.raises(InputError):
        monomial_basis_path((1, 0, 0), [[-1], [0, 0]])


def test_adjacency():
    graph = pattern_crystal((1, 0)).adjacency()
    assert graph['rank'] == 2
    assert [node['label'] for node in graph['nodes']] == ['1,0|0', '1,0|1']
    assert graph['edges'] == [{'from': '1,0|0', 'to': '1,0|1', 'index': 1, 'op': 'raise'}]
