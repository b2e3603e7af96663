import logging
from dataclasses import dataclass, field
from functools import lru_cache
from itertools import product as cartesian
from math import prod
from typing import Dict, Hashable, List, Optional, Sequence, Tuple

from config import CACHE_SIZE
from functions.errors import ConsistencyError, InputError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class GTPattern:
    """
    Integer Gelfand-Tsetlin pattern. rows[k-1] is lambda^(k), so rows[-1] is the top row lambda.
    Entries within a row are non-increasing.
    """
    rows: Tuple[Tuple[int, ...], ...]

    @property
    def n(self) -> int:
        return len(self.rows)

    @property
    def top(self) -> Tuple[int, ...]:
        return self.rows[-1]

    def row(self, k: int) -> Tuple[int, ...]:
        return self.rows[k - 1]

    def entry(self, k: int, j: int) -> Optional[int]:
        """lambda^(k)_j, or None when (k, j) leaves the triangle"""
        if 1 <= k <= self.n and 1 <= j <= k:
            return self.rows[k - 1][j - 1]
        return None

    def is_valid(self) -> bool:
        for k in range(2, self.n + 1):
            upper, lower = self.rows[k - 1], self.rows[k - 2]
            for j in range(k - 1):
                if not upper[j] >= lower[j] >= upper[j + 1]:
                    return False
        return True

    def weight(self) -> Tuple[int, ...]:
        sums = [0] + [sum(r) for r in self.rows]
        return tuple(sums[k] - sums[k - 1] for k in range(1, self.n + 1))

    def shifted(self, k: int, j: int, delta: int) -> 'GTPattern':
        rows = [list(r) for r in self.rows]
        rows[k - 1][j - 1] += delta
        return GTPattern(tuple(tuple(r) for r in rows))

    @property
    def label(self) -> str:
        return '|'.join(','.join(str(x) for x in r) for r in reversed(self.rows))


def check_dominant(lam: Sequence[int]) -> Tuple[int, ...]:
    lam = tuple(int(x) for x in lam)
    if len(lam) == 0:
        raise InputError("highest weight must be non-empty")
    if any(lam[i] < lam[i + 1] for i in range(len(lam) - 1)):
        raise InputError(f"highest weight {lam} is not dominant")
    return lam


def weyl_dimension(lam: Sequence[int]) -> int:
    lam = check_dominant(lam)
    n = len(lam)
    numerator = prod(lam[i] - lam[j] + j - i for i in range(n) for j in range(i + 1, n))
    denominator = prod(j - i for i in range(n) for j in range(i + 1, n))
    return numerator // denominator


@lru_cache(maxsize=CACHE_SIZE)
def _enumerate(lam: Tuple[int, ...]) -> Tuple[GTPattern, ...]:
    def below(row):
        ranges = [range(row[j + 1], row[j] + 1) for j in range(len(row) - 1)]
        return [tuple(c) for c in cartesian(*ranges)]

    partial = [(lam,)]
    for _ in range(len(lam) - 1):
        partial = [(lower,) + chain for chain in partial for lower in below(chain[0])]
    return tuple(sorted((GTPattern(chain) for chain in partial), key=lambda p: p.rows))


def enumerate_patterns(lam: Sequence[int]) -> List[GTPattern]:
    """All integer patterns with top row lambda, in a fixed order"""
    return list(_enumerate(check_dominant(lam)))


def _x(P: GTPattern, k: int, j: int) -> int:
    terms = [(-1, k, j), (1, k - 1, j - 1), (-1, k, j - 1), (1, k + 1, j)]
    return sum(sign * P.entry(r, c) for sign, r, c in terms if P.entry(r, c) is not None)


def _y(P: GTPattern, k: int, j: int) -> int:
    terms = [(1, k, j), (-1, k - 1, j), (1, k, j + 1), (-1, k + 1, j + 1)]
    return sum(sign * P.entry(r, c) for sign, r, c in terms if P.entry(r, c) is not None)


@dataclass(frozen=True)
class PatternStats:
    wt: int
    epsilon: int
    phi: int
    raise_index: int
    lower_index: int


def string_sums(P: GTPattern, k: int) -> Tuple[List[int], List[int]]:
    """(X, Y): prefix sums of x^(k) and suffix sums of y^(k); entries outside the triangle contribute nothing"""
    if not 1 <= k <= P.n - 1:
        raise InputError(f"simple root index {k} out of range 1..{P.n - 1}")
    X, running = [], 0
    for j in range(1, k + 1):
        running += _x(P, k, j)
        X.append(running)
    Y, running = [0] * k, 0
    for j in range(k, 0, -1):
        running += _y(P, k, j)
        Y[j - 1] = running
    return X, Y


def stats(P: GTPattern, k: int) -> PatternStats:
    """
    Crystal data of P for the simple root k.

    epsilon = max X, phi = max Y, raising acts at the first maximizer of X and lowering
    at the last maximizer of Y.
    """
    X, Y = string_sums(P, k)
    epsilon, phi = max(X), max(Y)
    wt = P.weight()
    return PatternStats(
        wt=wt[k - 1] - wt[k],
        epsilon=epsilon,
        phi=phi,
        raise_index=X.index(epsilon) + 1,
        lower_index=k - Y[::-1].index(phi),
    )


def raise_pattern(P: GTPattern, k: int) -> Optional[GTPattern]:
    s = stats(P, k)
    if s.epsilon <= 0:
        return None
    result = P.shifted(k, s.raise_index, 1)
    if not result.is_valid():
        raise ConsistencyError(f"raising {P.label} at {k} broke interlacing")
    return result


def lower_pattern(P: GTPattern, k: int) -> Optional[GTPattern]:
    s = stats(P, k)
    if s.phi <= 0:
        return None
    result = P.shifted(k, s.lower_index, -1)
    if not result.is_valid():
        raise ConsistencyError(f"lowering {P.label} at {k} broke interlacing")
    return result


class CrystalGraphElement:
    def raising_operator(self, index):
        """The raising operator for the crystal graph."""
        raise NotImplementedError

    def lowering_operator(self, index):
        """The lowering operator for the crystal graph."""
        raise NotImplementedError

    def phi(self, index):
        raise NotImplementedError

    def epsilon(self, index):
        raise NotImplementedError

    def weight(self) -> Tuple[int, ...]:
        raise NotImplementedError

    def crystal_length(self):
        """Rank n of gl_n; simple roots are 1..n-1"""
        raise NotImplementedError

    def to_highest_weight(self):
        """Return the highest weight element in the connected component and the raises used."""
        g = self
        raise_seq = []
        found = True
        while found:
            found = False
            for row in range(1, g.crystal_length()):
                g0 = g.raising_operator(row)
                if g0 is not None:
                    found = True
                    g = g0
                    raise_seq.append(row)
                    break
        return (g, tuple(raise_seq))

    def to_lowest_weight(self):
        g = self
        lower_seq = []
        found = True
        while found:
            found = False
            for row in range(1, g.crystal_length()):
                g0 = g.lowering_operator(row)
                if g0 is not None:
                    found = True
                    g = g0
                    lower_seq.append(row)
                    break
        return (g, tuple(lower_seq))

    def reverse_raise_seq(self, raise_seq):
        rc = self
        for row in reversed(raise_seq):
            rc = rc.lowering_operator(row)
            if rc is None:
                return None
        return rc


class PatternCrystal(CrystalGraphElement):
    def __init__(self, pattern: GTPattern):
        self.pattern = pattern

    def __eq__(self, other):
        return type(self) is type(other) and self.pattern == other.pattern

    def __hash__(self):
        return hash(self.pattern)

    def __repr__(self):
        return f"PatternCrystal({self.pattern.label})"

    @property
    def label(self) -> str:
        return self.pattern.label

    def crystal_length(self):
        return self.pattern.n

    def weight(self):
        return self.pattern.weight()

    def phi(self, index):
        return stats(self.pattern, index).phi

    def epsilon(self, index):
        return stats(self.pattern, index).epsilon

    def raising_operator(self, index):
        result = raise_pattern(self.pattern, index)
        return PatternCrystal(result) if result is not None else None

    def lowering_operator(self, index):
        result = lower_pattern(self.pattern, index)
        return PatternCrystal(result) if result is not None else None


class TensorCrystal(CrystalGraphElement):
    """b1 (x) b2: raising acts on b1 iff epsilon(b1) > phi(b2), lowering on b1 iff epsilon(b1) >= phi(b2)"""

    def __init__(self, *factors):
        if len(factors) == 1:
            self.factors = tuple(factors[0])
        else:
            self.factors = tuple(factors)

    def __eq__(self, other):
        return type(self) is type(other) and self.factors == other.factors

    def __hash__(self):
        return hash(self.factors)

    def __repr__(self):
        return f"TensorCrystal({self.label})"

    @property
    def label(self) -> str:
        return ' (x) '.join(f.label for f in self.factors)

    def crystal_length(self):
        return max(factor.crystal_length() for factor in self.factors)

    def weight(self):
        return tuple(a + b for a, b in zip(self.factors[0].weight(), self.factors[1].weight()))

    def phi(self, index):
        return self.factors[0].phi(index) + max(0, self.factors[1].phi(index) - self.factors[0].epsilon(index))

    def epsilon(self, index):
        return self.factors[1].epsilon(index) + max(0, self.factors[0].epsilon(index) - self.factors[1].phi(index))

    def lowering_operator(self, index):
        if self.factors[0].epsilon(index) < self.factors[1].phi(index):
            tz = TensorCrystal(self.factors[0], self.factors[1].lowering_operator(index))
            if tz.factors[1] is None:
                return None
            return tz
        tz = TensorCrystal(self.factors[0].lowering_operator(index), self.factors[1])
        if tz.factors[0] is None:
            return None
        return tz

    def raising_operator(self, index):
        if self.factors[0].epsilon(index) > self.factors[1].phi(index):
            tz = TensorCrystal(self.factors[0].raising_operator(index), self.factors[1])
            if tz.factors[0] is None:
                return None
            return tz
        tz = TensorCrystal(self.factors[0], self.factors[1].raising_operator(index))
        if tz.factors[1] is None:
            return None
        return tz


Edge = Tuple[Hashable, int]


@dataclass
class CrystalGraph:
    """Finite crystal: elements with tabulated raise/lower maps, epsilon, phi and weights"""
    elements: List[CrystalGraphElement]
    rank: int
    raise_map: Dict[Edge, Optional[CrystalGraphElement]] = field(default_factory=dict)
    lower_map: Dict[Edge, Optional[CrystalGraphElement]] = field(default_factory=dict)
    epsilon: Dict[Edge, int] = field(default_factory=dict)
    phi: Dict[Edge, int] = field(default_factory=dict)

    @classmethod
    def from_elements(cls, elements: Sequence[CrystalGraphElement], rank: int) -> 'CrystalGraph':
        graph = cls(elements=list(elements), rank=rank)
        for b in graph.elements:
            for k in graph.indices:
                graph.raise_map[(b, k)] = b.raising_operator(k)
                graph.lower_map[(b, k)] = b.lowering_operator(k)
                graph.epsilon[(b, k)] = b.epsilon(k)
                graph.phi[(b, k)] = b.phi(k)
        logger.debug(f"crystal with {len(graph.elements)} elements, rank {rank}")
        return graph

    @property
    def indices(self) -> range:
        return range(1, self.rank)

    def __len__(self):
        return len(self.elements)

    def adjacency(self) -> dict:
        labels = {b: b.label for b in self.elements}
        return {
            'rank': self.rank,
            'nodes': [{'label': labels[b], 'weight': list(b.weight())} for b in self.elements],
            'edges': [
                {'from': labels[b], 'to': labels[self.raise_map[(b, k)]], 'index': k, 'op': 'raise'}
                for b in self.elements for k in self.indices if self.raise_map[(b, k)] is not None
            ],
        }


def pattern_crystal(lam: Sequence[int]) -> CrystalGraph:
    lam = check_dominant(lam)
    return CrystalGraph.from_elements([PatternCrystal(p) for p in enumerate_patterns(lam)], len(lam))


def tensor(B1: CrystalGraph, B2: CrystalGraph) -> CrystalGraph:
    if B1.rank != B2.rank:
        raise InputError(f"cannot tensor crystals of rank {B1.rank} and {B2.rank}")
    return CrystalGraph.from_elements([TensorCrystal(b1, b2) for b1 in B1.elements for b2 in B2.elements], B1.rank)


@dataclass
class AxiomReport:
    checked: int = 0
    violations: List[Tuple[str, int, str]] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.violations


def verify_crystal_axioms(B: CrystalGraph) -> AxiomReport:
    """
    Exhaustive check of the crystal axioms on every element and simple root:
    phi - epsilon is the coroot pairing of the weight; raise/lower stay in B, are mutually
    inverse, shift the weight by the simple root and move epsilon/phi by one; epsilon and
    phi are the string lengths.
    """
    report = AxiomReport()
    members = set(B.elements)

    def fail(b, k, what):
        report.violations.append((b.label, k, what))

    for b in B.elements:
        wt = b.weight()
        for k in B.indices:
            report.checked += 1
            eps, ph = B.epsilon[(b, k)], B.phi[(b, k)]
            if ph - eps != wt[k - 1] - wt[k]:
                fail(b, k, f"phi - epsilon = {ph - eps}, weight pairing {wt[k - 1] - wt[k]}")
            for op, inverse, d_eps, step in (('raise', B.lower_map, -1, 1), ('lower', B.raise_map, 1, -1)):
                image = (B.raise_map if op == 'raise' else B.lower_map)[(b, k)]
                if image is None:
                    continue
                if image not in members:
                    fail(b, k, f"{op} leaves the crystal")
                    continue
                if inverse.get((image, k)) != b:
                    fail(b, k, f"{op} is not inverted")
                expected = list(wt)
                expected[k - 1] += step
                expected[k] -= step
                if tuple(expected) != tuple(image.weight()):
                    fail(b, k, f"{op} shifts the weight wrongly")
                if B.epsilon[(image, k)] != eps + d_eps or B.phi[(image, k)] != ph - d_eps:
                    fail(b, k, f"{op} does not move epsilon/phi by one")
            for op_map, expected_len, name in ((B.raise_map, eps, 'epsilon'), (B.lower_map, ph, 'phi')):
                length, current = 0, b
                while length <= len(B.elements):
                    current = op_map.get((current, k))
                    if current is None:
                        break
                    length += 1
                if length != expected_len:
                    fail(b, k, f"{name} = {expected_len} but the string has length {length}")
    if report.violations:
        logger.warning(f"{len(report.violations)} crystal axiom violations, first: {report.violations[0]}")
    return report


def connected_components(B: CrystalGraph) -> List[List[CrystalGraphElement]]:
    seen, components = set(), []
    for start in B.elements:
        if start in seen:
            continue
        component, stack = [], [start]
        seen.add(start)
        while stack:
            b = stack.pop()
            component.append(b)
            for k in B.indices:
                for neighbour in (B.raise_map[(b, k)], B.lower_map[(b, k)]):
                    if neighbour is not None and neighbour not in seen:
                        seen.add(neighbour)
                        stack.append(neighbour)
        components.append(component)
    return components


def highest_weight_elements(B: CrystalGraph) -> List[CrystalGraphElement]:
    return [b for b in B.elements if all(B.raise_map[(b, k)] is None for k in B.indices)]


def to_highest_weight(b: CrystalGraphElement):
    return b.to_highest_weight()


def lowest_pattern(lam: Sequence[int]) -> GTPattern:
    lam = check_dominant(lam)
    n = len(lam)
    return GTPattern(tuple(tuple(lam[n - k:]) for k in range(1, n + 1)))


def _monomial_target(lam: Tuple[int, ...], d) -> GTPattern:
    n = len(lam)
    rows = {n: list(lam)}
    for k in range(n - 1, 0, -1):
        rows[k] = [rows[k + 1][c] + d[k - 1][c - 1] for c in range(1, k + 1)]
    return GTPattern(tuple(tuple(rows[k]) for k in range(1, n + 1)))


def monomial_basis_path(lam: Sequence[int], d: Sequence[Sequence[int]]) -> Optional[Tuple[List[Tuple[int, int]], GTPattern]]:
    """
    Raise sequence of the monomial in raising operators indexed by d, applied to the lowest pattern.

    d[k-1][c-1] = d^(k)_c. Each unit of d^(k)_c applies raises on rows k-c+1, ..., k in that
    order; rows are handled from k = n-1 down to 1 and, inside a row, c from k down to 1.
    Returns (steps, pattern), where steps lists (row, raised entry), or None if a raise dies.
    """
    lam = check_dominant(lam)
    n = len(lam)
    if len(d) != n - 1 or any(len(d[k - 1]) != k for k in range(1, n)):
        raise InputError("d must be a triangle with rows of length 1..n-1")
    if any(x < 0 for r in d for x in r):
        raise InputError("monomial exponents must be nonnegative")
    P = lowest_pattern(lam)
    steps = []
    for k in range(n - 1, 0, -1):
        for c in range(k, 0, -1):
            for _ in range(d[k - 1][c - 1]):
                for row in range(k - c + 1, k + 1):
                    index = stats(P, row).raise_index
                    P = raise_pattern(P, row)
                    if P is None:
                        return None
                    steps.append((row, index))
    target = _monomial_target(lam, d)
    if P != target:
        raise ConsistencyError(f"monomial path ended at {P.label}, expected {target.label}")
    return steps, P


def monomial_exponents(P: GTPattern) -> List[List[int]]:
    """d^(k)_c = lambda^(k)_c - lambda^(k+1)_{c+1}"""
    return [[P.entry(k, c) - P.entry(k + 1, c + 1) for c in range(1, k + 1)] for k in range(1, P.n)]


def pattern_from_monomial_exponents(lam: Sequence[int], d: Sequence[Sequence[int]]) -> Optional[GTPattern]:
    result = monomial_basis_path(lam, d)
    return result[1] if result is not None else None
