from fractions import Fraction
from itertools import permutations

from hypothesis import given, settings, strategies as st

from bihamlie.expr import Expression, parse
from bihamlie.linalg import adjugate, det, identity, matmul, nullspace, rank, rref

from conftest import PROPERTY_CASES, small_q


def plain_rref(rows, ncols):
    """Textbook Gauss-Jordan over Fractions, leftmost pivots."""
    M = [[Fraction(v) for v in r] for r in rows]
    pivots = []
    r = 0
    for c in range(ncols):
        p = next((i for i in range(r, len(M)) if M[i][c] != 0), None)
        if p is None:
            continue
        M[r], M[p] = M[p], M[r]
        pv = M[r][c]
        M[r] = [v / pv for v in M[r]]
        for i in range(len(M)):
            if i != r and M[i][c] != 0:
                f = M[i][c]
                M[i] = [a - f * b for a, b in zip(M[i], M[r])]
        pivots.append(c)
        r += 1
    return M[:r], pivots


matrices = st.integers(1, 6).flatmap(
    lambda n: st.lists(st.lists(small_q, min_size=n, max_size=n), min_size=0, max_size=6).map(lambda rows: (rows, n)))


@settings(max_examples=PROPERTY_CASES)
@given(matrices)
def test_rref_matches_plain_elimination(data):
    rows, n = data
    assert rref(rows, n) == plain_rref(rows, n)


@settings(max_examples=PROPERTY_CASES)
@given(matrices)
def test_nullspace_vectors_annihilate(data):
    rows, n = data
    basis = nullspace(rows, n)
    assert len(basis) == n - rank(rows, n)
    for v in basis:
        for r in rows:
            assert sum(a * b for a, b in zip(r, v)) == 0


def test_zero_system_full_nullity():
    assert len(nullspace([[0, 0, 0]], 3)) == 3
    assert len(nullspace([], 4)) == 4


def _leibniz_det(A):
    n = len(A)
    total = Fraction(0)
    for perm in permutations(range(n)):
        inv = sum(1 for i in range(n) for j in range(i + 1, n) if perm[i] > perm[j])
        prod = Fraction(1)
        for i in range(n):
            prod *= A[i][perm[i]]
        total += -prod if inv % 2 else prod
    return total


@settings(max_examples=PROPERTY_CASES)
@given(st.integers(1, 5).flatmap(lambda n: st.lists(st.lists(small_q, min_size=n, max_size=n), min_size=n, max_size=n)))
def test_det_and_adjugate(A):
    E = [[Expression.const(v) for v in r] for r in A]
    d = det(E)
    assert d == Expression.const(_leibniz_det(A))
    n = len(A)
    prod = matmul(E, adjugate(E))
    for i in range(n):
        for j in range(n):
            assert prod[i][j] == (d if i == j else Expression())


def test_symbolic_det():
    P = [[parse(s) for s in r] for r in [["0", "p12"], ["-p12", "0"]]]
    assert det(P) == parse("p12^2")
    assert identity(2)[0][0] == Expression.const(1)
