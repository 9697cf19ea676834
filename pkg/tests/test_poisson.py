import random
from fractions import Fraction
from itertools import combinations

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bihamlie.catalog import LieAlgebra, lookup
from bihamlie.expr import Expression, evaluate, parse, partial
from bihamlie.poisson import (BivectorField, DimensionError, bivector_from_frame, check_compatibility,
                              frame_components, jacobi_sum, mixed_frame_form, mixed_schouten,
                              poisson_bracket, schouten)
from bihamlie.tables import load_tables, table_row
from bihamlie.vielbein import compute_vielbein

from conftest import PROPERTY_CASES

x = Expression.coord
F = Fraction


def biv(m, upper):
    return BivectorField.from_upper(m, {k: parse(v) if isinstance(v, str) else v for k, v in upper.items()})


def oracle_bracket(P, Q, lam, mu, nu, pt, syms=None):
    """Hand-expanded six-term mixed bracket evaluated numerically (0-based indices)."""
    m = P.dim
    p, q = P.entries, Q.entries

    def ev(e):
        return evaluate(e, pt, syms or {})

    s = 0.0
    for r in range(m):
        for A, B in ((p, q), (q, p)):
            s += ev(A[r][lam]) * ev(partial(B[mu][nu], r + 1))
            s += ev(A[r][mu]) * ev(partial(B[nu][lam], r + 1))
            s += ev(A[r][nu]) * ev(partial(B[lam][mu], r + 1))
    return s


def rand_point(rng, m):
    return {i: rng.uniform(-2, 2) for i in range(1, m + 1)}


# -------------------------------------------------------------- bivector_from_frame


def test_frame_a41_display():
    row = table_row("A_{4,1}")
    P, _ = row.bivectors()
    assert P[1, 2] == parse("p12 + p23*x4^2/2")
    assert P[1, 3] == parse("p23*x4")


def test_frame_a69_display():
    row = table_row("A_{6,9}")
    P, _ = row.bivectors()
    assert P[3, 4] == parse("p14*x2")
    assert P[4, 6] == parse("p46 + p14*x2^2/2 - p14*x5")


def test_frame_identity_vielbein():
    v = compute_vielbein(LieAlgebra("abelian4", 4, {}))
    assert v.frame == [[Fraction(int(i == j)) for j in range(4)] for i in range(4)]
    Pf = biv(4, {(1, 2): "p12", (3, 4): "p34 + x1"})
    assert bivector_from_frame(Pf, v) == Pf


def test_frame_dimension_mismatch():
    v = compute_vielbein(lookup("A_{4,1}"))
    with pytest.raises(DimensionError):
        bivector_from_frame(biv(3, {(1, 2): "1"}), v)
    with pytest.raises(DimensionError):
        schouten(biv(3, {(1, 2): "1"}), biv(4, {(1, 2): "1"}))


def test_bivector_rejects_non_antisymmetric():
    with pytest.raises(ValueError):
        BivectorField([[0, 1], [1, 0]])
    with pytest.raises(ValueError):
        BivectorField([[1, 0], [0, 0]])


def test_frame_bivector_matches_oracle_a624():
    row = table_row("A_{6,24}")
    v = row.vielbein()
    P, _ = row.bivectors()
    Pf = row.frame_P()
    rng = random.Random(3)
    syms = {"p13": 1.3, "p25": -0.4, "p46": 2.1}
    for _ in range(3):
        pt = rand_point(rng, 6)
        E = [[evaluate(e, pt, syms) for e in r] for r in v.frame]
        pf = [[evaluate(e, pt, syms) for e in r] for r in Pf]
        for mu in range(6):
            for nu in range(6):
                want = sum(E[i][mu] * E[j][nu] * pf[i][j] for i in range(6) for j in range(6))
                assert abs(evaluate(P.entries[mu][nu], pt, syms) - want) < 1e-9


# -------------------------------------------------------------- schouten


def test_constant_on_abelian_is_zero():
    P = biv(4, {(1, 2): "p12", (1, 4): "p14", (2, 3): "p23"})
    assert schouten(P, P).is_zero()


def test_a41_table_pair_is_poisson():
    P, Q = table_row("A_{4,1}").bivectors()
    assert schouten(P, P).is_zero()


def test_dim3_fixture_in_dim4():
    # P^{12} = x3 only differentiates in direction 3, which meets P^{33} = 0
    P = biv(4, {(1, 2): "x3", (1, 3): "1", (2, 3): "1"})
    T = schouten(P, P)
    rng = random.Random(5)
    for _ in range(5):
        pt = rand_point(rng, 4)
        for a, b, c in combinations(range(4), 3):
            assert abs(oracle_bracket(P, P, a, b, c, pt) / 2 - evaluate(T[(a + 1, b + 1, c + 1)], pt)) < 1e-12
    assert T.is_zero()


def test_nonzero_schouten_against_oracle():
    P = biv(4, {(1, 2): "x3", (3, 4): "1", (1, 3): "1"})
    T = schouten(P, P)
    assert T.nonzero() and (1, 2, 4) in T.nonzero()
    rng = random.Random(7)
    for _ in range(5):
        pt = rand_point(rng, 4)
        for a, b, c in combinations(range(4), 3):
            assert abs(oracle_bracket(P, P, a, b, c, pt) / 2 - evaluate(T[(a + 1, b + 1, c + 1)], pt)) < 1e-12


def test_trivector_antisymmetry():
    P = biv(4, {(1, 2): "x3", (3, 4): "x1", (2, 4): "x2*x3"})
    T = schouten(P, P)
    assert T[(1, 2, 4)] == -T[(2, 1, 4)] == T[(2, 4, 1)] == -T[(4, 2, 1)]
    assert not T[(1, 1, 2)]


def test_mixed_equals_twice_threeterm_on_equal_arguments():
    P = biv(4, {(1, 2): "x3*x4", (1, 3): "x2", (2, 4): "1+x1"})
    S, M = schouten(P, P), mixed_schouten(P, P)
    for k in combinations(range(1, 5), 3):
        assert M[k] == S[k] * 2


# -------------------------------------------------------------- poisson bracket


def test_coordinate_brackets():
    P = biv(4, {(1, 2): "x3", (2, 4): "p24"})
    for a in range(1, 5):
        for b in range(1, 5):
            assert poisson_bracket(P, x(a), x(b)) == P[a, b]


def test_a61_x2_x3():
    P, _ = table_row("A_{6,1}").bivectors()
    assert poisson_bracket(P, x(2), x(3)) == parse("p23")


def test_bracket_strings_and_self():
    P = biv(3, {(1, 2): "x3", (2, 3): "1"})
    assert poisson_bracket(P, "x1", "x2") == x(3)
    f = parse("x1*x2 + sin(x3)")
    assert not poisson_bracket(P, f, f)


# -------------------------------------------------------------- compatibility


def test_a43_pair_compatible():
    assert check_compatibility(*table_row("A_{4,3}").bivectors()).ok


def test_trivial_pair_on_abelian():
    P = biv(4, {(1, 2): "1", (3, 4): "2"})
    rep = check_compatibility(P, P)
    assert rep.ok and rep.failures() == {}


@pytest.mark.parametrize("name", [r.name for r in load_tables()])
def test_every_table_pair_compatible(name):
    rep = check_compatibility(*table_row(name).bivectors())
    assert rep.status == {"[P,P]": True, "[P',P']": True, "[P,P']": True}


def test_a41_sign_flip_breaks_mixed_bracket():
    row = table_row("A_{4,1}")
    v = row.vielbein()
    P = bivector_from_frame(row.frame_P(), v)
    bad = dict(row.Pprime)
    bad[(1, 3)] = parse("pp13 - a44*x3")
    Q = bivector_from_frame(BivectorField.from_upper(4, bad).entries, v)
    rep = check_compatibility(P, Q)
    assert not rep.status["[P,P']"]
    assert "[P,P']" in rep.failures()
    rng = random.Random(11)
    syms = {s: rng.uniform(0.5, 2) for s in row.symbols()}
    hit = False
    for _ in range(10):
        pt = rand_point(rng, 4)
        for a, b, c in combinations(range(4), 3):
            o = oracle_bracket(P, Q, a, b, c, pt, syms)
            assert abs(o - evaluate(rep.PQ[(a + 1, b + 1, c + 1)], pt, syms)) < 1e-8
            hit |= abs(o) > 1e-6
    assert hit


# -------------------------------------------------------------- frame form


@pytest.mark.parametrize("name,params", [("A_{4,1}", {}), ("A_{4,12}", {}), ("A_{4,6}^{a,0}", {"a": 2}),
                                         ("A_{6,1}", {}), ("A_{6,24}", {}), ("A_{6,27}", {})])
def test_frame_form_matches_coordinate_bracket(name, params):
    alg = lookup(name, params)
    v = compute_vielbein(alg)
    m = alg.dim
    rng = random.Random(len(name))
    up = {(i, j): Fraction(rng.randint(-3, 3)) for i in range(1, m + 1) for j in range(i + 1, m + 1)}
    uq = {(i, j): x(rng.randint(1, m)) * rng.randint(-2, 2) + rng.randint(-2, 2)
          for i in range(1, m + 1) for j in range(i + 1, m + 1)}
    Pf, Qf = BivectorField.from_upper(m, up), BivectorField.from_upper(m, uq)
    T = mixed_schouten(bivector_from_frame(Pf, v), bivector_from_frame(Qf, v))
    direct = frame_components(T, v)
    via = mixed_frame_form(alg, v, Pf, Qf)
    for k in combinations(range(1, m + 1), 3):
        assert direct[k] == via[k], k


def test_frame_form_rejects_nonclosing_rows():
    alg = lookup("A_{6,9}")
    v = compute_vielbein(alg)
    with pytest.raises(ValueError):
        mixed_frame_form(alg, v, table_row("A_{6,9}").frame_P(), table_row("A_{6,9}").frame_Pprime())


# -------------------------------------------------------------- properties

coef = st.fractions(min_value=-3, max_value=3, max_denominator=3)


def poly_bivector(m):
    """Each upper entry is c0 + c1*x_i + c2*x_j*x_k, decoded from one flat integer list."""
    n = m * (m - 1) // 2

    def build(code):
        up, it = {}, iter(code)
        for i in range(1, m + 1):
            for j in range(i + 1, m + 1):
                c0, c1, i1, c2, j1, k1 = (next(it) for _ in range(6))
                up[(i, j)] = (Expression.const(F(c0, 2)) + x(i1 % m + 1) * c1
                              + x(j1 % m + 1) * x(k1 % m + 1) * c2)
        return BivectorField.from_upper(m, up)

    return st.lists(st.integers(-3, 3), min_size=6 * n, max_size=6 * n).map(build)


@settings(max_examples=PROPERTY_CASES, deadline=None)
@given(poly_bivector(3), st.permutations([1, 2, 3]))
def test_jacobi_schouten_equivalence(P, perm):
    a, b, c = perm
    J = jacobi_sum(P, x(a), x(b), x(c))
    assert J == -schouten(P, P)[(a, b, c)]


@settings(max_examples=PROPERTY_CASES, deadline=None)
@given(poly_bivector(4), poly_bivector(4))
def test_mixed_symmetry(P, Q):
    assert mixed_schouten(P, Q).components == mixed_schouten(Q, P).components


@settings(max_examples=PROPERTY_CASES, deadline=None)
@given(poly_bivector(3), poly_bivector(3), poly_bivector(3), coef, coef)
def test_mixed_bilinearity(P, Q1, Q2, a, b):
    lhs = mixed_schouten(P, Q1.scale(a) + Q2.scale(b))
    r1, r2 = mixed_schouten(P, Q1), mixed_schouten(P, Q2)
    for k in combinations(range(1, 4), 3):
        assert lhs[k] == r1[k] * a + r2[k] * b
