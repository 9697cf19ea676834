import json
from fractions import Fraction
from importlib import resources
from itertools import product

import pytest

from bihamlie.catalog import (Catalog, ConstraintViolationError, LieAlgebra, MissingParameterError,
                              UnknownAlgebraError, adjoint, default_catalog, dumps_algebras,
                              load_algebras, lookup, normalize_name, validate)
from bihamlie.expr import Expression, substitute
from bihamlie.linalg import matmul

APPENDIX_A = ["A_{4,1}", "A_{4,2}^{-1}", "A_{4,3}", "A_{4,5}^{-1,-1}", "A_{4,5}^{-1,b}", "A_{4,5}^{a,-1}",
              "A_{4,5}^{a,-a}", "A_{4,6}^{a,0}", "A_{4,7}", "A_{4,9}^{0}", "A_{4,9}^{-1/2}", "A_{4,9}^{1}",
              "A_{4,9}^{b}", "A_{4,11}^{b}", "A_{4,12}", "A_2+A_2", "II+R", "III+R", "VI_0+R", "VII_0+R"]
APPENDIX_B = [f"A_{{6,{n}}}" for n in (1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 15, 16, 17, 18, 19, 20, 24, 25, 26, 27, 28, 31, 32)]


def fr(d):
    return {k: v.as_fraction() for k, v in d.items()}


def test_catalog_contents():
    names = default_catalog().names()
    assert names == APPENDIX_A + APPENDIX_B


def test_lookup_examples():
    assert fr(lookup("A_{4,1}").structure) == {(2, 4, 1): 1, (3, 4, 2): 1}
    assert fr(lookup("A_{6,1}").structure) == {(1, 2, 3): 1, (1, 3, 4): 1, (1, 5, 6): 1}


def test_name_aliases():
    assert lookup("A41").name == "A_{4,1}"
    assert lookup("A_{2}⊕A_{2}").name == "A_2+A_2"
    assert lookup("II \\oplus R").name == "II+R"
    assert normalize_name("A_{6,24}") == normalize_name("a624")


def test_lookup_errors():
    with pytest.raises(UnknownAlgebraError):
        lookup("A_{5,1}")
    with pytest.raises(MissingParameterError):
        lookup("A_{6,18}")
    with pytest.raises(ConstraintViolationError):
        lookup("A_{6,18}", {"a": 0})
    with pytest.raises(ConstraintViolationError):
        lookup("A_{6,5}", {"a": 2})
    assert lookup("A_{6,5}", {"a": -1}).C(2, 3, 6) == Expression.const(-1)


def test_user_algebra_abelian4():
    ab = LieAlgebra("abelian4", 4, {})
    cat = default_catalog().with_algebra(ab)
    alg = cat.lookup("abelian4")
    assert all(not alg.C(i, j, k) for i, j, k in product(range(1, 5), repeat=3))
    assert "abelian4" not in default_catalog()
    rep = adjoint(alg)
    assert all(not v for M in rep.x_mats + rep.y_mats for r in M for v in r)


def test_validate_examples():
    assert validate(lookup("A_{4,1}")) == []
    bad = LieAlgebra("bad", 3, {(1, 2, 3): Expression.const(1), (1, 3, 3): Expression.const(1),
                                (2, 3, 1): Expression.const(1)})
    viol = validate(bad)
    assert viol and all(v.kind == "jacobi" for v in viol)
    # brute-force oracle over all index triples
    def C(i, j, k):
        return bad.C(i, j, k).as_fraction()
    brute = set()
    for i, j, k, s in product(range(1, 4), repeat=4):
        tot = sum(C(i, j, l) * C(l, k, s) + C(j, k, l) * C(l, i, s) + C(k, i, l) * C(l, j, s) for l in range(1, 4))
        if tot:
            brute.add(s)
    assert {v.indices[-1] for v in viol} == brute


def test_validate_reports_antisymmetry_clash():
    obj = {"name": "clash", "dim": 2, "brackets": [[1, 2, 1, "1"], [2, 1, 1, "1"]]}
    from bihamlie.catalog import raw_brackets, _parse_algebra
    alg, raw = _parse_algebra(obj)
    assert any(v.kind == "antisymmetry" for v in validate(alg, raw))


@pytest.mark.parametrize("name", APPENDIX_A + APPENDIX_B)
def test_every_entry_validates_symbolically(name):
    alg = default_catalog().entry(name)
    assert validate(alg) == []


@pytest.mark.parametrize("name,vals", [("A_{6,5}", {"a": 1}), ("A_{6,5}", {"a": -1}),
                                       ("A_{6,10}", {"a": 1}), ("A_{6,10}", {"a": -1}),
                                       ("A_{6,18}", {"a": 3}), ("A_{4,9}^{b}", {"b": Fraction(1, 3)})])
def test_bound_entries_validate(name, vals):
    assert validate(lookup(name, vals)) == []


def test_dimension_evenness_flag():
    odd = LieAlgebra("odd", 3, {}, symplectic=True)
    assert [v.kind for v in validate(odd)] == ["dimension"]


def test_adjoint_a41_examples():
    rep = adjoint(lookup("A_{4,1}"))
    X2 = rep.X(2)
    nz = {(r + 1, c + 1): v for r in range(4) for c in range(4) if (v := X2[r][c])}
    assert nz == {(4, 1): Expression.const(-1)}
    Y1 = rep.Y(1)
    assert Y1[1][3] == Expression.const(-1) and Y1[3][1] == Expression.const(1)
    for r in range(4):
        for c in range(4):
            assert Y1[r][c] == -Y1[c][r]


@pytest.mark.parametrize("name", APPENDIX_A + APPENDIX_B)
def test_adjoint_reproduces_brackets(name):
    alg = default_catalog().entry(name)
    rep = adjoint(alg)
    m = alg.dim
    for i in range(1, m + 1):
        for j in range(1, m + 1):
            for k in range(1, m + 1):
                assert -rep.X(i)[j - 1][k - 1] == alg.C(i, j, k)


@pytest.mark.parametrize("name", APPENDIX_B)
def test_nilpotent_entries_have_nilpotent_adjoints(name):
    alg = default_catalog().entry(name)
    rep = adjoint(alg)
    for M in rep.x_mats:
        P = M
        for _ in range(alg.dim - 1):
            P = matmul(P, M)
        assert all(not v for r in P for v in r)


def test_bundled_file_round_trips_bit_exact():
    text = resources.files("bihamlie").joinpath("data/algebras.json").read_text(encoding="utf-8")
    assert dumps_algebras(load_algebras(text)) == text


def test_single_algebra_round_trip(tmp_path):
    alg = lookup("A_{4,5}^{a,-a}", allow_symbolic=True)
    text = dumps_algebras([alg], single=True)
    path = tmp_path / "alg.json"
    path.write_text(text)
    back = load_algebras(str(path))
    assert dumps_algebras(back, single=True) == text
    assert back[0].structure == alg.structure


def test_symbolic_structure_binds():
    alg = default_catalog().entry("A_{4,5}^{a,-a}")
    assert alg.is_symbolic()
    b = alg.bound({"a": 2})
    assert b.C(2, 4, 2) == Expression.const(2) and b.C(3, 4, 3) == Expression.const(-2)
