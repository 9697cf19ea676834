from fractions import Fraction

import pytest
from hypothesis import HealthCheck, settings, strategies as st

from bihamlie.expr import Expression

settings.register_profile(
    "bihamlie",
    max_examples=200,
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("bihamlie")

PROPERTY_CASES = 200

small_q = st.builds(Fraction, st.integers(-9, 9), st.integers(1, 9))
nonzero_q = small_q.filter(bool)


@st.composite
def terms(draw, coords=(1, 2, 3, 4), symbols=("p", "q"), transcendental=True):
    e = Expression.const(draw(nonzero_q))
    for i in coords:
        n = draw(st.integers(0, 2))
        if n:
            e = e * Expression.coord(i, n)
    for s in symbols:
        k = draw(st.sampled_from([0, 0, 1, 2, -1]))
        if k:
            e = e * Expression.symbol(s, k)
    if transcendental:
        if draw(st.booleans()):
            e = e * Expression.exp(draw(st.sampled_from(coords)), draw(st.sampled_from([-1, 1, 2, Fraction(1, 2)])))
        if draw(st.booleans()):
            kind = draw(st.sampled_from(["sin", "cos"]))
            i = draw(st.sampled_from(coords))
            mu = draw(st.sampled_from([1, 2, Fraction(1, 2)]))
            e = e * getattr(Expression, kind)(i, mu)
    return e


@st.composite
def expressions(draw, max_terms=6, **kw):
    out = Expression()
    for t in draw(st.lists(terms(**kw), min_size=0, max_size=max_terms)):
        out = out + t
    return out


points = st.fixed_dictionaries({i: st.floats(-1.5, 1.5) for i in (1, 2, 3, 4)})
SYMS = {"p": 1.3, "q": -0.7}


@pytest.fixture(scope="session")
def tables():
    from bihamlie.tables import load_tables
    return load_tables()


# one line per acceptance criterion, printed after the run
ACCEPTANCE: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE:
            terminalreporter.write_line(line)
