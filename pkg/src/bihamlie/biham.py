"""Recursion operator, trace integrals and the Magri-Morosi checks."""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Sequence

from .expr import (Expression, ExpressionError, RationalExpression, evaluate, exact_value,
                   render)
from .linalg import adjugate, det, matmul, rank
from .poisson import BivectorField, poisson_bracket
from .sampling import random_rational

__all__ = [
    "SingularBivectorError",
    "AllPointsSingularError",
    "RecursionOperator",
    "IntegralSet",
    "LenardReport",
    "InvolutionReport",
    "RankResult",
    "invert_bivector",
    "recursion_operator",
    "integrals",
    "vector_field_commutator",
    "nijenhuis_torsion",
    "torsion_check",
    "lenard_check",
    "involution_check",
    "independence_rank",
    "sample_points",
]


class SingularBivectorError(ValueError):
    pass


class AllPointsSingularError(ValueError):
    pass


def _R(v) -> RationalExpression:
    return RationalExpression.lift(v)


def _rmat(num, den) -> list:
    return [[RationalExpression(a, den) for a in row] for row in num]


def invert_bivector(P: BivectorField) -> list:
    """Exact inverse adj(P)/det(P) as a matrix of RationalExpressions."""
    d = det(P.entries)
    if not d:
        raise SingularBivectorError("det P vanishes identically")
    inv = _rmat(adjugate(P.entries), d)
    return inv


class RecursionOperator:
    """N = P' P^{-1}, held as ``num / den`` with one shared denominator (det P)."""

    def __init__(self, num, den: Expression, P: BivectorField, Pprime: BivectorField):
        self.det = den
        # fold a unit determinant into the numerator so entries stay polynomial
        if den.is_unit():
            inv = den.unit_inverse()
            num = [[a * inv for a in row] for row in num]
            den = Expression.const(1)
        self.num = num
        self.den = den
        self.P = P
        self.Pprime = Pprime

    @property
    def dim(self) -> int:
        return len(self.num)

    @property
    def entries(self) -> list:
        return _rmat(self.num, self.den)

    def power_num(self, k: int) -> list:
        out = self.num
        for _ in range(k - 1):
            out = matmul(out, self.num)
        return out

    def check(self) -> bool:
        """N P == P' as a cross-multiplied identity."""
        lhs = matmul(self.num, self.P.entries)
        m = self.dim
        return all(not (lhs[i][j] - self.den * self.Pprime.entries[i][j]) for i in range(m) for j in range(m))

    def apply(self, X: Sequence) -> list:
        """N X for a vector field X (components Expression or RationalExpression)."""
        m = self.dim
        out = []
        for i in range(m):
            acc = RationalExpression(Expression())
            for j in range(m):
                if self.num[i][j] and X[j]:
                    acc = acc + _R(X[j]) * self.num[i][j]
            out.append(RationalExpression(acc.num, acc.den * self.den))
        return out


def recursion_operator(P: BivectorField, Pprime: BivectorField) -> RecursionOperator:
    d = det(P.entries)
    if not d:
        raise SingularBivectorError("det P vanishes identically")
    N = RecursionOperator(matmul(Pprime.entries, adjugate(P.entries)), d, P, Pprime)
    return N


@dataclass
class IntegralSet:
    integrals: list
    k_max: int

    def __len__(self):
        return len(self.integrals)

    def __iter__(self):
        return iter(self.integrals)

    def __getitem__(self, k):
        return self.integrals[k]

    def render(self) -> list[str]:
        return [str(h) for h in self.integrals]


def integrals(N: RecursionOperator, k_max: int | None = None) -> IntegralSet:
    """H_k = Tr(N^k) / (2k) for k = 1..k_max (default m/2)."""
    k_max = N.dim // 2 if k_max is None else k_max
    if k_max < 1:
        raise ValueError("k_max must be at least 1")
    out = []
    Nk = None
    for k in range(1, k_max + 1):
        Nk = N.num if Nk is None else matmul(Nk, N.num)
        tr = Expression()
        for i in range(N.dim):
            tr = tr + Nk[i][i]
        out.append(RationalExpression(tr, N.den ** k * (2 * k)))
    return IntegralSet(out, k_max)


# ---------------------------------------------------------------- vector fields


def _diff(f, i):
    return f.diff(i) if isinstance(f, (Expression, RationalExpression)) else Expression()


def vector_field_commutator(X: Sequence, Y: Sequence) -> list:
    """[X, Y]^mu = X^nu d_nu Y^mu - Y^nu d_nu X^mu."""
    if len(X) != len(Y):
        raise ValueError("vector fields of different dimension")
    m = len(X)
    rational = any(isinstance(c, RationalExpression) for c in list(X) + list(Y))
    out = []
    for mu in range(m):
        acc = RationalExpression(Expression()) if rational else Expression()
        for nu in range(m):
            if X[nu]:
                d = _diff(Y[mu], nu + 1)
                if d:
                    acc = acc + d * X[nu] if rational else acc + X[nu] * d
            if Y[nu]:
                d = _diff(X[mu], nu + 1)
                if d:
                    acc = acc - d * Y[nu] if rational else acc - Y[nu] * d
        out.append(acc)
    return out


def _sub(a, b):
    return [_R(x) - _R(y) for x, y in zip(a, b)]


def nijenhuis_torsion(N: RecursionOperator, X: Sequence, Y: Sequence) -> list:
    """[NX, NY] - N[NX, Y] - N[X, NY] + N^2 [X, Y]."""
    NX, NY = N.apply(X), N.apply(Y)
    t1 = vector_field_commutator(NX, NY)
    t2 = N.apply(vector_field_commutator(NX, [_R(y) for y in Y]))
    t3 = N.apply(vector_field_commutator([_R(x) for x in X], NY))
    t4 = N.apply(N.apply(vector_field_commutator([_R(x) for x in X], [_R(y) for y in Y])))
    return [_R(a) - b - c + d for a, b, c, d in zip(t1, t2, t3, t4)]


def _basis_field(m: int, a: int) -> list:
    return [Expression.const(1) if i == a else Expression() for i in range(m)]


def torsion_check(N: RecursionOperator) -> dict:
    """Torsion on every coordinate basis pair (a < b, 1-based): {pair: ok}."""
    m = N.dim
    out = {}
    for a in range(m):
        for b in range(a + 1, m):
            T = nijenhuis_torsion(N, _basis_field(m, a), _basis_field(m, b))
            out[(a + 1, b + 1)] = all(t.is_zero() for t in T)
    return out


# ---------------------------------------------------------------- chain checks


def _grad(H, m: int) -> list:
    H = _R(H)
    return [H.diff(i) for i in range(1, m + 1)]


def _apply_biv(P: BivectorField, g: Sequence) -> list:
    m = P.dim
    out = []
    for i in range(m):
        acc = RationalExpression(Expression())
        for j in range(m):
            if P.entries[i][j] and g[j]:
                acc = acc + g[j] * P.entries[i][j]
        out.append(acc)
    return out


@dataclass
class LenardReport:
    links: list  # (k, ok, rendered nonzero residual components)

    @property
    def ok(self) -> bool:
        return all(ok for _, ok, _ in self.links)


def lenard_check(P: BivectorField, Pprime: BivectorField, H) -> LenardReport:
    """P' dH_k - P dH_{k+1} for every consecutive pair."""
    m = P.dim
    Hs = list(H)
    links = []
    for k in range(len(Hs) - 1):
        r = _sub(_apply_biv(Pprime, _grad(Hs[k], m)), _apply_biv(P, _grad(Hs[k + 1], m)))
        bad = {mu + 1: str(c) for mu, c in enumerate(r) if not c.is_zero()}
        links.append((k + 1, not bad, bad))
    return LenardReport(links)


@dataclass
class InvolutionReport:
    pairs: dict  # (i, j) -> (ok under P, ok under P')

    @property
    def ok(self) -> bool:
        return all(a and b for a, b in self.pairs.values())


def _bracket_zero(P, f, g) -> bool:
    r = poisson_bracket(P, f, g)
    return r.is_zero() if isinstance(r, RationalExpression) else not r


def involution_check(P: BivectorField, Pprime: BivectorField, H, G=None) -> InvolutionReport:
    """Pairwise brackets of H under both structures (or H against G when given)."""
    Hs = list(H)
    pairs = {}
    if G is None:
        for i in range(len(Hs)):
            for j in range(i + 1, len(Hs)):
                pairs[(i + 1, j + 1)] = (_bracket_zero(P, Hs[i], Hs[j]), _bracket_zero(Pprime, Hs[i], Hs[j]))
    else:
        Gs = list(G)
        for i in range(len(Hs)):
            for j in range(len(Gs)):
                pairs[(i + 1, j + 1)] = (_bracket_zero(P, Hs[i], Gs[j]), _bracket_zero(Pprime, Hs[i], Gs[j]))
    return InvolutionReport(pairs)


# ---------------------------------------------------------------- independence


@dataclass
class RankResult:
    rank: int
    points: list
    exact: bool
    seed: int | None = None


def _symbols_of(H) -> set[str]:
    out = set()
    for h in H:
        h = _R(h)
        out |= h.num.symbols() | h.den.symbols()
    return out


def sample_points(H, m: int, count: int = 5, seed: int = 0, max_tries: int = 1000) -> list:
    """Seeded (point, symbol values) pairs where no denominator of H or dH vanishes."""
    rng = random.Random(seed)
    syms = sorted(_symbols_of(H))
    dens = [_R(h).den for h in H]
    out = []
    tries = 0
    while len(out) < count and tries < max_tries:
        tries += 1
        pt = {i: random_rational(rng) for i in range(1, m + 1)}
        sv = {s: random_rational(rng, nonzero=True) for s in syms}
        try:
            if all(evaluate(d, pt, sv) != 0 for d in dens):
                out.append((pt, sv))
        except (ZeroDivisionError, ExpressionError):
            continue
    if not out:
        raise AllPointsSingularError("no admissible sample point found")
    return out


def _float_rank(rows, tol=1e-9) -> int:
    M = [list(r) for r in rows]
    r = 0
    ncols = len(M[0]) if M else 0
    for c in range(ncols):
        p = max(range(r, len(M)), key=lambda i: abs(M[i][c]), default=None)
        if p is None or abs(M[p][c]) <= tol:
            continue
        M[r], M[p] = M[p], M[r]
        for i in range(r + 1, len(M)):
            f = M[i][c] / M[r][c]
            M[i] = [a - f * b for a, b in zip(M[i], M[r])]
        r += 1
        if r == len(M):
            break
    return r


def independence_rank(H, points: Sequence | None = None, m: int | None = None, seed: int = 0,
                      count: int = 5) -> RankResult:
    """Max over sample points of rank [dH_i]; exact unless a transcendental factor forces floats.

    ``points`` is a list of ``(coordinate point, symbol values)`` pairs or of
    plain coordinate points; when omitted they are drawn with ``sample_points``.
    """
    Hs = [_R(h) for h in H]
    if m is None:
        m = max([max(h.num.coordinates() | h.den.coordinates(), default=0) for h in Hs] + [1])
    if points is None:
        points = sample_points(Hs, m, count, seed)
    else:
        points = [p if isinstance(p, tuple) else (p, {}) for p in points]
    grads = [_grad(h, m) for h in Hs]
    best = 0
    exact = True
    used = []
    for pt, sv in points:
        try:
            rows = [[g.exact_value(pt, sv) for g in gr] for gr in grads]
            r = rank(rows, m)
        except ZeroDivisionError:
            continue
        except ExpressionError:
            exact = False
            try:
                rows = [[g.evaluate(pt, sv) for g in gr] for gr in grads]
            except ZeroDivisionError:
                continue
            r = _float_rank(rows)
        used.append((pt, sv))
        best = max(best, r)
    if not used:
        raise AllPointsSingularError("every sample point hits a singular denominator")
    return RankResult(best, used, exact, seed)
