"""Vielbeins on a Lie group in exponential coordinates of the second kind.

For ``g = exp(x1 X1) ... exp(xm Xm)`` the Maurer-Cartan form is
``g^{-1} dg = E[a][mu] X_mu dx_a`` where row ``a`` of ``E`` is the basis row
``e_a`` pushed through ``exp(x_j ad_j)`` for ``j > a``.  ``E`` is the
``frame`` of :class:`VielbeinMatrix`; ``dual`` is its exact inverse.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import factorial
from typing import Sequence

from .catalog import LieAlgebra, adjoint
from .expr import Expression, partial, render
from .linalg import adjugate, det, identity, matmul

__all__ = [
    "UnsupportedSpectrumError",
    "NonConstantStructureError",
    "VielbeinMatrix",
    "charpoly",
    "eigenvalues",
    "matrix_exponential",
    "compute_vielbein",
    "recover_structure_constants",
    "invert_unit_det",
    "at_origin",
    "row_structure_constants",
    "structure_round_trip",
]


class UnsupportedSpectrumError(ValueError):
    """Characteristic polynomial has a factor outside the supported spectra."""

    def __init__(self, factor: str, msg: str | None = None):
        super().__init__(msg or f"unsupported spectrum: irreducible factor {factor}")
        self.factor = factor


class NonConstantStructureError(ValueError):
    pass


# ---------------------------------------------------------------- polynomials


def charpoly(A: Sequence[Sequence[Fraction]]) -> list[Fraction]:
    """Coefficients ``[1, c1, ..., cn]`` of det(sI - A) (Faddeev-LeVerrier)."""
    n = len(A)
    A = [[Fraction(v) for v in r] for r in A]
    coeffs = [Fraction(1)]
    M = [[Fraction(0)] * n for _ in range(n)]
    for k in range(1, n + 1):
        # M_k = A M_{k-1} + c_{k-1} I
        AM = [[sum(A[i][l] * M[l][j] for l in range(n)) for j in range(n)] for i in range(n)]
        M = [[AM[i][j] + (coeffs[-1] if i == j else 0) for j in range(n)] for i in range(n)]
        AM = [[sum(A[i][l] * M[l][j] for l in range(n)) for j in range(n)] for i in range(n)]
        coeffs.append(-sum(AM[i][i] for i in range(n)) / k)
    return coeffs


def _poly_str(p: Sequence[Fraction], var: str = "s") -> str:
    n = len(p) - 1
    e = Expression()
    for k, c in enumerate(p):
        e = e + Expression.symbol(var, n - k) * c if n - k else e + c
    return render(e)


def _divide(p, q):
    """Exact division p/q; returns (quotient, remainder) as coefficient lists."""
    p = list(p)
    out = []
    while len(p) >= len(q):
        f = p[0] / q[0]
        out.append(f)
        for i in range(len(q)):
            p[i] -= f * q[i]
        p.pop(0)
    return out, p


def _rational_roots(p):
    from math import gcd

    den = 1
    for c in p:
        den = den * c.denominator // gcd(den, c.denominator)
    ip = [int(c * den) for c in p]
    while ip and ip[-1] == 0:
        # root 0
        ip.pop()
    roots = [Fraction(0)] * (len(p) - len(ip))
    if len(ip) <= 1:
        return roots
    lead, const = abs(ip[0]), abs(ip[-1])

    def divisors(n):
        return [d for d in range(1, n + 1) if n % d == 0]

    cands = sorted({Fraction(s * a, b) for a in divisors(const) for b in divisors(lead) for s in (1, -1)})
    q = [Fraction(c) for c in ip]
    for r in cands:
        while len(q) > 1:
            quo, rem = _divide(q, [Fraction(1), -r])
            if any(rem):
                break
            roots.append(r)
            q = quo
    return roots


def _numeric_roots(p):
    n = len(p) - 1
    c = [complex(v) / complex(p[0]) for v in p]
    z = [complex(0.4, 0.9) ** k for k in range(n)]
    for _ in range(500):
        new = []
        for i in range(n):
            num = 0j
            for a in c:
                num = num * z[i] + a
            den = 1 + 0j
            for j in range(n):
                if j != i:
                    den *= z[i] - z[j]
            new.append(z[i] - num / den if den else z[i])
        if max(abs(a - b) for a, b in zip(new, z)) < 1e-14:
            z = new
            break
        z = new
    return z


def eigenvalues(A) -> list[tuple[Fraction, Fraction]]:
    """Eigenvalues as ``(re, im)`` rationals with multiplicity.

    Rational roots are found by the rational root theorem; remaining factors
    must split into quadratics ``(s - l)^2 + mu^2`` with rational ``l, mu``.
    """
    p = charpoly(A)
    out = [(r, Fraction(0)) for r in _rational_roots(p)]
    rest = p
    for r, _ in out:
        rest, _ = _divide(rest, [Fraction(1), -r])
    while len(rest) > 1:
        if len(rest) == 2:
            raise UnsupportedSpectrumError(_poly_str(rest))
        found = False
        for z in _numeric_roots(rest):
            if abs(z.imag) < 1e-9:
                continue
            lam = Fraction(z.real).limit_denominator(1000)
            mu = Fraction(abs(z.imag)).limit_denominator(1000)
            quad = [Fraction(1), -2 * lam, lam * lam + mu * mu]
            quo, rem = _divide(rest, quad)
            if not any(rem):
                out += [(lam, mu), (lam, -mu)]
                rest = quo
                found = True
                break
        if not found:
            raise UnsupportedSpectrumError(_poly_str(rest))
    return out


# ---------------------------------------------------------------- Gaussian rationals


class _CQ:
    __slots__ = ("re", "im")

    def __init__(self, re, im=0):
        self.re = Fraction(re)
        self.im = Fraction(im)

    def __add__(self, o):
        o = o if isinstance(o, _CQ) else _CQ(o)
        return _CQ(self.re + o.re, self.im + o.im)

    __radd__ = __add__

    def __neg__(self):
        return _CQ(-self.re, -self.im)

    def __sub__(self, o):
        return self + (-(o if isinstance(o, _CQ) else _CQ(o)))

    def __mul__(self, o):
        o = o if isinstance(o, _CQ) else _CQ(o)
        return _CQ(self.re * o.re - self.im * o.im, self.re * o.im + self.im * o.re)

    __rmul__ = __mul__

    def inv(self):
        d = self.re * self.re + self.im * self.im
        return _CQ(self.re / d, -self.im / d)

    def __bool__(self):
        return bool(self.re) or bool(self.im)

    def key(self):
        return (self.re, self.im)


def _integrate_shift(r: dict, lam: _CQ) -> dict:
    """e^{lam t} * int_0^t e^{-lam s} r(s) ds for r = {(p, alpha): c}."""
    out: dict = {}

    def put(p, alpha, c):
        k = (p, alpha)
        v = out.get(k)
        out[k] = c if v is None else v + c

    for (p, alpha), c in r.items():
        beta = _CQ(*alpha) - lam
        if not beta:
            put(p + 1, alpha, c * _CQ(Fraction(1, p + 1)))
            continue
        binv = beta.inv()
        # int_0^t s^p e^{beta s} ds = e^{beta t} sum_j (-1)^j p!/(p-j)! t^{p-j} / beta^{j+1}
        #                             - (-1)^p p! / beta^{p+1}
        bpow = binv
        for j in range(p + 1):
            f = Fraction((-1) ** j * factorial(p), factorial(p - j))
            put(p - j, alpha, c * bpow * _CQ(f))
            if j < p:
                bpow = bpow * binv
        put(0, lam.key(), c * bpow * _CQ(-((-1) ** p) * factorial(p)))
    return {k: v for k, v in out.items() if v}


def _real_expression(funcs: dict, t: int) -> tuple[Expression, Expression]:
    """Real and imaginary parts of sum c t^p e^{(l + i mu) t} as Expressions."""
    re_part = Expression()
    im_part = Expression()
    for (p, (lam, mu)), c in funcs.items():
        base = Expression.coord(t, p) * Expression.exp(t, lam)
        if mu == 0:
            re_part = re_part + base * c.re
            im_part = im_part + base * c.im
        else:
            cs, sn = Expression.cos(t, mu), Expression.sin(t, mu)
            re_part = re_part + base * (cs * c.re - sn * c.im)
            im_part = im_part + base * (sn * c.re + cs * c.im)
    return re_part, im_part


def _is_nilpotent(A) -> list | None:
    """Powers [I, A, A^2, ...] up to the last nonzero one, or None."""
    n = len(A)
    powers = [identity(n)]
    P = A
    for _ in range(n):
        if all(not v for r in P for v in r):
            return powers
        powers.append(P)
        P = matmul(P, A)
    return powers if all(not v for r in P for v in r) else None


def matrix_exponential(A, t: int):
    """Exact ``exp(x_t A)`` as a matrix of Expressions.

    Nilpotent matrices (possibly with parameter entries) use the terminating
    series.  Other matrices must be rational with spectrum in ``Q + iQ``;
    they go through Putzer's algorithm.
    """
    n = len(A)
    A = [[v if isinstance(v, Expression) else Expression.const(v) for v in r] for r in A]
    pw = _is_nilpotent(A)
    if pw is not None:
        out = [[Expression() for _ in range(n)] for _ in range(n)]
        for k, P in enumerate(pw):
            f = Expression.coord(t, k) * Fraction(1, factorial(k))
            for i in range(n):
                for j in range(n):
                    if P[i][j]:
                        out[i][j] = out[i][j] + P[i][j] * f
        return out
    if not all(v.is_rational() for r in A for v in r):
        raise UnsupportedSpectrumError("symbolic", "non-nilpotent matrix with symbolic entries; bind the parameters")
    Q = [[v.as_fraction() for v in r] for r in A]
    eig = eigenvalues(Q)
    # Putzer: exp(tA) = sum_k r_{k+1}(t) P_k
    Pk = [[_CQ(1 if i == j else 0) for j in range(n)] for i in range(n)]
    lam0 = _CQ(*eig[0])
    r = {(0, lam0.key()): _CQ(1)}
    acc_re = [[Expression() for _ in range(n)] for _ in range(n)]
    acc_im = [[Expression() for _ in range(n)] for _ in range(n)]
    for k in range(n):
        if k > 0:
            # P_k = P_{k-1} (A - lam_k I)
            lam_prev = _CQ(*eig[k - 1])
            Pk = [
                [
                    sum((Pk[i][l] * _CQ(Q[l][j]) for l in range(n)), _CQ(0)) - Pk[i][j] * lam_prev
                    for j in range(n)
                ]
                for i in range(n)
            ]
            r = _integrate_shift(r, _CQ(*eig[k]))
        for i in range(n):
            for j in range(n):
                c = Pk[i][j]
                if not c:
                    continue
                scaled = {key: v * c for key, v in r.items()}
                re, im = _real_expression(scaled, t)
                acc_re[i][j] = acc_re[i][j] + re
                acc_im[i][j] = acc_im[i][j] + im
    if any(v for row in acc_im for v in row):
        raise ArithmeticError("imaginary part did not cancel in matrix exponential")
    return acc_re


# ---------------------------------------------------------------- vielbein


@dataclass(frozen=True)
class VielbeinMatrix:
    """``frame[a][mu]`` is the coefficient of ``X_mu dx_a`` in g^{-1}dg; ``dual`` its inverse."""

    frame: list
    dual: list
    algebra: LieAlgebra | None = None

    @property
    def dim(self) -> int:
        return len(self.frame)

    def check(self) -> list[str]:
        """Invariant problems (empty when the vielbein is sound)."""
        m = self.dim
        problems = []
        I = identity(m)
        if matmul(self.frame, self.dual) != I:
            problems.append("frame*dual != I")
        if matmul(self.dual, self.frame) != I:
            problems.append("dual*frame != I")
        d = det(self.frame)
        if not d.is_unit() or d.symbols():
            problems.append(f"det(frame) = {render(d)} is not a rational exponential unit")
        for name, M in (("frame", self.frame), ("dual", self.dual)):
            for i in range(m):
                for j in range(m):
                    if at_origin(M[i][j]) != (1 if i == j else 0):
                        problems.append(f"{name}(0)[{i + 1},{j + 1}] != delta")
        return problems

    def is_polynomial(self) -> bool:
        return all(v.is_polynomial_in_x() for r in self.frame for v in r)


def at_origin(e: Expression) -> Expression:
    """Value at x = 0 (parameters stay symbolic)."""
    out = Expression()
    for ((mono, _, trig), params), c in e.terms.items():
        if mono or any(kind == "s" for _, kind, _ in trig):
            continue
        out = out + Expression({(((), (), ()), params): c})
    return out


def invert_unit_det(M):
    """Inverse of a matrix whose determinant is a unit of the ring."""
    d = det(M)
    if not d.is_unit():
        raise ValueError(f"determinant {render(d)} is not a unit")
    inv = d.unit_inverse()
    return [[v * inv for v in r] for r in adjugate(M)]


def compute_vielbein(alg: LieAlgebra) -> VielbeinMatrix:
    m = alg.dim
    ad = adjoint(alg)
    exps = {}
    for j in range(2, m + 1):
        X = ad.X(j)
        if any(v for r in X for v in r):
            exps[j] = matrix_exponential(X, j)
    frame = []
    for a in range(1, m + 1):
        row = [Expression.const(1 if k == a else 0) for k in range(1, m + 1)]
        for j in range(a + 1, m + 1):
            if j in exps:
                row = matmul([row], exps[j])[0]
        frame.append(row)
    return VielbeinMatrix(frame, invert_unit_det(frame), alg)


def recover_structure_constants(v: VielbeinMatrix) -> dict[tuple[int, int, int], Fraction]:
    """Structure constants from the commutators of the left-invariant fields.

    The left-invariant vector fields are ``xi_i = dual[i][mu] d_mu`` and the
    coframe is ``theta^k = frame[nu][k] dx_nu``; then
    ``C_ij^k = theta^k_nu (xi_i^mu d_mu xi_j^nu - xi_j^mu d_mu xi_i^nu)``.
    Returns ``{(i, j, k): C}`` over ``i < j`` with nonzero values.
    """
    m = v.dim
    xi = v.dual
    th = v.frame
    d = [[[partial(xi[i][nu], mu + 1) for mu in range(m)] for nu in range(m)] for i in range(m)]
    out = {}
    for i in range(m):
        for j in range(i + 1, m):
            comm = []
            for nu in range(m):
                s = Expression()
                for mu in range(m):
                    if xi[i][mu]:
                        s = s + xi[i][mu] * d[j][nu][mu]
                    if xi[j][mu]:
                        s = s - xi[j][mu] * d[i][nu][mu]
                comm.append(s)
            for k in range(m):
                c = Expression()
                for nu in range(m):
                    if comm[nu] and th[nu][k]:
                        c = c + th[nu][k] * comm[nu]
                if not c.is_constant():
                    raise NonConstantStructureError(
                        f"C_{{{i + 1}{j + 1}}}^{k + 1} = {render(c)} depends on coordinates"
                    )
                if c:
                    out[(i + 1, j + 1, k + 1)] = c if c.symbols() else c.as_fraction()
    return out


def row_structure_constants(v: VielbeinMatrix) -> dict:
    """Commutator constants of the rows of ``frame`` read as vector fields.

    These close (with the sign of the constants reversed) only for some
    groups; NonConstantStructureError signals that they do not.
    """
    return recover_structure_constants(VielbeinMatrix(v.dual, v.frame, v.algebra))


def structure_round_trip(v: VielbeinMatrix) -> bool:
    """True when the recovered constants equal the algebra's, entry by entry."""
    rec = recover_structure_constants(v)
    want = {k: c for k, c in v.algebra.structure.items() if c}
    if set(rec) != set(want):
        return False
    return all(Expression.const(0) + rec[k] == want[k] for k in want)
