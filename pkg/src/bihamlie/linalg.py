"""Exact matrix helpers over the expression ring and over the rationals."""

from __future__ import annotations

from fractions import Fraction
from typing import Sequence

from .expr import Expression

__all__ = [
    "zeros",
    "identity",
    "matmul",
    "transpose",
    "mat_add",
    "mat_scale",
    "det",
    "adjugate",
    "rank",
    "nullspace",
    "rref",
    "is_zero_matrix",
]


def zeros(m: int, n: int | None = None, zero=None):
    n = m if n is None else n
    z = Expression() if zero is None else zero
    return [[z for _ in range(n)] for _ in range(m)]


def identity(m: int, one=None, zero=None):
    o = Expression.const(1) if one is None else one
    z = Expression() if zero is None else zero
    return [[o if i == j else z for j in range(m)] for i in range(m)]


def transpose(A):
    return [list(r) for r in zip(*A)]


def matmul(A, B):
    """Product skipping structurally zero entries."""
    n = len(B[0]) if B else 0
    Bt = transpose(B)
    out = []
    for row in A:
        nz = [(k, a) for k, a in enumerate(row) if a]
        new = []
        for j in range(n):
            col = Bt[j]
            acc = None
            for k, a in nz:
                b = col[k]
                if b:
                    t = a * b
                    acc = t if acc is None else acc + t
            new.append(acc if acc is not None else _zero_like(row, col))
        out.append(new)
    return out


def _zero_like(row, col):
    for v in list(row) + list(col):
        return v * 0 if not isinstance(v, (int, Fraction)) else Fraction(0)
    return Expression()


def mat_add(A, B):
    return [[a + b for a, b in zip(ra, rb)] for ra, rb in zip(A, B)]


def mat_scale(A, c):
    return [[a * c for a in r] for r in A]


def is_zero_matrix(A) -> bool:
    return all(not v for r in A for v in r)


def det(A):
    """Determinant by Laplace expansion over column subsets (division free).

    Works over any commutative ring; cost is O(2^n n), fine for n <= 8.
    """
    n = len(A)
    if n == 0:
        return Expression.const(1)
    # f[mask] = det of rows 0..|mask|-1 restricted to the columns in mask
    f = {0: None}
    one = None
    for r in range(n):
        g = {}
        for mask, val in f.items():
            # columns in mask are used; expand row r over columns not in mask
            for c in range(n):
                if mask >> c & 1:
                    continue
                a = A[r][c]
                if not a:
                    continue
                # sign: number of used columns greater than c
                higher = bin(mask >> (c + 1)).count("1")
                term = a if val is None else val * a
                if higher & 1:
                    term = -term
                nm = mask | (1 << c)
                g[nm] = term if nm not in g else g[nm] + term
        f = {k: v for k, v in g.items() if v}
        if not f:
            return A[0][0] * 0
    full = (1 << n) - 1
    return f.get(full, A[0][0] * 0)


def _minor(A, i, j):
    return [row[:j] + row[j + 1:] for k, row in enumerate(A) if k != i]


def adjugate(A):
    """Classical adjoint: adj(A)[j][i] = (-1)^(i+j) det(minor(i, j))."""
    n = len(A)
    if n == 1:
        return [[A[0][0] * 0 + 1]]
    adj = [[None] * n for _ in range(n)]
    for i in range(n):
        for j in range(n):
            c = det(_minor(A, i, j))
            adj[j][i] = -c if (i + j) & 1 else c
    return adj


# ---------------------------------------------------------------- rationals


def rref(rows: Sequence[Sequence[Fraction]], ncols: int):
    """Reduced row echelon form over Q.

    Fraction-free (Bareiss-style integer) elimination is done first on
    rows scaled to integers; the result is then normalized.  Pivots are
    chosen on the leftmost available column, which gives the deterministic
    smallest-index-first pivot order.  Returns ``(R, pivots)``.
    """
    M = []
    for r in rows:
        fr = [Fraction(v) for v in r]
        if len(fr) != ncols:
            raise ValueError("row length mismatch")
        if any(fr):
            lcm = 1
            for v in fr:
                lcm = lcm * v.denominator // _gcd(lcm, v.denominator)
            M.append([int(v * lcm) for v in fr])
    pivots = []
    prev = 1
    r = 0
    nrows = len(M)
    for c in range(ncols):
        if r >= nrows:
            break
        p = next((i for i in range(r, nrows) if M[i][c] != 0), None)
        if p is None:
            continue
        M[r], M[p] = M[p], M[r]
        piv = M[r][c]
        for i in range(nrows):
            if i == r:
                continue
            f = M[i][c]
            if i > r:
                # Bareiss step keeps entries integral
                M[i] = [(piv * M[i][k] - f * M[r][k]) // prev for k in range(ncols)]
            elif f:
                M[i] = [piv * M[i][k] - f * M[r][k] for k in range(ncols)]
        prev = piv
        pivots.append(c)
        r += 1
    R = []
    for i, c in enumerate(pivots):
        piv = M[i][c]
        R.append([Fraction(v, piv) for v in M[i]])
    return R, pivots


def _gcd(a, b):
    while b:
        a, b = b, a % b
    return abs(a)


def rank(rows, ncols: int) -> int:
    return len(rref(rows, ncols)[1])


def nullspace(rows, ncols: int) -> list[list[Fraction]]:
    """Basis of {v : rows . v = 0}, one vector per free column (ascending)."""
    R, pivots = rref(rows, ncols)
    free = [c for c in range(ncols) if c not in set(pivots)]
    basis = []
    for f in free:
        v = [Fraction(0)] * ncols
        v[f] = Fraction(1)
        for i, c in enumerate(pivots):
            v[c] = -R[i][f]
        basis.append(v)
    return basis
