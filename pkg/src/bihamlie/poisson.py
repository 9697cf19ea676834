"""Bivector fields, Schouten brackets and Poisson brackets on the group."""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations

from .catalog import LieAlgebra, adjoint
from .expr import Expression, RationalExpression, parse, partial, render
from .vielbein import NonConstantStructureError, VielbeinMatrix, row_structure_constants

__all__ = [
    "DimensionError",
    "BivectorField",
    "TrivectorField",
    "CompatibilityReport",
    "bivector_from_frame",
    "antisymmetric",
    "schouten",
    "mixed_schouten",
    "poisson_bracket",
    "check_compatibility",
    "jacobi_sum",
    "frame_components",
    "mixed_frame_form",
]


class DimensionError(ValueError):
    pass


def _E(v) -> Expression:
    if isinstance(v, Expression):
        return v
    if isinstance(v, str):
        return parse(v)
    return Expression.const(v)


def antisymmetric(m: int, upper: dict) -> list:
    """m x m antisymmetric matrix from ``{(i, j): value}`` (1-based, i < j)."""
    M = [[Expression() for _ in range(m)] for _ in range(m)]
    for (i, j), v in upper.items():
        if i == j:
            raise ValueError("diagonal entry in antisymmetric data")
        if i > j:
            i, j, v = j, i, -_E(v)
        e = _E(v)
        M[i - 1][j - 1] = e
        M[j - 1][i - 1] = -e
    return M


class BivectorField:
    """Antisymmetric matrix of Expressions ``P^{mu nu}`` (0-based storage)."""

    __slots__ = ("entries", "dim")

    def __init__(self, entries):
        m = len(entries)
        rows = [[_E(v) for v in r] for r in entries]
        if any(len(r) != m for r in rows):
            raise DimensionError("bivector must be square")
        for i in range(m):
            if rows[i][i]:
                raise ValueError(f"diagonal entry ({i + 1},{i + 1}) is nonzero")
            for j in range(i + 1, m):
                if rows[i][j] != -rows[j][i]:
                    raise ValueError(f"entries ({i + 1},{j + 1}) and ({j + 1},{i + 1}) are not antisymmetric")
        self.entries = rows
        self.dim = m

    @classmethod
    def from_upper(cls, m: int, upper: dict) -> "BivectorField":
        return cls(antisymmetric(m, upper))

    def __getitem__(self, ij):
        i, j = ij
        return self.entries[i - 1][j - 1]

    def upper(self) -> dict:
        return {
            (i + 1, j + 1): self.entries[i][j]
            for i in range(self.dim)
            for j in range(i + 1, self.dim)
            if self.entries[i][j]
        }

    def __eq__(self, other):
        return isinstance(other, BivectorField) and self.entries == other.entries

    def __add__(self, other):
        return BivectorField([[a + b for a, b in zip(r, s)] for r, s in zip(self.entries, other.entries)])

    def scale(self, c) -> "BivectorField":
        return BivectorField([[a * c for a in r] for r in self.entries])

    def render(self) -> dict:
        return {f"{i},{j}": render(v) for (i, j), v in sorted(self.upper().items())}


@dataclass
class TrivectorField:
    """Totally antisymmetric 3-tensor stored on strictly increasing triples (1-based)."""

    dim: int
    components: dict = field(default_factory=dict)

    def __getitem__(self, idx):
        a, b, c = idx
        if len({a, b, c}) < 3:
            return Expression()
        order = sorted((a, b, c))
        # parity of the permutation taking (a, b, c) to sorted order
        perm = [order.index(x) for x in (a, b, c)]
        inv = sum(1 for i in range(3) for j in range(i + 1, 3) if perm[i] > perm[j])
        v = self.components.get(tuple(order), Expression())
        return -v if inv & 1 else v

    def is_zero(self) -> bool:
        return not any(self.components.values())

    def nonzero(self) -> dict:
        return {k: v for k, v in sorted(self.components.items()) if v}

    def minimal_residual(self):
        """The nonzero component with the fewest terms, as ``(triple, Expression)``."""
        nz = self.nonzero()
        if not nz:
            return None
        return min(nz.items(), key=lambda kv: (len(kv[1]), kv[0]))

    def render(self) -> dict:
        return {",".join(map(str, k)): render(v) for k, v in self.nonzero().items()}


def _check_same(P: BivectorField, Q: BivectorField):
    if P.dim != Q.dim:
        raise DimensionError(f"dimension mismatch: {P.dim} vs {Q.dim}")


def _grads(P: BivectorField):
    m = P.dim
    return {
        (i, j): [partial(P.entries[i][j], r + 1) for r in range(m)]
        for i in range(m)
        for j in range(i + 1, m)
        if P.entries[i][j]
    }


def _dentry(grads, r, i, j):
    if i < j:
        g = grads.get((i, j))
        return g[r] if g else None
    g = grads.get((j, i))
    return -g[r] if g else None


def _contract(P, dQ, r_list, lam, mu, nu):
    """sum_rho P^{rho lam} d_rho Q^{mu nu}."""
    s = None
    for r in r_list:
        a = P.entries[r][lam]
        if not a:
            continue
        d = _dentry(dQ, r, mu, nu)
        if d:
            t = a * d
            s = t if s is None else s + t
    return s


def _bracket(P, Q, dP, dQ, three_term: bool) -> TrivectorField:
    m = P.dim
    rs = range(m)
    comps = {}
    for lam, mu, nu in combinations(range(m), 3):
        s = Expression()
        cyc = ((lam, mu, nu), (nu, lam, mu), (mu, nu, lam))
        for a, b, c in cyc:
            t = _contract(P, dQ, rs, a, b, c)
            if t:
                s = s + t
            if not three_term:
                t = _contract(Q, dP, rs, a, b, c)
                if t:
                    s = s + t
        comps[(lam + 1, mu + 1, nu + 1)] = s
    return TrivectorField(m, comps)


def schouten(P: BivectorField, Q: BivectorField) -> TrivectorField:
    """[P, Q]: three-term cyclic sum when P == Q, six-term mixed bracket otherwise.

    The two agree up to the factor 2 the mixed form gives on equal arguments.
    """
    _check_same(P, Q)
    if P is Q or P == Q:
        dP = _grads(P)
        return _bracket(P, P, dP, dP, True)
    return mixed_schouten(P, Q)


def mixed_schouten(P: BivectorField, Q: BivectorField) -> TrivectorField:
    """Always the six-term bracket; bilinear and symmetric in (P, Q)."""
    _check_same(P, Q)
    return _bracket(P, Q, _grads(P), _grads(Q), False)


def _d(f, i):
    return f.diff(i) if isinstance(f, (Expression, RationalExpression)) else partial(_E(f), i)


def poisson_bracket(P: BivectorField, f, g):
    """{f, g} = P^{mu nu} d_mu f d_nu g; accepts Expressions or RationalExpressions."""
    if isinstance(f, str):
        f = parse(f)
    if isinstance(g, str):
        g = parse(g)
    m = P.dim
    df = [_d(f, i + 1) for i in range(m)]
    dg = [_d(g, i + 1) for i in range(m)]
    acc = Expression()
    for i in range(m):
        if not df[i]:
            continue
        for j in range(m):
            if P.entries[i][j] and dg[j]:
                acc = P.entries[i][j] * df[i] * dg[j] + acc
    return acc


def jacobi_sum(P: BivectorField, f, g, h):
    """{f,{g,h}} + {g,{h,f}} + {h,{f,g}}."""
    return (
        poisson_bracket(P, f, poisson_bracket(P, g, h))
        + poisson_bracket(P, g, poisson_bracket(P, h, f))
        + poisson_bracket(P, h, poisson_bracket(P, f, g))
    )


def bivector_from_frame(P_frame, v: VielbeinMatrix) -> BivectorField:
    """P^{mu nu} = e_i^mu e_j^nu P^{ij} with e = ``v.frame``."""
    if isinstance(P_frame, BivectorField):
        P_frame = P_frame.entries
    m = v.dim
    if len(P_frame) != m:
        raise DimensionError(f"frame bivector has dim {len(P_frame)}, vielbein {m}")
    E = v.frame
    Pf = [[_E(x) for x in r] for r in P_frame]
    # T = P_frame * E, then out = E^T * T
    T = [[Expression() for _ in range(m)] for _ in range(m)]
    for i in range(m):
        for j in range(m):
            if not Pf[i][j]:
                continue
            for nu in range(m):
                if E[j][nu]:
                    T[i][nu] = T[i][nu] + Pf[i][j] * E[j][nu]
    out = [[Expression() for _ in range(m)] for _ in range(m)]
    for mu in range(m):
        for nu in range(mu + 1, m):
            s = Expression()
            for i in range(m):
                if E[i][mu] and T[i][nu]:
                    s = s + E[i][mu] * T[i][nu]
            out[mu][nu] = s
            out[nu][mu] = -s
    return BivectorField(out)


@dataclass
class CompatibilityReport:
    PP: TrivectorField
    QQ: TrivectorField
    PQ: TrivectorField

    @property
    def status(self) -> dict:
        return {"[P,P]": self.PP.is_zero(), "[P',P']": self.QQ.is_zero(), "[P,P']": self.PQ.is_zero()}

    @property
    def ok(self) -> bool:
        return all(self.status.values())

    def failures(self) -> dict:
        out = {}
        for name, T in (("[P,P]", self.PP), ("[P',P']", self.QQ), ("[P,P']", self.PQ)):
            r = T.minimal_residual()
            if r is not None:
                out[name] = {"component": list(r[0]), "residual": render(r[1]), "nonzero_components": len(T.nonzero())}
        return out


def check_compatibility(P: BivectorField, Q: BivectorField) -> CompatibilityReport:
    _check_same(P, Q)
    dP, dQ = _grads(P), _grads(Q)
    return CompatibilityReport(
        _bracket(P, P, dP, dP, True),
        _bracket(Q, Q, dQ, dQ, True),
        _bracket(P, Q, dP, dQ, False),
    )


# ---------------------------------------------------------------- frame path


def frame_components(T: TrivectorField, v: VielbeinMatrix) -> TrivectorField:
    """T_frame^{abc} = dual[l][a] dual[m][b] dual[n][c] T^{lmn}."""
    m = v.dim
    D = v.dual
    full = {}
    for l in range(1, m + 1):
        for mu in range(1, m + 1):
            for nu in range(1, m + 1):
                c = T[(l, mu, nu)]
                if c:
                    full[(l - 1, mu - 1, nu - 1)] = c
    comps = {}
    for a, b, c in combinations(range(m), 3):
        s = Expression()
        for (l, mu, nu), t in full.items():
            f = D[l][a]
            if not f:
                continue
            g = D[mu][b]
            if not g:
                continue
            h = D[nu][c]
            if h:
                s = s + f * g * h * t
        comps[(a + 1, b + 1, c + 1)] = s
    return TrivectorField(m, comps)


def mixed_frame_form(alg: LieAlgebra, v: VielbeinMatrix, P_frame, Q_frame) -> TrivectorField:
    """Frame components of [P, Q] assembled from matrix blocks.

    For each free index g the (s, z) block is

        sum_i (P X_i Q^{ig} + Q X_i P^{ig} + P^{ig} X_i^t Q + Q^{ig} X_i^t P)
        + P Y^g Q + Q Y^g P + D(g)

    with X_i, Y^g the adjoint matrices and D(g) the derivative terms
    P^{jg} e_j(Q^{sz}) + P^{js} e_j(Q^{zg}) + P^{jz} e_j(Q^{gs}) plus the
    same with P and Q swapped, where e_j = frame[j][k] d_k.

    The blocks presuppose that the rows e_j close under commutators with
    constant coefficients; ValueError is raised for vielbeins where they
    do not.
    """
    try:
        row_structure_constants(v)
    except NonConstantStructureError as exc:
        raise ValueError(f"matrix form not applicable: frame rows do not close ({exc})") from None
    m = alg.dim
    P = [[_E(x) for x in r] for r in (P_frame.entries if isinstance(P_frame, BivectorField) else P_frame)]
    Q = [[_E(x) for x in r] for r in (Q_frame.entries if isinstance(Q_frame, BivectorField) else Q_frame)]
    ad = adjoint(alg)
    E = v.frame

    def ej(f, j):
        s = Expression()
        for k in range(m):
            if E[j][k]:
                d = partial(f, k + 1)
                if d:
                    s = s + E[j][k] * d
        return s

    eP = [[[ej(P[a][b], j) for j in range(m)] for b in range(m)] for a in range(m)]
    eQ = [[[ej(Q[a][b], j) for j in range(m)] for b in range(m)] for a in range(m)]

    def mm(A, B):
        return [[sum((A[i][k] * B[k][j] for k in range(m) if A[i][k] and B[k][j]), Expression())
                 for j in range(m)] for i in range(m)]

    def tr(A):
        return [list(r) for r in zip(*A)]

    PX = [mm(P, ad.x_mats[i]) for i in range(m)]
    QX = [mm(Q, ad.x_mats[i]) for i in range(m)]
    XtP = [mm(tr(ad.x_mats[i]), P) for i in range(m)]
    XtQ = [mm(tr(ad.x_mats[i]), Q) for i in range(m)]
    comps = {}
    for s_, z, g in combinations(range(m), 3):
        acc = Expression()
        for i in range(m):
            pig, qig = P[i][g], Q[i][g]
            if qig:
                acc = acc + PX[i][s_][z] * qig + XtP[i][s_][z] * qig
            if pig:
                acc = acc + QX[i][s_][z] * pig + XtQ[i][s_][z] * pig
        Y = ad.y_mats[g]
        for k in range(m):
            for l in range(m):
                if Y[k][l]:
                    acc = acc + Y[k][l] * (P[s_][k] * Q[l][z] + Q[s_][k] * P[l][z])
        for j in range(m):
            acc = acc + (P[j][g] * eQ[s_][z][j] + P[j][s_] * eQ[z][g][j] + P[j][z] * eQ[g][s_][j])
            acc = acc + (Q[j][g] * eP[s_][z][j] + Q[j][s_] * eP[z][g][j] + Q[j][z] * eP[g][s_][j])
        comps[(s_ + 1, z + 1, g + 1)] = acc
    return TrivectorField(m, comps)
