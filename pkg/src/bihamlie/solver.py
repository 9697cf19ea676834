"""Compatibility equations for a constant P and an affine P'.

Pipeline: fix P (check it is Poisson), solve the linear stage [P, P'] = 0
for the P' ansatz exactly, then emit the quadratic residuals of
[P', P'] = 0 on the solved family.  Free unknowns of the family double as
its parameters, so residual polynomials read in the same symbols as the
ansatz.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import Mapping, Sequence

from .catalog import LieAlgebra
from .expr import Expression, NonlinearityError, collect_linear, parse, render, substitute
from .linalg import nullspace, rref
from .poisson import (BivectorField, antisymmetric, bivector_from_frame, check_compatibility,
                      mixed_schouten, schouten)
from .sampling import random_rational
from .tables import TableRow, table_row
from .vielbein import VielbeinMatrix, compute_vielbein

__all__ = [
    "AnsatzPattern",
    "LinearSystem",
    "SolutionFamily",
    "MembershipReport",
    "TableReport",
    "RecoveryReport",
    "jacobi_constraints_constant",
    "build_linear_stage",
    "solve_linear_stage",
    "quadratic_residuals",
    "membership",
    "table_member_values",
    "verify_pair",
    "verify_table",
    "recover_table",
    "solve",
]

_LETTERS = "abcdefghijklmnopqrstuvwxyz"


def _idx(*ns: int) -> str:
    # concatenated digits for small dims, underscores once ambiguity creeps in
    return "".join(map(str, ns)) if all(n < 10 for n in ns) else "_".join(map(str, ns))


@dataclass(frozen=True)
class AnsatzPattern:
    """Which constant P entries and which affine P' entries are allowed.

    ``style`` picks the coefficient naming of the x-linear part of P':
    ``"flat"`` numbers the pairs (1,2)->2, (1,3)->3, ... and entry (i,j)
    gets ``a<slot><k>`` for x_k; ``"letters"`` uses the row letter,
    entry (r,j) gets ``<letter r><j><k>``.  Constants are ``pp<i><j>``.
    """

    dim: int
    p_entries: tuple = ()
    pprime_entries: tuple = ()
    constants: bool = True
    style: str = "flat"

    def __post_init__(self):
        for ij in tuple(self.p_entries) + tuple(self.pprime_entries):
            i, j = ij
            if not 1 <= i < j <= self.dim:
                raise ValueError(f"pattern entry {ij} must satisfy 1 <= i < j <= {self.dim}")
        if self.style not in ("flat", "letters"):
            raise ValueError(f"unknown ansatz style {self.style!r}")

    @classmethod
    def full(cls, dim: int, style: str | None = None, constants: bool = True) -> "AnsatzPattern":
        pairs = tuple(combinations(range(1, dim + 1), 2))
        if style is None:
            style = "flat" if dim == 4 else "letters"
        return cls(dim, pairs, pairs, constants, style)

    def p_symbol(self, i: int, j: int) -> str:
        return "p" + _idx(i, j)

    def p_symbols(self) -> list[str]:
        return [self.p_symbol(i, j) for i, j in self.p_entries]

    def constant_symbol(self, i: int, j: int) -> str:
        return "pp" + _idx(i, j)

    def slot_symbol(self, i: int, j: int, k: int) -> str:
        if self.style == "flat":
            slot = list(combinations(range(1, self.dim + 1), 2)).index((i, j)) + 2
            return "a" + _idx(slot, k)
        return _LETTERS[i - 1] + _idx(j, k)

    def entry_unknowns(self, i: int, j: int) -> list[str]:
        head = [self.constant_symbol(i, j)] if self.constants else []
        return head + [self.slot_symbol(i, j, k) for k in range(1, self.dim + 1)]

    def unknowns(self) -> list[str]:
        out = []
        for i, j in self.pprime_entries:
            out.extend(self.entry_unknowns(i, j))
        return out

    def pprime_frame(self, values: Mapping[str, Expression] | None = None) -> list:
        """Frame P' with every unknown replaced by ``values[u]`` (default: the symbol)."""
        upper = {}
        for i, j in self.pprime_entries:
            e = Expression()
            for u in self.entry_unknowns(i, j):
                val = Expression.symbol(u) if values is None else values.get(u)
                if val is None or not val:
                    continue
                if u.startswith("pp"):
                    e = e + val
                else:
                    e = e + val * Expression.coord(_slot_k(u))
            upper[(i, j)] = e
        return antisymmetric(self.dim, upper)

    def p_frame(self, values: Mapping | None = None) -> list:
        upper = {}
        for i, j in self.p_entries:
            s = self.p_symbol(i, j)
            v = Expression.symbol(s) if values is None else values.get(s, values.get((i, j), 0))
            upper[(i, j)] = v if isinstance(v, Expression) else Expression.const(v)
        return antisymmetric(self.dim, upper)

    def to_obj(self) -> dict:
        return {
            "dim": self.dim,
            "p_entries": [list(p) for p in self.p_entries],
            "pprime_entries": [list(p) for p in self.pprime_entries],
            "constants": self.constants,
            "style": self.style,
        }

    @classmethod
    def from_obj(cls, obj: Mapping) -> "AnsatzPattern":
        dim = int(obj["dim"])
        full = cls.full(dim, obj.get("style"))
        def pairs(key, default):
            if key not in obj:
                return default
            return tuple(tuple(int(x) for x in p) for p in obj[key])
        return cls(dim, pairs("p_entries", full.p_entries), pairs("pprime_entries", full.pprime_entries),
                   bool(obj.get("constants", True)), obj.get("style", full.style))


def _slot_k(u: str) -> int:
    return int(u.rsplit("_", 1)[1]) if "_" in u else int(u[-1])


# ---------------------------------------------------------------- stage 0


def _collect_polys(T, unknowns=()) -> list[Expression]:
    """Coefficient polynomials of every component, normalized and deduplicated."""
    seen = {}
    for idx in sorted(T.nonzero()):
        for basis, form in collect_linear(T[idx], unknowns).items():
            poly = form[None]
            if not poly:
                continue
            lead = poly.terms[min(poly.terms, key=lambda k: render(Expression._raw({k: 1})))]
            poly = poly * (1 / Fraction(lead))
            seen.setdefault(render(poly), poly)
    return [seen[k] for k in sorted(seen)]


def jacobi_constraints_constant(alg: LieAlgebra, pattern: AnsatzPattern,
                                v: VielbeinMatrix | None = None) -> list[Expression]:
    """Polynomials in the p_ij that must vanish for P to be Poisson.

    The coordinate bivector E^T P E is built with symbolic p_ij and
    [P, P] is collected over basis functions; each distinct coefficient
    (up to a rational factor) is one constraint.
    """
    v = v or compute_vielbein(alg)
    B = bivector_from_frame(pattern.p_frame(), v)
    return _collect_polys(schouten(B, B))


# ---------------------------------------------------------------- stage 1


@dataclass
class LinearSystem:
    unknowns: list[str]
    rows: list[dict]
    origins: list[tuple] = field(default_factory=list)

    def matrix(self) -> list[list[Fraction]]:
        pos = {u: n for n, u in enumerate(self.unknowns)}
        out = []
        for r in self.rows:
            vec = [Fraction(0)] * len(self.unknowns)
            for u, c in r.items():
                vec[pos[u]] = c
            out.append(vec)
        return out

    def residual(self, values: Mapping[str, object]) -> list:
        """Row values at ``values`` (rationals or Expressions)."""
        out = []
        for r in self.rows:
            acc = Expression()
            for u, c in r.items():
                val = values.get(u, 0)
                acc = acc + (val if isinstance(val, Expression) else Expression.const(val)) * c
            out.append(acc)
        return out


def build_linear_stage(alg: LieAlgebra, P_values: Mapping, pattern: AnsatzPattern,
                       v: VielbeinMatrix | None = None) -> LinearSystem:
    """Rows of [P, P'] = 0 collected over basis functions, linear in the P' unknowns."""
    v = v or compute_vielbein(alg)
    if v.dim != pattern.dim:
        raise ValueError("pattern dimension does not match the algebra")
    BP = bivector_from_frame(pattern.p_frame(P_values), v)
    BQ = bivector_from_frame(pattern.pprime_frame(), v)
    T = mixed_schouten(BP, BQ)
    unknowns = pattern.unknowns()
    seen = {}
    rows, origins = [], []
    for idx in sorted(T.nonzero()):
        for basis, form in collect_linear(T[idx], unknowns).items():
            if None in form and form[None]:
                raise NonlinearityError("P' ansatz has an unknown-free part in the mixed bracket")
            row = {}
            for u, c in form.items():
                if u is None:
                    continue
                if not c.is_rational():
                    raise NonlinearityError(
                        f"coefficient of {u} is not rational ({render(c)}); P_values must be concrete")
                row[u] = c.as_fraction()
            if not row:
                continue
            # scale so the first unknown in ansatz order has coefficient 1
            first = min(row, key=unknowns.index)
            s = row[first]
            row = {u: c / s for u, c in sorted(row.items(), key=lambda t: unknowns.index(t[0]))}
            key = tuple(row.items())
            if key in seen:
                continue
            seen[key] = True
            rows.append(row)
            origins.append((idx, render(basis)))
    return LinearSystem(unknowns, rows, origins)


@dataclass
class SolutionFamily:
    unknowns: list[str]
    particular: dict
    basis: list[list[Fraction]]
    free: list[str]
    rank: int
    quadratic_residuals: list | None = None

    @property
    def nullity(self) -> int:
        return len(self.basis)

    def member(self, free_values: Mapping[str, object]) -> dict:
        """Unknown -> value (Expression) for the member with the given free values."""
        out = {u: Expression.const(self.particular.get(u, 0)) for u in self.unknowns}
        for f, vec in zip(self.free, self.basis):
            t = free_values.get(f, 0)
            t = t if isinstance(t, Expression) else Expression.const(t)
            if not t:
                continue
            for u, c in zip(self.unknowns, vec):
                if c:
                    out[u] = out[u] + t * c
        return out

    def symbolic_member(self) -> dict:
        return self.member({f: Expression.symbol(f) for f in self.free})

    def to_obj(self) -> dict:
        return {
            "unknowns": list(self.unknowns),
            "particular": {u: str(q) for u, q in sorted(self.particular.items()) if q},
            "rank": self.rank,
            "nullity": self.nullity,
            "free": list(self.free),
            "family_basis": [
                {u: str(c) for u, c in zip(self.unknowns, vec) if c} for vec in self.basis
            ],
            "quadratic_residuals": (None if self.quadratic_residuals is None
                                    else [render(p) for p in self.quadratic_residuals]),
        }

    def dumps(self) -> str:
        return json.dumps(self.to_obj(), indent=2, sort_keys=True) + "\n"


def solve_linear_stage(sys: LinearSystem) -> SolutionFamily:
    n = len(sys.unknowns)
    M = sys.matrix()
    _, pivots = rref(M, n)
    basis = nullspace(M, n)
    piv = set(pivots)
    free = [u for c, u in enumerate(sys.unknowns) if c not in piv]
    return SolutionFamily(list(sys.unknowns), {u: Fraction(0) for u in sys.unknowns}, basis, free, len(pivots))


# ---------------------------------------------------------------- stage 2


def quadratic_residuals(alg: LieAlgebra, family: SolutionFamily, pattern: AnsatzPattern,
                        v: VielbeinMatrix | None = None) -> list[Expression]:
    """Coefficients of [P', P'] on the family, as polynomials in its free unknowns."""
    v = v or compute_vielbein(alg)
    BQ = bivector_from_frame(pattern.pprime_frame(family.symbolic_member()), v)
    polys = _collect_polys(schouten(BQ, BQ))
    family.quadratic_residuals = polys
    return polys


def solve(alg: LieAlgebra, P_values: Mapping, pattern: AnsatzPattern | None = None) -> SolutionFamily:
    pattern = pattern or AnsatzPattern.full(alg.dim)
    v = compute_vielbein(alg)
    fam = solve_linear_stage(build_linear_stage(alg, P_values, pattern, v))
    quadratic_residuals(alg, fam, pattern, v)
    return fam


# ---------------------------------------------------------------- membership


def table_member_values(Pprime: Mapping, pattern: AnsatzPattern,
                        subs: Mapping | None = None) -> dict[str, Expression]:
    """Read the ansatz unknowns off a tabulated affine P' (frame entries)."""
    vals: dict[str, Expression] = {}
    for (i, j), e in Pprime.items():
        e = substitute(e, subs) if subs else e
        if (i, j) not in pattern.pprime_entries:
            if e:
                raise ValueError(f"P' entry {(i, j)} lies outside the pattern")
            continue
        for basis, form in collect_linear(e, ()).items():
            coeff = form[None]
            if basis == Expression.const(1):
                if not pattern.constants:
                    raise ValueError(f"P' entry {(i, j)} has a constant part but the pattern has none")
                vals[pattern.constant_symbol(i, j)] = coeff
                continue
            ks = basis.coordinates()
            if len(ks) != 1 or basis != Expression.coord(next(iter(ks))):
                raise ValueError(f"P' entry {(i, j)} is not affine in the coordinates")
            vals[pattern.slot_symbol(i, j, next(iter(ks)))] = coeff
    return vals


@dataclass
class MembershipReport:
    linear_ok: bool
    quadratic_ok: bool | None
    failing_rows: list
    failing_residuals: list

    @property
    def ok(self) -> bool:
        return self.linear_ok and self.quadratic_ok is not False


def membership(system: LinearSystem, family: SolutionFamily, values: Mapping[str, Expression]) -> MembershipReport:
    res = system.residual(values)
    bad_rows = [(system.origins[n] if n < len(system.origins) else n, render(r))
                for n, r in enumerate(res) if r]
    q_ok = None
    bad_q = []
    if family.quadratic_residuals is not None:
        fv = {f: values.get(f, Expression()) for f in family.free}
        for p in family.quadratic_residuals:
            r = substitute(p, fv)
            if r:
                bad_q.append(render(r))
        q_ok = not bad_q
    return MembershipReport(not bad_rows, q_ok, bad_rows, bad_q)


# ---------------------------------------------------------------- table checks


@dataclass
class TableReport:
    name: str
    status: dict
    failures: dict
    side_conditions: list
    flags: list

    @property
    def ok(self) -> bool:
        return all(self.status.values())

    def to_obj(self) -> dict:
        return {
            "row": self.name,
            "status": {k: ("pass" if v else "fail") for k, v in self.status.items()},
            "ok": self.ok,
            "failures": self.failures,
            "side_conditions": list(self.side_conditions),
            "flags": list(self.flags),
        }


def verify_pair(name: str, v: VielbeinMatrix, P_frame, Pprime_frame,
                side_conditions: Sequence[str] = (), flags: Sequence[str] = ()) -> TableReport:
    rep = check_compatibility(bivector_from_frame(P_frame, v), bivector_from_frame(Pprime_frame, v))
    return TableReport(name, rep.status, rep.failures(), list(side_conditions), list(flags))


def verify_table(name: str | TableRow) -> TableReport:
    """Check the three Schouten identities for a stored row, parameters symbolic."""
    row = name if isinstance(name, TableRow) else table_row(name)
    return verify_pair(row.name, row.vielbein(), row.frame_P(), row.frame_Pprime(),
                       row.side_conditions, row.flags)


@dataclass
class RecoveryReport:
    name: str
    seed: int
    P_values: dict
    family: SolutionFamily
    membership: MembershipReport
    P_is_poisson: bool

    @property
    def ok(self) -> bool:
        return self.P_is_poisson and self.membership.ok

    def to_obj(self) -> dict:
        return {
            "algebra": self.name,
            "seed": self.seed,
            "P_values": {k: str(q) for k, q in sorted(self.P_values.items())},
            "P_is_poisson": self.P_is_poisson,
            "linear_rank": self.family.rank,
            "nullity": self.family.nullity,
            "free": list(self.family.free),
            "quadratic_residuals": len(self.family.quadratic_residuals or []),
            "table_match": self.ok,
            "failing_rows": [str(r) for r in self.membership.failing_rows],
            "failing_residuals": list(self.membership.failing_residuals),
        }


def recover_table(name: str | TableRow, seed: int = 0, pattern: AnsatzPattern | None = None) -> RecoveryReport:
    """Solve the linear stage from the row's P at seeded rational values and test the row's P'."""
    row = name if isinstance(name, TableRow) else table_row(name)
    alg, v = row.algebra(), row.vielbein()
    pattern = pattern or AnsatzPattern.full(row.dim, row.ansatz)
    rng = random.Random(seed)
    syms = set()
    for e in row.P.values():
        syms |= e.symbols()
    subs = {s: random_rational(rng, nonzero=True) for s in sorted(syms)}
    P_num = {ij: substitute(e, subs) for ij, e in row.P.items()}
    if any(not e.is_rational() for e in P_num.values()):
        raise ValueError("row P did not become constant after substitution")
    P_frame = antisymmetric(row.dim, P_num)
    B = bivector_from_frame(P_frame, v)
    is_poisson = schouten(B, B).is_zero()
    P_values = {pattern.p_symbol(i, j): e.as_fraction() for (i, j), e in P_num.items()}
    pat = AnsatzPattern(row.dim, tuple(sorted(set(pattern.p_entries) | set(P_num))),
                        pattern.pprime_entries, pattern.constants, pattern.style)
    system = build_linear_stage(alg, P_values, pat, v)
    fam = solve_linear_stage(system)
    quadratic_residuals(alg, fam, pat, v)
    values = table_member_values(row.Pprime, pat, subs)
    return RecoveryReport(row.name, seed, subs, fam, membership(system, fam, values), is_poisson)
