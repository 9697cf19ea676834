"""Lie algebra structure constants, validation and adjoint matrices.

Basis indices are 1-based everywhere.  Structure constants are stored as
``{(i, j, k): Expression}`` with ``i < j``; they may contain algebra
parameters (``a``, ``b``) that are either bound to rationals or left
symbolic for validation over the parameter ring.
"""

from __future__ import annotations

import json
import re
import unicodedata
from dataclasses import dataclass, field
from fractions import Fraction
from importlib import resources
from pathlib import Path
from typing import Mapping

from .expr import Expression, parse, render, substitute, to_fraction

__all__ = [
    "CatalogError",
    "UnknownAlgebraError",
    "MissingParameterError",
    "ConstraintViolationError",
    "ParamSpec",
    "LieAlgebra",
    "AdjointRep",
    "Violation",
    "Catalog",
    "default_catalog",
    "lookup",
    "validate",
    "adjoint",
    "load_algebras",
    "dumps_algebras",
    "normalize_name",
]

FORMAT_TAG = "bihamlie-algebras/1"


class CatalogError(ValueError):
    pass


class UnknownAlgebraError(CatalogError, KeyError):
    def __str__(self):
        return self.args[0] if self.args else "unknown algebra"


class MissingParameterError(CatalogError):
    pass


class ConstraintViolationError(CatalogError):
    pass


# ---------------------------------------------------------------- parameters

_CONSTRAINT_RE = re.compile(r"^\s*([A-Za-z_]\w*)\s*(!=|==|<=|>=|<|>|in)\s*(.+?)\s*$")


def _check_constraint(text: str, value: Fraction) -> bool:
    m = _CONSTRAINT_RE.match(text)
    if not m:
        raise CatalogError(f"cannot read constraint {text!r}")
    _, op, rhs = m.groups()
    if op == "in":
        rhs = rhs.strip()
        if not (rhs.startswith("{") and rhs.endswith("}")):
            raise CatalogError(f"cannot read constraint {text!r}")
        allowed = {parse(t).as_fraction() for t in rhs[1:-1].split(",") if t.strip()}
        return value in allowed
    r = parse(rhs).as_fraction()
    return {
        "!=": value != r,
        "==": value == r,
        "<": value < r,
        ">": value > r,
        "<=": value <= r,
        ">=": value >= r,
    }[op]


@dataclass(frozen=True)
class ParamSpec:
    symbol: str
    value: Fraction | None = None
    constraints: tuple[str, ...] = ()

    def check(self, value: Fraction) -> list[str]:
        return [c for c in self.constraints if not _check_constraint(c, value)]


# ---------------------------------------------------------------- algebra


@dataclass(frozen=True)
class LieAlgebra:
    """Structure constants ``C_{ij}^k`` of an m-dimensional real Lie algebra."""

    name: str
    dim: int
    structure: Mapping[tuple[int, int, int], Expression]
    params: Mapping[str, Fraction | None] = field(default_factory=dict)
    param_specs: tuple[ParamSpec, ...] = ()
    symplectic: bool = False
    nilpotent: bool = False
    source: str = ""
    notes: tuple[str, ...] = ()

    def C(self, i: int, j: int, k: int) -> Expression:
        """Full antisymmetric tensor access."""
        if i == j:
            return Expression()
        if i < j:
            return self.structure.get((i, j, k), Expression())
        return -self.structure.get((j, i, k), Expression())

    def bracket(self, i: int, j: int) -> dict[int, Expression]:
        return {k: v for k in range(1, self.dim + 1) if (v := self.C(i, j, k))}

    def is_symbolic(self) -> bool:
        return any(v is None for v in self.params.values())

    def bound(self, values: Mapping[str, object]) -> "LieAlgebra":
        """Bind (some) parameters to rationals."""
        vals = {k: to_fraction(v) for k, v in values.items()}
        for spec in self.param_specs:
            if spec.symbol in vals:
                bad = spec.check(vals[spec.symbol])
                if bad:
                    raise ConstraintViolationError(
                        f"{self.name}: {spec.symbol}={vals[spec.symbol]} violates {', '.join(bad)}"
                    )
        unknown = set(vals) - set(self.params)
        if unknown:
            raise CatalogError(f"{self.name}: no parameter named {sorted(unknown)[0]}")
        struct = {}
        for key, v in self.structure.items():
            nv = substitute(v, vals)
            if nv:
                struct[key] = nv
        params = dict(self.params)
        params.update(vals)
        return LieAlgebra(
            self.name, self.dim, struct, params, self.param_specs,
            self.symplectic, self.nilpotent, self.source, self.notes,
        )

    def structure_fractions(self) -> dict[tuple[int, int, int], Fraction]:
        return {k: v.as_fraction() for k, v in self.structure.items()}

    def label(self) -> str:
        bound = {k: v for k, v in self.params.items() if v is not None}
        if not bound:
            return self.name
        return self.name + "[" + ",".join(f"{k}={v}" for k, v in sorted(bound.items())) + "]"


# ---------------------------------------------------------------- validation


@dataclass(frozen=True)
class Violation:
    kind: str  # "antisymmetry", "jacobi", "dimension"
    indices: tuple[int, ...]
    residual: Expression

    def __str__(self):
        return f"{self.kind}{self.indices}: {render(self.residual)}"


def validate(alg: LieAlgebra, raw_brackets=None) -> list[Violation]:
    """Every antisymmetry and Jacobi violation with its residual.

    ``raw_brackets`` (list of ``(i, j, k, coeff)``) lets the check see both
    orderings when the input listed them separately.
    """
    out: list[Violation] = []
    m = alg.dim
    if raw_brackets is not None:
        seen: dict = {}
        for i, j, k, c in raw_brackets:
            c = c if isinstance(c, Expression) else parse(str(c))
            if i == j and c:
                out.append(Violation("antisymmetry", (i, j, k), c))
            seen.setdefault((i, j, k), Expression())
            seen[(i, j, k)] = seen[(i, j, k)] + c
        for (i, j, k), c in seen.items():
            if i < j and (j, i, k) in seen:
                r = c + seen[(j, i, k)]
                if r:
                    out.append(Violation("antisymmetry", (i, j, k), r))
    for (i, j, k) in alg.structure:
        if not (1 <= i < j <= m and 1 <= k <= m):
            out.append(Violation("antisymmetry", (i, j, k), alg.structure[(i, j, k)]))
    if alg.symplectic and m % 2:
        out.append(Violation("dimension", (m,), Expression.const(m)))
    C = {}
    for i in range(1, m + 1):
        for j in range(1, m + 1):
            row = alg.bracket(i, j)
            if row:
                C[(i, j)] = row
    for i in range(1, m + 1):
        for j in range(i + 1, m + 1):
            for k in range(j + 1, m + 1):
                acc: dict[int, Expression] = {}
                for a, b, c in ((i, j, k), (j, k, i), (k, i, j)):
                    for l, cl in C.get((a, b), {}).items():
                        for s, cs in C.get((l, c), {}).items():
                            acc[s] = acc.get(s, Expression()) + cl * cs
                for s in sorted(acc):
                    if acc[s]:
                        out.append(Violation("jacobi", (i, j, k, s), acc[s]))
    return out


# ---------------------------------------------------------------- adjoint


@dataclass(frozen=True)
class AdjointRep:
    """``x_mats[i-1]`` is 𝒳_i with (𝒳_i)_j^k = -C_ij^k; ``y_mats[k-1]`` is 𝒴^k."""

    x_mats: tuple
    y_mats: tuple

    def X(self, i: int):
        return self.x_mats[i - 1]

    def Y(self, k: int):
        return self.y_mats[k - 1]


def adjoint(alg: LieAlgebra) -> AdjointRep:
    m = alg.dim
    xs = []
    for i in range(1, m + 1):
        xs.append([[-alg.C(i, j, k) for k in range(1, m + 1)] for j in range(1, m + 1)])
    ys = []
    for k in range(1, m + 1):
        ys.append([[-alg.C(i, j, k) for j in range(1, m + 1)] for i in range(1, m + 1)])
    return AdjointRep(tuple(xs), tuple(ys))


# ---------------------------------------------------------------- file format


def normalize_name(name: str) -> str:
    """Loose key so ``A_{4,1}``, ``A41`` and ``II⊕R`` / ``II+R`` collide as intended."""
    s = unicodedata.normalize("NFKC", name)
    s = s.replace("⊕", "+").replace("\\oplus", "+").replace("oplus", "+")
    s = s.replace("\\mathbb{R}", "R").replace("ℝ", "R")
    s = re.sub(r"[\s_{}^,\\$]", "", s)
    return s.lower()


def _parse_algebra(obj: Mapping) -> tuple[LieAlgebra, list]:
    try:
        name = str(obj["name"])
        dim = int(obj["dim"])
        brackets = obj.get("brackets", [])
    except (KeyError, TypeError, ValueError) as exc:
        raise CatalogError(f"malformed algebra entry: {exc}") from None
    specs = []
    params: dict[str, Fraction | None] = {}
    for p in obj.get("params", []):
        v = p.get("value")
        spec = ParamSpec(
            str(p["symbol"]),
            None if v is None else to_fraction(str(v)),
            tuple(p.get("constraints", [])),
        )
        specs.append(spec)
        params[spec.symbol] = spec.value
    raw = []
    fwd: dict[tuple[int, int, int], Expression] = {}
    rev: dict[tuple[int, int, int], Expression] = {}
    for entry in brackets:
        if len(entry) != 4:
            raise CatalogError(f"{name}: bracket entries are [i, j, k, coefficient]")
        i, j, k, c = int(entry[0]), int(entry[1]), int(entry[2]), parse(str(entry[3]))
        if not (1 <= min(i, j, k) and max(i, j, k) <= dim):
            raise CatalogError(f"{name}: index out of range in {list(entry)}")
        raw.append((i, j, k, c))
        if i < j:
            fwd[(i, j, k)] = fwd.get((i, j, k), Expression()) + c
        elif i > j:
            rev[(j, i, k)] = rev.get((j, i, k), Expression()) - c
    # when a pair is given in both orders the i<j entry wins; validate() reports the clash
    pairs = {(i, j) for i, j, _ in fwd}
    struct = dict(fwd)
    for (i, j, k), v in rev.items():
        if (i, j) not in pairs:
            struct[(i, j, k)] = v
    struct = {kk: vv for kk, vv in sorted(struct.items()) if vv}
    alg = LieAlgebra(
        name=name,
        dim=dim,
        structure=struct,
        params=params,
        param_specs=tuple(specs),
        symplectic=bool(obj.get("symplectic", False)),
        nilpotent=bool(obj.get("nilpotent", False)),
        source=str(obj.get("source", "")),
        notes=tuple(obj.get("notes", [])),
    )
    for s in specs:
        if s.value is not None and s.check(s.value):
            raise ConstraintViolationError(f"{name}: default {s.symbol}={s.value} violates constraints")
    return alg, raw


def _algebra_to_obj(alg: LieAlgebra) -> dict:
    obj: dict = {"name": alg.name, "dim": alg.dim}
    obj["params"] = [
        {
            "symbol": s.symbol,
            **({"value": str(s.value)} if s.value is not None else {}),
            "constraints": list(s.constraints),
        }
        for s in alg.param_specs
    ]
    obj["brackets"] = [
        [i, j, k, render(v)] for (i, j, k), v in sorted(alg.structure.items())
    ]
    if alg.symplectic:
        obj["symplectic"] = True
    if alg.nilpotent:
        obj["nilpotent"] = True
    if alg.source:
        obj["source"] = alg.source
    if alg.notes:
        obj["notes"] = list(alg.notes)
    return obj


def dumps_algebras(algs, single: bool = False) -> str:
    """Canonical text: 2-space JSON, one bracket per line, trailing newline."""
    algs = list(algs)
    if single:
        if len(algs) != 1:
            raise CatalogError("single-entry format needs exactly one algebra")
        doc = _algebra_to_obj(algs[0])
    else:
        doc = {"format": FORMAT_TAG, "algebras": [_algebra_to_obj(a) for a in algs]}
    text = json.dumps(doc, indent=2, ensure_ascii=False)
    # keep each bracket on one line for readability
    text = re.sub(
        r"\[\n\s+(\d+),\n\s+(\d+),\n\s+(\d+),\n\s+(\"[^\"]*\")\n\s+\]",
        r"[\1, \2, \3, \4]",
        text,
    )
    return text + "\n"


def load_algebras(source) -> list[LieAlgebra]:
    """Read algebras from a path, a JSON string, or a parsed object."""
    if isinstance(source, Path) or (isinstance(source, str) and not source.lstrip().startswith("{")):
        text = Path(source).read_text(encoding="utf-8")
        doc = json.loads(text)
    elif isinstance(source, str):
        doc = json.loads(source)
    else:
        doc = source
    if isinstance(doc, Mapping) and "algebras" in doc:
        entries = doc["algebras"]
    elif isinstance(doc, list):
        entries = doc
    else:
        entries = [doc]
    return [_parse_algebra(e)[0] for e in entries]


def raw_brackets(obj: Mapping) -> list:
    return _parse_algebra(obj)[1]


# ---------------------------------------------------------------- catalog


class Catalog:
    """Immutable name -> algebra map; ``with_algebra`` returns an extended copy."""

    def __init__(self, algebras=()):
        self._algs: dict[str, LieAlgebra] = {}
        for a in algebras:
            key = normalize_name(a.name)
            if key in self._algs:
                raise CatalogError(f"duplicate algebra name {a.name}")
            self._algs[key] = a

    def __iter__(self):
        return iter(self._algs.values())

    def __len__(self):
        return len(self._algs)

    def __contains__(self, name):
        return normalize_name(name) in self._algs

    def names(self) -> list[str]:
        return [a.name for a in self._algs.values()]

    def with_algebra(self, alg: LieAlgebra) -> "Catalog":
        c = Catalog(self._algs.values())
        c._algs[normalize_name(alg.name)] = alg
        return c

    def entry(self, name: str) -> LieAlgebra:
        """The stored (possibly symbolic) entry, without binding."""
        key = normalize_name(name)
        if key not in self._algs:
            raise UnknownAlgebraError(f"unknown algebra: {name}")
        return self._algs[key]

    def lookup(self, name: str, params: Mapping | None = None, allow_symbolic: bool = False) -> LieAlgebra:
        alg = self.entry(name)
        vals = {k: v for k, v in alg.params.items() if v is not None}
        vals.update({k: to_fraction(v) for k, v in (params or {}).items()})
        missing = [s for s in alg.params if s not in vals]
        if missing and not allow_symbolic:
            raise MissingParameterError(f"{alg.name}: parameter {missing[0]} must be bound")
        return alg.bound(vals) if vals else alg


_DEFAULT: Catalog | None = None


def default_catalog() -> Catalog:
    global _DEFAULT
    if _DEFAULT is None:
        text = resources.files("bihamlie").joinpath("data/algebras.json").read_text(encoding="utf-8")
        _DEFAULT = Catalog(load_algebras(text))
    return _DEFAULT


def lookup(name: str, params: Mapping | None = None, catalog: Catalog | None = None,
           allow_symbolic: bool = False) -> LieAlgebra:
    """Resolve a catalog name, bind parameters and check constraints."""
    return (catalog or default_catalog()).lookup(name, params, allow_symbolic)
