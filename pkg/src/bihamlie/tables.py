"""Bundled compatible-pair fixtures (4-d symplectic and 6-d nilpotent rows)."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources

from .catalog import LieAlgebra, lookup, normalize_name
from .expr import Expression, RationalExpression, parse
from .poisson import BivectorField, antisymmetric, bivector_from_frame
from .vielbein import VielbeinMatrix, compute_vielbein

__all__ = [
    "TableRow",
    "UnknownRowError",
    "load_tables",
    "table_row",
    "row_names",
    "printed_vielbeins",
]


class UnknownRowError(KeyError):
    def __str__(self):
        return f"unknown table row: {self.args[0]!r}"


def _pair(key: str) -> tuple[int, int]:
    i, j = (int(s) for s in key.split(","))
    return i, j


@dataclass(frozen=True)
class TableRow:
    name: str
    table: int
    dim: int
    algebra_params: dict
    P_text: dict
    Pprime_text: dict
    side_conditions: tuple
    flags: tuple
    ansatz: str
    integrals_text: tuple = ()
    integral_flags: tuple = ()
    _cache: dict = field(default_factory=dict, compare=False, repr=False)

    @property
    def P(self) -> dict:
        return {k: parse(v) for k, v in self.P_text.items()}

    @property
    def Pprime(self) -> dict:
        return {k: parse(v) for k, v in self.Pprime_text.items()}

    def frame_P(self) -> list:
        return antisymmetric(self.dim, self.P)

    def frame_Pprime(self) -> list:
        return antisymmetric(self.dim, self.Pprime)

    def algebra(self) -> LieAlgebra:
        if "alg" not in self._cache:
            self._cache["alg"] = lookup(self.name, self.algebra_params)
        return self._cache["alg"]

    def vielbein(self) -> VielbeinMatrix:
        if "v" not in self._cache:
            self._cache["v"] = compute_vielbein(self.algebra())
        return self._cache["v"]

    def bivectors(self) -> tuple[BivectorField, BivectorField]:
        """Coordinate bivectors (bold P, bold P') on the group."""
        if "biv" not in self._cache:
            v = self.vielbein()
            self._cache["biv"] = (bivector_from_frame(self.frame_P(), v),
                                  bivector_from_frame(self.frame_Pprime(), v))
        return self._cache["biv"]

    def printed_integrals(self) -> list[RationalExpression]:
        return [RationalExpression(parse(t)) for t in self.integrals_text]

    def symbols(self) -> set[str]:
        out: set[str] = set()
        for e in list(self.P.values()) + list(self.Pprime.values()):
            out |= e.symbols()
        return out


def _row(obj) -> TableRow:
    integ = obj.get("integrals", {})
    return TableRow(
        name=obj["name"],
        table=int(obj["table"]),
        dim=int(obj["dim"]),
        algebra_params=dict(obj.get("algebra_params", {})),
        P_text={_pair(k): v for k, v in obj["P"].items()},
        Pprime_text={_pair(k): v for k, v in obj["Pprime"].items()},
        side_conditions=tuple(obj.get("side_conditions", ())),
        flags=tuple(obj.get("flags", ())),
        ansatz=obj.get("ansatz", "flat"),
        integrals_text=tuple(integ.get("printed", ())),
        integral_flags=tuple(integ.get("flags", ())),
    )


@lru_cache(maxsize=None)
def load_tables() -> tuple[TableRow, ...]:
    text = resources.files("bihamlie").joinpath("data/tables.json").read_text()
    doc = json.loads(text)
    return tuple(_row(r) for r in doc["rows"])


def row_names(table: int | None = None) -> list[str]:
    return [r.name for r in load_tables() if table is None or r.table == table]


def table_row(name: str) -> TableRow:
    key = normalize_name(name)
    for r in load_tables():
        if normalize_name(r.name) == key:
            return r
    raise UnknownRowError(name)


@lru_cache(maxsize=None)
def printed_vielbeins() -> dict:
    """Printed 6-d vielbein matrices: name -> {"printed", "normalized"} string grids."""
    text = resources.files("bihamlie").joinpath("data/vielbeins.json").read_text()
    doc = json.loads(text)
    return {m["name"]: {"printed": m["printed"], "normalized": m["normalized"]}
            for m in doc["matrices"]}
