"""Command-line front end: catalog -> vielbein -> solver -> bi-Hamiltonian analysis.

Every run produces one versioned, deterministic JSON document; the human
format is rendered from it.  Exit codes: 0 all identity checks passed,
1 an identity check failed, 2 usage or configuration error, 3 unsupported
spectrum in a matrix exponential.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from . import __version__
from .biham import (SingularBivectorError, independence_rank, integrals, involution_check,
                    lenard_check, recursion_operator, torsion_check)
from .catalog import CatalogError, LieAlgebra, default_catalog, load_algebras, validate
from .expr import ExpressionError, parse, render
from .poisson import BivectorField, antisymmetric, bivector_from_frame, check_compatibility
from .solver import AnsatzPattern, recover_table, solve, verify_pair, verify_table
from .tables import TableRow, UnknownRowError, load_tables, printed_vielbeins, table_row
from .vielbein import UnsupportedSpectrumError, compute_vielbein, structure_round_trip

SCHEMA = "bihamlie-report/1"
COMMANDS = ("list", "show-vielbein", "solve", "verify-table", "analyze", "report-all")

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_SPECTRUM = 0, 1, 2, 3


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    command: str
    algebra: str | None = None
    params: dict = field(default_factory=dict)
    pattern: dict | None = None
    seed: int = 0
    k_max: int | None = None
    out: str | None = None
    format: str = "structured"


@dataclass
class ReportDocument:
    metadata: dict
    sections: dict
    failed: list = field(default_factory=list)
    error: dict | None = None
    exit_code: int = EXIT_OK

    def to_obj(self) -> dict:
        status = {"ok": not self.failed and self.error is None, "failed_checks": list(self.failed)}
        if self.error is not None:
            status["error"] = self.error
        return {"schema": SCHEMA, "metadata": self.metadata, "sections": self.sections, "status": status}

    def to_json(self) -> str:
        return json.dumps(self.to_obj(), indent=2, sort_keys=True, ensure_ascii=False) + "\n"

    def to_human(self) -> str:
        lines: list[str] = []
        _human(self.to_obj(), 0, lines)
        return "\n".join(lines) + "\n"


def _human(obj, depth: int, lines: list):
    pad = "  " * depth
    if isinstance(obj, dict):
        for k in sorted(obj):
            v = obj[k]
            if isinstance(v, (dict, list)) and v:
                lines.append(f"{pad}{k}:")
                _human(v, depth + 1, lines)
            else:
                lines.append(f"{pad}{k}: {_scalar(v)}")
    elif isinstance(obj, list):
        for v in obj:
            if isinstance(v, (dict, list)) and v:
                lines.append(f"{pad}-")
                _human(v, depth + 1, lines)
            else:
                lines.append(f"{pad}- {_scalar(v)}")
    else:
        lines.append(pad + _scalar(obj))


def _scalar(v) -> str:
    if isinstance(v, bool):
        return "yes" if v else "no"
    if v is None:
        return "-"
    if isinstance(v, (dict, list)):
        return "(none)"
    return str(v)


# ---------------------------------------------------------------- resolution


def _resolve_algebra(cfg: RunConfig, allow_symbolic: bool = False) -> LieAlgebra:
    if not cfg.algebra:
        raise ConfigError("--algebra is required for this command")
    cat = default_catalog()
    name = cfg.algebra
    if os.path.isfile(name):
        algs = load_algebras(name)
        for a in algs:
            cat = cat.with_algebra(a)
        name = algs[0].name
    return cat.lookup(name, cfg.params, allow_symbolic=allow_symbolic)


def _row_for(name: str) -> TableRow | None:
    try:
        return table_row(name)
    except UnknownRowError:
        return None


def _frame_from(obj, m: int) -> list:
    upper = {}
    for k, v in obj.items():
        i, j = (int(s) for s in str(k).split(","))
        upper[(i, j)] = parse(str(v))
    return antisymmetric(m, upper)


def _q(v) -> str:
    return str(Fraction(v))


# ---------------------------------------------------------------- sections


def _validation(alg: LieAlgebra) -> dict:
    viol = validate(alg)
    return {"ok": not viol, "violations": [str(x) for x in viol]}


def _vielbein_section(alg: LieAlgebra, v) -> tuple[dict, list]:
    failed = []
    check = v.check()
    round_trip = structure_round_trip(v)
    if check:
        failed.append("vielbein.identity")
    if not round_trip:
        failed.append("vielbein.structure_round_trip")
    sec = {
        "frame": [[render(e) for e in row] for row in v.frame],
        "dual": [[render(e) for e in row] for row in v.dual],
        "checks": {"frame_dual_identity": not check, "problems": check, "structure_round_trip": round_trip},
    }
    printed = printed_vielbeins().get(alg.name)
    if printed is not None:
        bind = {k: val for k, val in alg.params.items() if val is not None}
        diffs = []
        for i in range(v.dim):
            for j in range(v.dim):
                raw = printed["printed"][i][j]
                try:
                    ok = parse(printed["normalized"][i][j], bind) == v.frame[i][j]
                except ExpressionError:
                    ok = False
                if not ok:
                    diffs.append({"entry": [i + 1, j + 1], "printed": raw, "computed": render(v.frame[i][j])})
        sec["printed_table"] = {"matches": not diffs, "discrepancies": diffs}
    return sec, failed


def _biham_section(P: BivectorField, Q: BivectorField, k_max, seed: int, row: TableRow | None) -> tuple[dict, list]:
    failed = []
    try:
        N = recursion_operator(P, Q)
    except SingularBivectorError:
        return {"invertible": False}, ["biham.invertible"]
    H = integrals(N, k_max)
    np_ok = N.check()
    tors = torsion_check(N)
    L = lenard_check(P, Q, H)
    I = involution_check(P, Q, H)
    rk = independence_rank(H, m=P.dim, seed=seed)
    for name, ok in (("biham.N_times_P", np_ok), ("biham.torsion", all(tors.values())),
                     ("biham.lenard", L.ok), ("biham.involution", I.ok)):
        if not ok:
            failed.append(name)
    sec = {
        "invertible": True,
        "det_P": render(N.det),
        "N_times_P_equals_Pprime": np_ok,
        "k_max": H.k_max,
        "integrals": H.render(),
        "torsion": {"ok": all(tors.values()), "failing_pairs": [list(p) for p, ok in sorted(tors.items()) if not ok]},
        "lenard": {"ok": L.ok, "links": [{"k": k, "ok": ok, "residual": res} for k, ok, res in L.links]},
        "involution": {"ok": I.ok, "pairs": [{"pair": list(p), "P": a, "P'": b} for p, (a, b) in sorted(I.pairs.items())]},
        "independence": _rank_obj(rk),
    }
    if row is not None and row.integrals_text:
        ph = row.printed_integrals()
        Ip = involution_check(P, Q, ph)
        Ix = involution_check(P, Q, ph, H)
        Lp = lenard_check(P, Q, ph)
        prk = independence_rank(ph, m=P.dim, seed=seed)
        same = [ph[i] == H[i] for i in range(min(len(ph), len(H)))]
        sec["printed_integrals"] = {
            "printed": list(row.integrals_text),
            "mutual_involution": Ip.ok,
            "involution_with_traces": Ix.ok,
            "lenard": Lp.ok,
            "equal_to_trace": same,
            "independence": _rank_obj(prk),
            "expected_count": len(ph),
            "flags": list(row.integral_flags),
        }
    return sec, failed


def _rank_obj(rk) -> dict:
    return {
        "rank": rk.rank,
        "exact": rk.exact,
        "seed": rk.seed,
        "points": [{"x": {f"x{i}": _q(q) for i, q in sorted(pt.items())},
                    "symbols": {s: _q(q) for s, q in sorted(sv.items())}} for pt, sv in rk.points],
    }


# ---------------------------------------------------------------- commands


def _cmd_list(cfg: RunConfig, doc: ReportDocument):
    doc.sections["algebras"] = [
        {"name": a.name, "dim": a.dim, "params": sorted(a.params), "source": a.source}
        for a in default_catalog()
    ]
    doc.sections["table_rows"] = [{"name": r.name, "table": r.table, "dim": r.dim} for r in load_tables()]


def _cmd_show_vielbein(cfg: RunConfig, doc: ReportDocument):
    alg = _resolve_algebra(cfg, allow_symbolic=True)
    doc.sections["validation"] = _validation(alg)
    if not doc.sections["validation"]["ok"]:
        doc.failed.append("catalog.validation")
    sec, failed = _vielbein_section(alg, compute_vielbein(alg))
    doc.sections["vielbein"] = sec
    doc.failed.extend(failed)


def _cmd_verify(cfg: RunConfig, doc: ReportDocument):
    rows = [table_row(cfg.algebra)] if cfg.algebra else list(load_tables())
    out = []
    for r in rows:
        rep = verify_table(r)
        out.append(rep.to_obj())
        if not rep.ok:
            doc.failed.append(f"compatibility.{r.name}")
    doc.sections["compatibility"] = out if len(out) != 1 else out[0]


def _pattern_for(cfg: RunConfig, dim: int, row: TableRow | None) -> AnsatzPattern:
    if cfg.pattern and "dim" in cfg.pattern:
        pat = AnsatzPattern.from_obj(cfg.pattern)
        if pat.dim != dim:
            raise ConfigError("pattern dimension does not match the algebra")
        return pat
    return AnsatzPattern.full(dim, row.ansatz if row else None)


def _cmd_solve(cfg: RunConfig, doc: ReportDocument):
    alg = _resolve_algebra(cfg)
    row = _row_for(alg.name)
    pat = _pattern_for(cfg, alg.dim, row)
    if cfg.pattern and "P" in cfg.pattern:
        vals = {}
        for k, v in cfg.pattern["P"].items():
            i, j = (int(s) for s in k.split(","))
            vals[pat.p_symbol(i, j)] = Fraction(str(v))
        pat = AnsatzPattern(pat.dim, tuple(sorted({tuple(map(int, k.split(","))) for k in cfg.pattern["P"]})),
                            pat.pprime_entries, pat.constants, pat.style)
        fam = solve(alg, vals, pat)
        doc.sections["solver"] = {
            "algebra": alg.name, "P_pattern": [list(p) for p in pat.p_entries],
            "P_values": {k: _q(q) for k, q in sorted(vals.items())},
            "linear_rank": fam.rank, "nullity": fam.nullity,
            "family": fam.to_obj(), "table_match": None,
        }
        return
    if row is None:
        raise ConfigError(f"{alg.name} has no stored table row; give P values in the pattern file")
    rep = recover_table(row, cfg.seed, pat)
    sec = rep.to_obj()
    sec["P_pattern"] = [list(p) for p in sorted(row.P_text)]
    sec["family"] = rep.family.to_obj()
    doc.sections["solver"] = sec
    if not rep.ok:
        doc.failed.append(f"solver.table_match.{row.name}")


def _cmd_analyze(cfg: RunConfig, doc: ReportDocument):
    if cfg.pattern and "P" in cfg.pattern and "Pprime" in cfg.pattern:
        alg = _resolve_algebra(cfg)
        v = compute_vielbein(alg)
        Pf = _frame_from(cfg.pattern["P"], alg.dim)
        Qf = _frame_from(cfg.pattern["Pprime"], alg.dim)
        rep = verify_pair(alg.name, v, Pf, Qf)
        row = None
    else:
        row = table_row(cfg.algebra) if cfg.algebra else None
        if row is None:
            raise ConfigError("--algebra is required for this command")
        alg, v = row.algebra(), row.vielbein()
        Pf, Qf = row.frame_P(), row.frame_Pprime()
        rep = verify_table(row)
    doc.sections["compatibility"] = rep.to_obj()
    if not rep.ok:
        doc.failed.append("compatibility")
    P, Q = bivector_from_frame(Pf, v), bivector_from_frame(Qf, v)
    sec, failed = _biham_section(P, Q, cfg.k_max, cfg.seed, row)
    doc.sections["biham"] = sec
    doc.failed.extend(failed)


def _cmd_report_all(cfg: RunConfig, doc: ReportDocument):
    out = {}
    for row in sorted(load_tables(), key=lambda r: r.name):
        entry = {}
        rep = verify_table(row)
        entry["compatibility"] = rep.to_obj()
        if not rep.ok:
            doc.failed.append(f"compatibility.{row.name}")
        rec = recover_table(row, cfg.seed)
        entry["solver"] = rec.to_obj()
        if not rec.ok:
            doc.failed.append(f"solver.{row.name}")
        P, Q = row.bivectors()
        sec, failed = _biham_section(P, Q, cfg.k_max, cfg.seed, row)
        entry["biham"] = sec
        doc.failed.extend(f"{f}.{row.name}" for f in failed)
        out[row.name] = entry
    doc.sections["rows"] = out


_DISPATCH = {
    "list": _cmd_list,
    "show-vielbein": _cmd_show_vielbein,
    "solve": _cmd_solve,
    "verify-table": _cmd_verify,
    "analyze": _cmd_analyze,
    "report-all": _cmd_report_all,
}


def run(cfg: RunConfig) -> ReportDocument:
    if cfg.command not in _DISPATCH:
        raise ConfigError(f"unknown command {cfg.command!r}")
    meta = {
        "tool": "bihamlie",
        "version": __version__,
        "command": cfg.command,
        "seed": cfg.seed,
        "algebra": cfg.algebra,
        "params": {k: _q(v) for k, v in sorted(cfg.params.items())},
        "k_max": cfg.k_max,
    }
    doc = ReportDocument(meta, {})
    stage = cfg.command
    try:
        _DISPATCH[cfg.command](cfg, doc)
    except UnsupportedSpectrumError as e:
        doc.error = {"stage": stage, "kind": "unsupported-spectrum", "message": str(e)}
        doc.exit_code = EXIT_SPECTRUM
        return doc
    except (ConfigError, CatalogError, UnknownRowError, ValueError) as e:
        doc.error = {"stage": stage, "kind": type(e).__name__, "message": str(e).strip("'\"")}
        doc.exit_code = EXIT_USAGE
        return doc
    doc.exit_code = EXIT_FAIL if doc.failed else EXIT_OK
    return doc


# ---------------------------------------------------------------- argv


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="bihamlie", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"bihamlie {__version__}")
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--algebra", help="catalog name, table row name, or path to an algebra JSON file")
    p.add_argument("--param", action="append", default=[], metavar="K=V",
                   help="bind an algebra parameter (repeatable)")
    p.add_argument("--pattern", help="JSON file with an ansatz pattern and/or explicit P, Pprime")
    p.add_argument("--kmax", type=int, default=None)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", help="write the report here instead of stdout")
    p.add_argument("--format", choices=("structured", "human"), default="structured")
    return p


def config_from_argv(argv: Sequence[str]) -> RunConfig:
    ns = _parser().parse_args(argv)
    params = {}
    for item in ns.param:
        if "=" not in item:
            raise ConfigError(f"--param expects K=V, got {item!r}")
        k, v = item.split("=", 1)
        try:
            params[k.strip()] = Fraction(v.strip())
        except ValueError:
            raise ConfigError(f"--param value is not rational: {v!r}") from None
    pattern = None
    if ns.pattern:
        try:
            with open(ns.pattern, encoding="utf-8") as fh:
                pattern = json.load(fh)
        except (OSError, json.JSONDecodeError) as e:
            raise ConfigError(f"cannot read pattern file: {e}") from None
    if ns.kmax is not None and ns.kmax < 1:
        raise ConfigError("--kmax must be at least 1")
    return RunConfig(ns.command, ns.algebra, params, pattern, ns.seed, ns.kmax, ns.out, ns.format)


def main(argv: Sequence[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        cfg = config_from_argv(argv)
    except SystemExit as e:  # argparse usage errors
        return EXIT_USAGE if e.code else EXIT_OK
    except ConfigError as e:
        print(f"bihamlie: {e}", file=sys.stderr)
        return EXIT_USAGE
    doc = run(cfg)
    text = doc.to_human() if cfg.format == "human" else doc.to_json()
    if cfg.out:
        with open(cfg.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    if doc.error is not None:
        print(f"bihamlie: {doc.error['stage']}: {doc.error['message']}", file=sys.stderr)
    return doc.exit_code


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
