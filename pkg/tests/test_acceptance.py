"""Acceptance criteria 1-9, one PASS/FAIL line each (printed in the terminal summary)."""

import os
import subprocess
import sys
import time
from pathlib import Path


from bihamlie.biham import (independence_rank, integrals, involution_check, lenard_check,
                            recursion_operator, torsion_check)
from bihamlie.catalog import default_catalog, lookup, validate
from bihamlie.expr import parse
from bihamlie.solver import recover_table, verify_table
from bihamlie.tables import load_tables, printed_vielbeins, table_row
from bihamlie.vielbein import compute_vielbein, structure_round_trip

from conftest import ACCEPTANCE

HERE = Path(__file__).parent

# concrete values for parametric catalog entries whose spectrum needs them
BIND = {"A_{4,5}^{-1,b}": {"b": 3}, "A_{4,5}^{a,-1}": {"a": 2}, "A_{4,5}^{a,-a}": {"a": 2},
        "A_{4,6}^{a,0}": {"a": 2}, "A_{4,9}^{b}": {"b": "1/3"}, "A_{4,11}^{b}": {"b": 3},
        "A_{6,5}": {"a": 1}, "A_{6,10}": {"a": -1}, "A_{6,18}": {"a": 2}}


def record(n, ok, detail, seconds):
    ACCEPTANCE.append(f"[{'PASS' if ok else 'FAIL'}] criterion {n}: {detail} ({seconds:.2f} s)")


def test_1_catalog_validity():
    t = time.perf_counter()
    cat = default_catalog()
    bad = [a.name for a in cat if validate(a)]
    dt = time.perf_counter() - t
    ok = not bad and dt < 5
    record(1, ok, f"{len(list(cat)) - len(bad)}/{len(list(cat))} algebras validate symbolically", dt)
    assert not bad and dt < 5


def test_2_vielbein_conformance():
    t = time.perf_counter()
    a41 = compute_vielbein(lookup("A_{4,1}")).frame
    want41 = [["1", "0", "0", "0"], ["x4", "1", "0", "0"], ["x4^2/2", "x4", "1", "0"], ["0", "0", "0", "1"]]
    ok41 = a41 == [[parse(s) for s in r] for r in want41]
    mism = []
    printed = printed_vielbeins()
    for name, grid in printed.items():
        alg = lookup(name, BIND.get(name, {}))
        bind = {k: v for k, v in alg.params.items() if v is not None}
        fr = compute_vielbein(alg).frame
        for i in range(6):
            for j in range(6):
                if parse(grid["normalized"][i][j], bind) != fr[i][j]:
                    mism.append((name, i + 1, j + 1, grid["printed"][i][j]))
    dt = time.perf_counter() - t
    # the x_30 fixture in A_{6,19} and an x_5 cell in A_{6,6} are printing errors, flagged not hidden
    flagged = {("A_{6,19}", 2, 6, "x_30"), ("A_{6,6}", 1, 6, "x_5")}
    ok = ok41 and set(mism) == flagged and dt < 10
    record(2, ok, f"A_{{4,1}} exact; {len(printed)} reference 6-d matrices, flagged cells {sorted(mism)}", dt)
    assert ok


def test_3_structure_round_trip():
    t = time.perf_counter()
    names = list(default_catalog().names())
    bad = [n for n in names if not structure_round_trip(compute_vielbein(lookup(n, BIND.get(n, {}))))]
    dt = time.perf_counter() - t
    record(3, not bad, f"{len(names) - len(bad)}/{len(names)} catalog algebras round trip", dt)
    assert not bad


def test_4_table_verification():
    t = time.perf_counter()
    rows = load_tables()
    reports = [verify_table(r) for r in rows]
    failing = {r.name: r.failures for r in reports if not r.ok}
    dt = time.perf_counter() - t
    npass = len(rows) - len(failing)
    ok = npass >= 19 and dt < 60
    record(4, ok, f"{npass}/{len(rows)} rows compatible as printed; failing {failing or 'none'}", dt)
    assert ok


def test_5_solver_recovery():
    t = time.perf_counter()
    out = {}
    for name in ("A_{4,1}", "A_{4,3}", "A_{6,1}", "A_{6,24}"):
        rep = recover_table(name)
        out[name] = rep.ok and rep.membership.quadratic_ok
    dt = time.perf_counter() - t
    record(5, all(out.values()), f"table P' recovered for {sorted(k for k, v in out.items() if v)}", dt)
    assert all(out.values())


def test_6_magri_morosi():
    t = time.perf_counter()
    bad = []
    for row in load_tables():
        P, Q = row.bivectors()
        N = recursion_operator(P, Q)
        H = integrals(N)
        checks = {"N": N.check(), "torsion": all(torsion_check(N).values()),
                  "lenard": lenard_check(P, Q, H).ok, "involution": involution_check(P, Q, H).ok}
        bad += [f"{row.name}:{k}" for k, v in checks.items() if not v]
    dt = time.perf_counter() - t
    n = len(load_tables())
    record(6, not bad, f"torsion, Lenard, involution exact on {n} pairs; failures {bad or 'none'}", dt)
    assert not bad


def test_7_tabulated_integrals():
    t = time.perf_counter()
    bad, anomalies = [], []
    rows = [r for r in load_tables() if r.integrals_text]
    for row in rows:
        P, Q = row.bivectors()
        H = integrals(recursion_operator(P, Q))
        ph = row.printed_integrals()
        if not (involution_check(P, Q, ph).ok and involution_check(P, Q, ph, H).ok):
            bad.append(row.name)
        if not lenard_check(P, Q, ph).ok:
            anomalies.append(row.name)
    dt = time.perf_counter() - t
    flagged = {"A_{4,5}^{a,-a}", "A_{6,9}"}
    ok = not bad and flagged <= set(anomalies)
    record(7, ok, f"{len(rows) - len(bad)}/{len(rows)} printed sets in bi-involution with traces; "
                  f"printed-vs-computed discrepancies {sorted(anomalies)}", dt)
    assert ok


def test_8_independence():
    t = time.perf_counter()
    short = {}
    rows = [r for r in load_tables() if r.integrals_text]
    for row in rows:
        ph = row.printed_integrals()
        rk = independence_rank(ph, m=row.dim, seed=0).rank
        if rk != len(ph):
            short[row.name] = f"rank {rk} of {len(ph)}"
    dt = time.perf_counter() - t
    record(8, not short, f"{len(rows) - len(short)}/{len(rows)} printed sets independent; short {short or 'none'}", dt)
    assert not short


def test_9_property_suites():
    selection = ("test_add_mul_commutative or test_associative_and_distributive or test_leibniz "
                 "or test_derivative_matches_finite_difference or test_jacobi_schouten_equivalence "
                 "or test_mixed_bilinearity or test_canonical_uniqueness or test_evaluation_homomorphism")
    t = time.perf_counter()
    r = subprocess.run([sys.executable, "-m", "pytest", "-q", "-p", "no:cacheprovider",
                        str(HERE / "test_expr_properties.py"), str(HERE / "test_poisson.py"), "-k", selection],
                       capture_output=True, text=True, cwd=HERE.parent, env={**os.environ, "PYTHONPATH": str(HERE)})
    dt = time.perf_counter() - t
    tail = r.stdout.strip().splitlines()[-1] if r.stdout.strip() else r.stderr[-200:]
    ok = r.returncode == 0 and dt < 30
    record(9, ok, f"property suites at 200 cases each: {tail}", dt)
    assert ok
