"""Solve the compatibility equations for A_{4,3} with a fixed constant P."""

from fractions import Fraction

from bihamlie.catalog import lookup
from bihamlie.expr import render
from bihamlie.solver import (AnsatzPattern, build_linear_stage, jacobi_constraints_constant,
                             membership, quadratic_residuals, solve_linear_stage, table_member_values)
from bihamlie.tables import table_row

alg = lookup("A_{4,3}")
pattern = AnsatzPattern.full(4)

print("Jacobi constraints on a constant P:")
for poly in jacobi_constraints_constant(alg, pattern):
    print("  ", render(poly), "= 0")

P = {"p12": Fraction(1), "p14": Fraction(2), "p23": Fraction(3)}
system = build_linear_stage(alg, P, pattern)
family = solve_linear_stage(system)
print(f"\nlinear stage: {len(system.rows)} rows, rank {family.rank}, nullity {family.nullity}")
print("free unknowns:", ", ".join(family.free))

residuals = quadratic_residuals(alg, family, pattern)
print(f"{len(residuals)} quadratic residuals, e.g.", render(residuals[0]) if residuals else "none")

# the tabulated P' at the same P and some sample family parameters
subs = {"p14": 2, "p23": 3, "a23": 1, "a24": -2, "a33": 5, "a53": 1, "pp12": 7}
values = table_member_values(table_row("A_{4,3}").Pprime, pattern, subs)
print("\ntable member:", {k: render(e) for k, e in sorted(values.items())})
print("in the family:", membership(system, family, values))
