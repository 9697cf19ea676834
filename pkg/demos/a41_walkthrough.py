"""A_{4,1} from structure constants to a certified bi-Hamiltonian system."""

from bihamlie.biham import (independence_rank, integrals, involution_check, lenard_check,
                            recursion_operator, torsion_check)
from bihamlie.catalog import lookup
from bihamlie.expr import render
from bihamlie.poisson import check_compatibility
from bihamlie.tables import table_row
from bihamlie.vielbein import compute_vielbein

alg = lookup("A_{4,1}")
print("brackets:", {k: render(c) for k, c in alg.structure.items()})

v = compute_vielbein(alg)
print("\nvielbein E (rows are frame indices):")
for row in v.frame:
    print("  ", [render(e) for e in row])

row = table_row("A_{4,1}")
P, Q = row.bivectors()
print("\ncoordinate P :", P.render())
print("coordinate P':", Q.render())
print("compatibility:", check_compatibility(P, Q).status)

N = recursion_operator(P, Q)
H = integrals(N)
print("\ndet P =", render(N.det))
for k, h in enumerate(H, 1):
    print(f"H{k} =", h)

print("\ntorsion free:", all(torsion_check(N).values()))
print("Lenard chain:", lenard_check(P, Q, H).ok)
print("involution  :", involution_check(P, Q, H).ok)
print("rank of dH  :", independence_rank(H, m=4).rank)

printed = row.printed_integrals()
print("\ntabulated integrals commute with the traces:", involution_check(P, Q, printed, H).ok)
