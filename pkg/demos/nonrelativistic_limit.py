"""How fast the relativistic two-point data approach their c -> infinity limit,
with the Lieb-Liniger energy curve for reference.

Run: python3 demos/nonrelativistic_limit.py
"""
from causalab.fock import ModeBasis, two_point_vacuum
from causalab.lieb_liniger import TONKS, solve_ll
from causalab.relcompare import (DispersionParams, TestFunction, convergence_scan,
                                 verify_lemma2)

f = TestFunction.gaussian(1.0, 3)
scan = convergence_scan(f, f, 0.0, [10.0, 1e2, 1e3, 1e4])
print("     c        deltaC")
for c, d in zip(scan.c, scan.deltaC):
    print(f"{c:8.0f}  {d:.4e}")
print(f"log-log slope {scan.slope:.4f}")

print("\n delta    eps       deltaC     margin")
for delta in (0.1, 0.3, 0.5, 1.0):
    r = verify_lemma2(f, f, 0.0, delta, DispersionParams(1.0, 10.0))
    print(f"{delta:5.1f}  {r.epsilon:.2e}  {r.deltaC:.2e}  {r.margin:.2e}")

for c in (5.0, 50.0, 1e3):
    basis = ModeBasis.from_functions([f], m0=1.0, c=c)
    ratio = (two_point_vacuum(basis, f, f, "relativistic") / two_point_vacuum(basis, f, f)).real
    print(f"c = {c:6g}: <Phi Phi>_rel / <Phi Phi>_nr = {ratio:.8f}")

print("\n  gamma     f(gamma)   f / (pi^2/3)")
for g in (0.1, 1.0, 10.0, 100.0, 1000.0):
    s = solve_ll(g)
    print(f"{g:7g}  {s.f_gamma:10.6f}  {s.f_gamma / TONKS:.6f}")
