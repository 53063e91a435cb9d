"""Spectra, momentum defect and boundary currents for a particle in a box.

Run: python3 demos/walls_and_currents.py
"""
import math

import numpy as np

from causalab.boundary import (BoundarySpec, GridSpec, WaveFunction, boundary_term, flux_report,
                               momentum_symmetry_defect, solve_spectrum,
                               twisted_moment_partial_sums)
from causalab.spreading import decompose, evolve_bounded


def spectrum(bc, n, points=1024):
    return solve_spectrum(bc, GridSpec.for_boundary(bc, points), n)


print("lowest energies, L = 1")
for name, bc in [("dirichlet", BoundarySpec.dirichlet(1.0)),
                 ("neumann", BoundarySpec.neumann(1.0)),
                 ("robin(1, 1)", BoundarySpec.robin(1, 1, 1.0)),
                 ("robin(-1, -1)", BoundarySpec.robin(-1, -1, 1.0)),
                 ("twisted(pi/2)", BoundarySpec.twisted(math.pi / 2, 1.0))]:
    E = [m.energy for m in spectrum(bc, 4)]
    print(f"  {name:14s}" + "".join(f"{e:12.5f}" for e in E))

# <phi, p psi> - <p phi, psi> only sees the endpoints
bc = BoundarySpec.robin(2.0, 0.5, 1.0)
modes = spectrum(bc, 3)
g = modes[0].grid
phi = WaveFunction(g, modes[0].samples + 1j * modes[1].samples,
                   modes[0].derivative + 1j * modes[1].derivative)
psi = WaveFunction(g, modes[2].samples, modes[2].derivative)
print("\nmomentum defect, robin(2, 0.5):", momentum_symmetry_defect(phi, psi))
print("boundary term                  :", boundary_term(phi, psi))

# an evolving superposition moves but nothing leaves through the walls
psi0 = WaveFunction(g, (modes[0].samples + modes[1].samples) / math.sqrt(2))
dec = decompose(psi0, modes)
print("\n   t      j(0)        j(L)")
for t in (0.0, 0.05, 0.2):
    rep = flux_report(bc, evolve_bounded(dec, t))
    print(f"{t:5.2f}  {rep.j0: .2e}  {rep.jL: .2e}   {rep.classification.value}")

# twisted plane waves carry a current straight through the identified ends
tw = BoundarySpec.twisted(math.pi / 2, 1.0)
rep = flux_report(tw, spectrum(tw, 1)[0].wavefunction)
print(f"\ntwisted plane wave: j(0) = {rep.j0:.6f}, j(L) = {rep.jL:.6f}")

# second and fourth moments of a Dirichlet state in a twisted momentum basis
psi = solve_spectrum(BoundarySpec.dirichlet(1.0), GridSpec(1.0, 2 ** 14 + 1), 1)[0].wavefunction
counts = [32, 64, 128, 256, 512]
s2 = twisted_moment_partial_sums(psi, math.pi / 2, counts)
s4 = twisted_moment_partial_sums(psi, math.pi / 2, counts, power=4)
print("\n   N    sum k^2|c|^2   sum k^4|c|^2")
for n, a, b in zip(counts, s2, s4):
    print(f"{n:5d}  {a:12.6f}  {b:14.1f}")
print("pi^2 =", np.pi ** 2)
