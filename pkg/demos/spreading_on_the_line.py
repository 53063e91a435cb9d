"""Instantaneous spreading of a compactly supported state, and the dichotomy.

Run: python3 demos/spreading_on_the_line.py
"""
import numpy as np

from causalab.boundary import BoundarySpec, GridSpec, WaveFunction, solve_spectrum
from causalab.spreading import (NOISE_FLOOR, LocalizationOperator, bump_state, classify_dichotomy,
                                decompose, line_grid, p_A_series, tail_probability)

# probability beyond |x| = 2 for the bump that starts inside [-1, 1]
psi0 = bump_state(line_grid(1.0, 2 ** 18))
print(" t        P(|x| > 2)   resolved")
for t in (0.0, 1e-3, 5e-3, 1e-2, 2e-2, 5e-2):
    v = tail_probability(psi0, t, 2.0, strict=False)
    print(f"{t:<8g} {v:11.3e}   {t == 0 or v > NOISE_FLOOR}")

# free line: leaves [-1, 1] at once
A = LocalizationOperator((-1.0, 1.0), complement=True)
rec = p_A_series(bump_state(line_grid(1.0, 2 ** 14)), A, np.linspace(0, 1, 64), "free")
v = classify_dichotomy(rec)
print(f"\nfree bump, V = [-1, 1]: {v.branch.value}, zero fraction {v.zero_fraction:.3f}")

# box: a state can never leave the whole box
bc = BoundarySpec.dirichlet(1.0)
modes = solve_spectrum(bc, GridSpec.for_boundary(bc, 1024), 4)
psi = WaveFunction(modes[0].grid, sum(m.samples for m in modes) / 2)
for V in ((0.0, 1.0), (0.0, 0.5)):
    rec = p_A_series(psi, LocalizationOperator(V, complement=True), np.linspace(0, 1, 64),
                     decompose(psi, modes))
    print(f"box, V = {V}: {classify_dichotomy(rec).branch.value}, max p_A {rec.values.max():.2e}")
