import json
import math
from pathlib import Path

import numpy as np
import pytest

from causalab.lieb_liniger import TONKS, energy_density, scaling_residual, solve_ll

GOLDEN = json.loads((Path(__file__).parent / "golden.json").read_text())
GAMMAS = (0.1, 1.0, 10.0, 100.0, 1000.0)


@pytest.mark.parametrize("gamma", GAMMAS)
def test_solution_invariants(gamma):
    s = solve_ll(gamma, 256)
    assert s.residual < 1e-10 and s.consistency < 1e-10
    assert np.all(s.g >= 1 / (2 * math.pi))
    assert np.abs(s.g - s.g[::-1]).max() < 1e-12
    assert s.f_gamma > 0 and s.gamma == gamma
    assert s.grid is s.nodes


@pytest.mark.parametrize("gamma", GAMMAS)
def test_against_frozen_values(gamma):
    assert solve_ll(gamma, 256).f_gamma == pytest.approx(GOLDEN["ll_f_256"][str(gamma)], rel=1e-10)


def test_tonks_limit():
    f = solve_ll(1e3, 256).f_gamma
    assert 0.98 * TONKS <= f <= TONKS


def test_self_convergence():
    assert abs(solve_ll(1.0, 128).f_gamma - solve_ll(1.0, 256).f_gamma) < 1e-8


@pytest.mark.parametrize("n", [128, 256])
def test_f_increasing(n):
    f = [solve_ll(g, n).f_gamma for g in (0.1, 1.0, 10.0, 100.0)]
    assert all(b > a for a, b in zip(f, f[1:]))


def test_strong_coupling_expansion():
    # f = (pi^2/3)(1 - 4/gamma + 12/gamma^2 + ...) for large gamma
    g = 1e3
    approx = TONKS * (1 - 4 / g + 12 / g ** 2)
    assert solve_ll(g, 256).f_gamma == pytest.approx(approx, rel=1e-7)


def test_weak_coupling_trend():
    # e / rho^3 -> 0 as rho grows at fixed lambda
    vals = [energy_density(1.0, rho) / rho ** 3 for rho in (1.0, 10.0, 100.0)]
    assert vals[0] > vals[1] > vals[2] > 0


def test_scaling_identity():
    assert scaling_residual(1.0, 1.0, 2.0) < 1e-9
    # e(2 lambda, 2 rho) = 8 e(lambda, rho)
    assert energy_density(2.0, 2.0) == pytest.approx(8 * energy_density(1.0, 1.0), rel=1e-12)


@pytest.mark.parametrize("args", [(0.0, 256), (-1.0, 256), (1e-4, 256), (1.0, 32)])
def test_rejects_bad_input(args):
    with pytest.raises(ValueError):
        solve_ll(*args)


def test_scaling_residual_needs_distinct_densities():
    with pytest.raises(ValueError):
        scaling_residual(1.0, 2.0, 2.0)
    with pytest.raises(ValueError):
        energy_density(1.0, 0.0)
