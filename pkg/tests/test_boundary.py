import json
import math
from pathlib import Path

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from causalab.boundary import (BCKind, BoundarySpec, FluxClass, GridSpec, WaveFunction,
                               boundary_residual, boundary_term, current_density, flux_report,
                               momentum_spectrum_twisted, momentum_symmetry_defect,
                               probability_current, robin_count, robin_residual, solve_spectrum,
                               twisted_moment_partial_sums)
from causalab.errors import (BoundaryViolation, GridMismatch, GridTooCoarse, OutOfDomain)
from causalab.spreading import decompose, evolve_bounded

import oracles

GOLDEN = json.loads((Path(__file__).parent / "golden.json").read_text())


def spectrum(bc, n_modes, points=None):
    return solve_spectrum(bc, GridSpec.for_boundary(bc, points or max(512, 64 * n_modes)), n_modes)


def energies(bc, n_modes, points=None):
    return np.array([m.energy for m in spectrum(bc, n_modes, points)])


# --- types --------------------------------------------------------------------

def test_boundary_spec_validation():
    with pytest.raises(ValueError):
        BoundarySpec.dirichlet(0.0)
    with pytest.raises(ValueError):
        BoundarySpec.robin(math.inf, 1.0, 1.0)
    assert BoundarySpec.twisted(-0.5, 1.0).theta == pytest.approx(2 * math.pi - 0.5)
    assert BoundarySpec.neumann(1.0).kind is BCKind.ROBIN


def test_grid_spacing_and_minimum():
    assert GridSpec(1.0, 101).spacing == pytest.approx(0.01)
    assert GridSpec(1.0, 100, closed=False).spacing == pytest.approx(0.01)
    with pytest.raises(GridTooCoarse):
        GridSpec(1.0, 15)


def test_wavefunction_norm_matches_discrete_l2():
    g = GridSpec(2.0, 257)
    wf = WaveFunction.from_function(g, lambda x: np.sin(math.pi * x / 2) + 0.3j * x)
    direct = math.sqrt(float(np.dot(g.weights(), np.abs(wf.values) ** 2)))
    assert abs(wf.norm - direct) < 1e-12
    assert abs(wf.normalized().norm - 1) < 1e-12
    with pytest.raises(GridMismatch):
        WaveFunction(g, np.zeros(10))


# --- spectra ------------------------------------------------------------------

def test_dirichlet_closed_form():
    assert np.allclose(energies(BoundarySpec.dirichlet(math.pi), 3), [1, 4, 9], atol=1e-10, rtol=0)


def test_neumann_closed_form():
    e = energies(BoundarySpec.neumann(1.0), 3)
    assert np.allclose(e, [0, math.pi ** 2, 4 * math.pi ** 2], atol=1e-10, rtol=0)


def test_robin_against_finite_difference_oracle():
    e = energies(BoundarySpec.robin(1, 1, 1.0), 5)
    fd = np.array(GOLDEN["robin11_fd4000"])
    rich = np.array(GOLDEN["robin11_fd_richardson"])
    assert np.all(np.abs(e - fd) / e < 1e-6)
    assert np.all(np.abs(e - rich) / e < 1e-7)


def test_robin_fd_oracle_is_live():
    # the frozen golden numbers are reproducible from the oracle itself
    assert np.allclose(oracles.robin_fd_energies(1, 1, 1, 5, 4000), GOLDEN["robin11_fd4000"],
                       rtol=1e-12, atol=0)


def test_robin_residual_vanishes_at_eigenvalues():
    for m in spectrum(BoundarySpec.robin(1, 1, 1.0), 5):
        assert abs(robin_residual(m.energy, 1, 1, 1.0)) < 1e-8 * max(1, m.energy)


def test_twisted_periodic_degeneracy():
    e = energies(BoundarySpec.twisted(0.0, 1.0), 5)
    tp = (2 * math.pi) ** 2
    assert np.allclose(e, [0, tp, tp, 4 * tp, 4 * tp], atol=1e-10, rtol=0)


def test_dirichlet_limit_monotone_from_below():
    exact = np.array([(n * math.pi) ** 2 for n in (1, 2, 3)])
    prev = None
    for s in (10.0, 100.0, 1e3, 1e4):
        e = energies(BoundarySpec.robin(s, s, 1.0), 3)
        assert np.all(e < exact)
        if prev is not None:
            assert np.all(e > prev)
        prev = e
    assert np.all((exact - prev) / exact < 1e-3)


def test_attractive_robin_bound_states():
    e = energies(BoundarySpec.robin(-1, -1, 10.0), 4, points=4096)
    neg = e[e < 0]
    assert neg.size == 2
    assert np.all(np.abs(neg + 1) < 0.01)


def test_one_attractive_wall():
    # sigma0 < 0 alone supports one bound state close to -sigma0^2
    e = energies(BoundarySpec.robin(-3, 2, 5.0), 3, points=2048)
    assert (e < 0).sum() == 1 and abs(e[0] + 9) / 9 < 1e-3


def test_robin_count_is_sturm_index():
    bc = BoundarySpec.robin(1, 1, 1.0)
    for m in spectrum(bc, 5):
        assert robin_count(m.energy - 1e-6, 1, 1, 1.0) == m.index
        assert robin_count(m.energy + 1e-6, 1, 1, 1.0) == m.index + 1


@pytest.mark.parametrize("bc", [BoundarySpec.dirichlet(1.3), BoundarySpec.neumann(0.7),
                                BoundarySpec.robin(1, 1, 1.0), BoundarySpec.robin(-1, 2, 3.0),
                                BoundarySpec.robin(40, -0.5, 2.0)])
def test_orthonormality_nodes_and_residual(bc):
    modes = spectrum(bc, 6)
    S = np.array([m.samples for m in modes])
    G = (np.conj(S) * modes[0].grid.weights()) @ S.T
    assert np.abs(G - np.eye(6)).max() < 1e-8
    assert [m.node_count for m in modes] == list(range(6))
    assert all(boundary_residual(bc, m.wavefunction) < 1e-8 for m in modes)
    assert np.all(np.diff([m.energy for m in modes]) > 0)
    assert all(m.samples[np.flatnonzero(np.abs(m.samples) > 1e-12)[0]].real > 0 for m in modes)


def test_grid_preconditions():
    bc = BoundarySpec.dirichlet(1.0)
    with pytest.raises(GridTooCoarse):
        solve_spectrum(bc, GridSpec(1.0, 64), 5)
    with pytest.raises(GridMismatch):
        solve_spectrum(bc, GridSpec(2.0, 512), 3)


# --- twisted momenta ----------------------------------------------------------

def test_momenta_periodic_and_antiperiodic():
    k0 = momentum_spectrum_twisted(0.0, 1.0, 5)
    assert np.allclose(np.abs(k0), [0, 2 * math.pi, 2 * math.pi, 4 * math.pi, 4 * math.pi])
    assert sorted(k0[1:3]) == pytest.approx([-2 * math.pi, 2 * math.pi])
    kp = momentum_spectrum_twisted(math.pi, 1.0, 4)
    assert np.allclose(sorted(kp), [-3 * math.pi, -math.pi, math.pi, 3 * math.pi])


@settings(max_examples=20, deadline=None)
@given(st.floats(0.0, 2 * math.pi, exclude_max=True), st.floats(0.2, 5.0))
def test_twisted_energies_are_momentum_squares(theta, L):
    n = 7
    ks = momentum_spectrum_twisted(theta, L, n)
    assert np.all(np.diff(np.abs(ks)) >= -1e-12)
    e = np.sort(energies(BoundarySpec.twisted(theta, L), n))
    assert np.abs(e - np.sort(np.square(ks))).max() <= 1e-10 * max(1.0, e.max())


# --- momentum defect ----------------------------------------------------------

def test_defect_examples():
    L = 1.0
    g = GridSpec(L, 2049)
    d1 = spectrum(BoundarySpec.dirichlet(L), 1, 2049)[0].wavefunction
    assert abs(momentum_symmetry_defect(d1, d1)) < 1e-10
    const = WaveFunction.from_function(g, lambda x: np.full_like(x, 1 / math.sqrt(L), dtype=complex))
    assert abs(momentum_symmetry_defect(const, const)) < 1e-10
    wave = WaveFunction.from_function(g, lambda x: np.exp(1j * math.pi * x / L) / math.sqrt(L))
    assert abs(momentum_symmetry_defect(const, wave) - 2j / L) < 1e-8


def _smooth(rng, g):
    c = rng.normal(size=(2, 6))
    freq = np.arange(6)
    x = g.points

    def f(x):
        return (c[0] @ np.cos(np.outer(freq, x)) + 1j * (c[1] @ np.sin(np.outer(freq + 0.5, x))))
    return WaveFunction(g, f(x))


def test_defect_identity_random_smooth_pairs():
    rng = np.random.default_rng(11)
    g = GridSpec(1.7, 2049)
    for _ in range(100):
        phi, psi = _smooth(rng, g), _smooth(rng, g)
        scale = max(1.0, float(np.abs(phi.values).max() * np.abs(psi.values).max()))
        assert abs(momentum_symmetry_defect(phi, psi) - boundary_term(phi, psi)) < 1e-8 * scale


def test_defect_needs_same_grid():
    a = WaveFunction(GridSpec(1.0, 64), np.ones(64))
    b = WaveFunction(GridSpec(1.0, 65), np.ones(65))
    with pytest.raises(GridMismatch):
        momentum_symmetry_defect(a, b)


# --- currents -----------------------------------------------------------------

def test_real_state_has_no_current():
    g = GridSpec(1.0, 257)
    wf = WaveFunction.from_function(g, lambda x: np.exp(-x) * np.cos(5 * x))
    assert np.abs(current_density(wf)).max() == 0.0


def test_plane_wave_current():
    L, k = 2.0, 3 * math.pi
    g = GridSpec(L, 400, closed=False)
    wf = WaveFunction(g, np.exp(1j * k * g.points) / math.sqrt(L), 1j * k * np.exp(1j * k * g.points) / math.sqrt(L))
    for x in (0.0, 0.5, 1.995, 2.0):
        assert probability_current(wf, x) == pytest.approx(2 * k / L, rel=1e-14)
    with pytest.raises(OutOfDomain):
        probability_current(wf, 0.0012)


def test_robin_ground_state_boundary_current():
    bc = BoundarySpec.robin(1, 1, 1.0)
    m = spectrum(bc, 1)[0]
    rep = flux_report(bc, m.wavefunction)
    assert abs(rep.j0) < 1e-8 and abs(rep.jL) < 1e-8


def test_flux_classification():
    bc = BoundarySpec.dirichlet(1.0)
    assert flux_report(bc, spectrum(bc, 2)[1].wavefunction).classification is FluxClass.ISOLATED
    tw = BoundarySpec.twisted(math.pi / 2, 1.0)
    mode = spectrum(tw, 1)[0]
    rep = flux_report(tw, mode.wavefunction)
    assert rep.classification is FluxClass.THROUGHFLOW
    assert rep.j0 == pytest.approx(rep.jL, abs=1e-12) and abs(rep.j0) > 1.0


def test_evolved_robin_superposition_is_isolated():
    bc = BoundarySpec.robin(1, 1, 1.0)
    modes = spectrum(bc, 2)
    psi0 = WaveFunction(modes[0].grid, (modes[0].samples + modes[1].samples) / math.sqrt(2))
    psi = evolve_bounded(decompose(psi0, modes), 0.1)
    rep = flux_report(bc, psi)
    assert rep.classification is FluxClass.ISOLATED
    assert abs(rep.j0) < 1e-6 and abs(rep.jL) < 1e-6
    # the interior current is not zero: the superposition does move
    assert np.abs(current_density(psi)).max() > 1e-2


def test_flux_report_rejects_wrong_boundary():
    g = GridSpec(1.0, 129)
    wf = WaveFunction.from_function(g, lambda x: np.cos(x) + 0j)
    with pytest.raises(BoundaryViolation):
        flux_report(BoundarySpec.dirichlet(1.0), wf)


# --- twisted expansion of Dirichlet states ---------------------------------------

@pytest.mark.parametrize("theta", [0.0, 1.0, math.pi / 2, math.pi])
def test_dirichlet_ground_state_second_moment_converges(theta):
    # psi(0) = psi(L) = 0 satisfies every twisted condition, so sum k^2 |c|^2
    # is finite and approaches <psi, p^2 psi> = (pi/L)^2
    L = 1.0
    psi = spectrum(BoundarySpec.dirichlet(L), 1, 2 ** 14 + 1)[0].wavefunction
    s = twisted_moment_partial_sums(psi, theta, [64, 128, 256, 512])
    assert abs(s[-1] - math.pi ** 2) < 3e-2  # tail of a 1/k^2 series, O(1/N)
    assert all(b / a < 1.01 for a, b in zip(s, s[1:]))


@pytest.mark.parametrize("theta", [0.0, 1.0, math.pi / 2])
def test_dirichlet_ground_state_fourth_moment_diverges(theta):
    # p psi = -i psi' misses the twisted condition, so sum k^4 |c|^2 grows linearly
    psi = spectrum(BoundarySpec.dirichlet(1.0), 1, 2 ** 14 + 1)[0].wavefunction
    s = twisted_moment_partial_sums(psi, theta, [32, 64, 128, 256, 512], power=4)
    ratios = [b / a for a, b in zip(s, s[1:])]
    assert all(r >= 1.5 for r in ratios)
