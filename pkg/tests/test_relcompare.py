import json
import math
import warnings
from pathlib import Path

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.special import erfc

from causalab.relcompare import (DispersionParams, TestFunction, TFKind, beta, bound_rhs,
                                 convergence_scan, delta_C, epsilon_for_delta, kernel_gap,
                                 kernel_mismatch_certificate, kernel_pair, kinetic_rel, omega_c,
                                 pointwise_inequalities, radial_integral, verify_lemma2)

import oracles

GOLDEN = json.loads((Path(__file__).parent / "golden.json").read_text())
P10 = DispersionParams(1.0, 10.0)


# --- dispersion ---------------------------------------------------------------

def test_params_validation():
    with pytest.raises(ValueError):
        DispersionParams(0.0, 1.0)
    with pytest.raises(ValueError):
        DispersionParams(1.0, math.inf)


def test_omega_examples():
    p = DispersionParams(2.0, 3.0)
    assert omega_c(0.0, p) == pytest.approx(18.0, rel=1e-15)
    d = 0.7
    assert omega_c(2.0 * 3.0 * d, p) == pytest.approx(18.0 * math.sqrt(1 + d * d), rel=1e-15)
    assert omega_c(1.0, DispersionParams(1.0, 1.0)) == pytest.approx(math.sqrt(2), rel=1e-15)
    k = np.linspace(-5, 5, 11)
    assert np.array_equal(omega_c(k, p), omega_c(-k, p)) and np.all(omega_c(k, p) >= 18.0)


def test_kinetic_rel_is_stable():
    p = DispersionParams(1.0, 1e6)
    # naive omega - m0 c^2 loses everything here; the series k^2/2m0 - k^4/8m0^3c^2 does not
    k = 1e-3
    assert kinetic_rel(k, p) == pytest.approx(k * k / 2 - k ** 4 / 8e12, rel=1e-14)


def test_kernel_examples():
    knr, kr = kernel_pair(0.0, P10)
    assert knr == kr == 0.5
    knr, kr = kernel_pair(1.0, P10)
    direct = 10.0 ** 2 / (2 * math.sqrt(10.0 ** 2 + 10.0 ** 4))
    assert kr == pytest.approx(5 / math.sqrt(101), rel=1e-15) and kr == pytest.approx(direct, rel=1e-15)
    for d in (0.1, 0.5, 1.0):
        gap = kernel_gap(10.0 * d, P10)
        assert gap == pytest.approx(0.5 * (1 - 1 / math.sqrt(1 + d * d)), rel=1e-13)
        assert gap <= d * d / 4


@settings(max_examples=50, deadline=None)
@given(st.floats(0.0, 1e4), st.floats(0.1, 10.0), st.floats(0.5, 1e3), st.floats(-1.0, 1.0))
def test_kernel_and_beta_bounds(k, m0, c, tau):
    p = DispersionParams(m0, c)
    knr, kr = kernel_pair(k, p)
    assert kr <= knr
    assert abs(beta(k, tau, p)) <= 1 / m0 * (1 + 1e-12)


def test_beta_examples():
    assert beta(0.0, 0.0, P10) == 0
    k = np.linspace(0, 30, 31)
    b = beta(k, 0.0, P10)
    assert np.all(b.imag == 0) and np.all(b.real >= 0)
    assert np.allclose(b.real, kernel_gap(k, P10), rtol=1e-15, atol=0)


def test_beta_against_series():
    p = DispersionParams(1.0, 4.0)
    ref = complex(*GOLDEN["beta_series_m1_c4_k1_tau01"])
    assert abs(beta(1.0, 0.1, p) - ref) < 1e-15
    assert abs(oracles.beta_series(1.0, 0.1, 1.0, 4.0) - ref) == 0


def test_beta_vanishes_as_c_grows():
    vals = [abs(beta(2.0, 0.3, DispersionParams(1.0, c))) for c in (10.0, 1e2, 1e3, 1e4)]
    assert all(b < a for a, b in zip(vals, vals[1:])) and vals[-1] < 1e-7


# --- test functions -----------------------------------------------------------

@pytest.mark.parametrize("tf", [TestFunction.gaussian(1.0, 3), TestFunction.gaussian(0.5, 1),
                                TestFunction.bump(1.0, 3), TestFunction.bump(2.0, 1),
                                TestFunction.momentum_shell(1.0, 2.0, 3)])
def test_parseval(tf):
    assert tf.check_parseval() <= 1e-8


def test_bump_transform_is_entire():
    tf = TestFunction.bump(1.0, 3)
    # no zero of f~ on a half-line: spot check far out on a fine grid
    k = np.linspace(20.0, 21.0, 101)
    assert np.all(np.abs(tf.ft(k)) > 0)


def test_radial_vs_tensor_product():
    for tf in (TestFunction.gaussian(1.0, 3), TestFunction.gaussian(0.7, 3)):
        g = lambda k: np.abs(tf.ft(k)) ** 2 * kernel_gap(k, P10)
        assert abs(radial_integral(g, 3).real - oracles.tensor_3d(g, scale=2.0)) < 1e-8


# --- delta C ------------------------------------------------------------------

def test_delta_c_disjoint_supports():
    f1 = TestFunction.momentum_shell(0.0, 1.0, 3)
    f2 = TestFunction.momentum_shell(2.0, 3.0, 3)
    assert delta_C(f1, f2, 0.1, P10) == 0.0


def test_delta_c_dual_quadrature():
    f = TestFunction.gaussian(1.0, 3)
    v = delta_C(f, f, 0.0, P10)
    assert v > 0
    assert abs(v - GOLDEN["gap_gauss_c10_hermite"]) < 1e-9
    ref = oracles.radial_quad_scipy(lambda k: np.abs(f.ft(k)) ** 2 * kernel_gap(k, P10))
    assert abs(v - ref) < 1e-9


def test_delta_c_quarter_per_doubling():
    f = TestFunction.gaussian(1.0, 3)
    r = delta_C(f, f, 0.0, P10) / delta_C(f, f, 0.0, DispersionParams(1.0, 20.0))
    assert abs(r / 4 - 1) < 0.02


def test_delta_c_symmetric():
    f1, f2 = TestFunction.gaussian(1.0, 3), TestFunction.bump(1.5, 3)
    for tau in (0.0, 0.01, 0.3):
        assert abs(delta_C(f1, f2, tau, P10) - delta_C(f2, f1, tau, P10)) < 1e-10


def test_delta_c_dimension_mismatch():
    with pytest.raises(ValueError):
        delta_C(TestFunction.gaussian(1.0, 1), TestFunction.gaussian(1.0, 3), 0.0, P10)


# --- epsilon and the bound ----------------------------------------------------

def test_epsilon_gaussian_closed_forms():
    f1 = TestFunction.gaussian(1.0, 1)
    for d in (0.05, 0.1, 0.3):
        K = 10.0 * d
        # direct quadrature of the normalized 1D profile against the erfc form
        tail = 2 * radial_integral(lambda k: np.abs(f1.ft(k)) ** 2, 1, lower=K).real / 2
        assert abs(epsilon_for_delta(f1, d, P10) - erfc(K)) < 1e-15
        assert abs(tail - erfc(K)) < 1e-10


def test_epsilon_monotone_and_limits():
    f = TestFunction.gaussian(1.0, 3)
    eps = [epsilon_for_delta(f, d, P10) for d in (0.01, 0.05, 0.1, 0.3, 1.0, 100.0)]
    assert all(b <= a for a, b in zip(eps, eps[1:]))
    assert 0 <= eps[-1] < 1e-300 and eps[0] <= 1


def test_epsilon_bump_always_positive():
    f = TestFunction.bump(1.0, 3)
    for d in (0.5, 1.0, 2.0):
        assert epsilon_for_delta(f, d, P10) > 0


def test_lemma2_golden_margin():
    f = TestFunction.gaussian(1.0, 3)
    rep = verify_lemma2(f, f, 0.0, 0.5, P10)
    assert rep.passed and rep.margin > 0
    assert rep.margin == pytest.approx(GOLDEN["lemma2_margin_d05_c10_tau0"], rel=1e-12)
    assert rep.rhs == 2 * rep.epsilon + 0.5 ** 2 / 2
    assert min(rep.delta, rep.epsilon, rep.deltaC, rep.lhs, rep.rhs) >= 0


def test_bound_rhs_time_term():
    assert bound_rhs(0.1, 0.5, -0.01, P10) == pytest.approx(0.2 + 0.125 + 0.01 * 100 * 0.0625 / 8)


def test_pointwise_inequalities_zero_violations():
    for c in (5.0, 10.0, 50.0):
        for d in (0.1, 0.5, 1.0):
            for tau in (0.0, 0.01, 1.0):
                chk = pointwise_inequalities(DispersionParams(1.0, c), d, tau)
                assert chk.ok and chk.n_points == 1000


def test_verbatim_variant_differs():
    f = TestFunction.gaussian(1.0, 3)
    assert delta_C(f, f, 0.0, P10, verbatim=True) == 0.0  # (f - f) vanishes identically
    g = TestFunction.gaussian(0.5, 3)
    assert delta_C(f, g, 0.0, P10, verbatim=True) != pytest.approx(delta_C(f, g, 0.0, P10))


# --- c -> infinity ------------------------------------------------------------

@pytest.mark.parametrize("tau", [0.0, 0.01])
def test_convergence_slope(tau):
    f = TestFunction.gaussian(1.0, 3)
    scan = convergence_scan(f, f, tau, [10.0, 1e2, 1e3, 1e4])
    assert np.all(np.diff(scan.deltaC) < 0)
    assert abs(scan.slope + 2) <= (0.05 if tau == 0 else 0.1)


def test_convergence_scan_preconditions():
    f = TestFunction.gaussian(1.0, 3)
    with pytest.raises(ValueError):
        convergence_scan(f, f, 0.0, [10.0, 20.0, 30.0, 40.0])
    with pytest.raises(ValueError):
        convergence_scan(f, f, 0.0, [10.0, 1e3, 1e4])


def test_mismatch_certificate():
    f = TestFunction.gaussian(1.0, 3)
    for c in (5.0, 10.0, 1e3):
        cert = kernel_mismatch_certificate(DispersionParams(1.0, c), f)
        assert cert.value > 1e-15 and not cert.degenerate
    big = kernel_mismatch_certificate(DispersionParams(1.0, 1e6), f)
    # leading term 3/(8 c^2) for the unit Gaussian (<k^2> = 3/2, times 1/4)
    assert 0 < big.value <= 1e-11 and big.error < big.value
    assert big.value == pytest.approx(3 / 8e12, rel=1e-6)


def test_mismatch_near_origin_is_still_positive():
    cert = kernel_mismatch_certificate(P10, TestFunction.momentum_shell(0.0, 1e-7, 3))
    assert 0 < cert.value < 1e-16 and not cert.degenerate


def test_mismatch_degenerate_at_origin():
    # a momentum profile carried by k = 0 alone is the zero element of L^2
    f = TestFunction(TFKind.TABULATED, 3, 1.0, lambda k: np.zeros_like(np.asarray(k, dtype=float)),
                     None, (0.0, 1.0))
    with warnings.catch_warnings(record=True) as w:
        warnings.simplefilter("always")
        cert = kernel_mismatch_certificate(P10, f)
    assert cert.degenerate and any("degenerate" in str(x.message) for x in w)


def test_mismatch_certificate_for_bump():
    # the bump transform is only known to round-off far out; the cut keeps the map finite
    f = TestFunction.bump(1.0, 3)
    vals = [kernel_mismatch_certificate(DispersionParams(1.0, c), f).value for c in (10.0, 1e2, 1e3, 1e4)]
    assert all(v > 0 for v in vals)
    assert all(b < a for a, b in zip(vals, vals[1:]))
    assert abs(f.ft(TestFunction.bump(1.0, 3).support_k[1] * 0.999)) < 1e-15
