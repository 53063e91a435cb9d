"""Relativistic versus nonrelativistic free-field two-point functions.

Conventions: hbar = 1, Fourier transform f~(k) = (2 pi)^(-d/2) int f(x) e^{-ikx} dx,
test functions are isotropic and unit-normalized. The nonrelativistic kernel
is K_nr = 1/(2 m0), the relativistic one K_r = c^2/(2 omega_k) with
omega_k = sqrt(c^2 k^2 + m0^2 c^4). Differences of nearly equal quantities are
always evaluated in cancellation-free form, so everything stays accurate up to
c ~ 1e8.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from enum import Enum
from functools import cached_property
from typing import Callable, Sequence

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.special import erfc, gammaincc

from .numerics import DEFAULT_QUAD, QuadratureSpec, integrate_1d

HBAR = 1.0
PARSEVAL_TOL = 1e-8


@dataclass(frozen=True)
class DispersionParams:
    m0: float
    c: float

    def __post_init__(self):
        for name in ("m0", "c"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0):
                raise ValueError(f"{name} must be finite and positive, got {v}")

    @property
    def rest_energy(self) -> float:
        return self.m0 * self.c ** 2


def _x(k, p: DispersionParams):
    k = np.asarray(k, dtype=float)
    return (k / (p.m0 * p.c)) ** 2


def omega_c(k, p: DispersionParams):
    """sqrt(c^2 k^2 + m0^2 c^4)."""
    return p.rest_energy * np.sqrt(1.0 + _x(k, p))


def kinetic_rel(k, p: DispersionParams):
    """omega_k - m0 c^2 without cancellation."""
    x = _x(k, p)
    return p.rest_energy * x / (1.0 + np.sqrt(1.0 + x))


def kernel_pair(k, p: DispersionParams):
    """(K_nr, K_r) = (1/(2 m0), c^2/(2 omega_k))."""
    x = _x(k, p)
    knr = np.full_like(x, 0.5 / p.m0)
    return knr, 0.5 / (p.m0 * np.sqrt(1.0 + x))


def kernel_gap(k, p: DispersionParams):
    """K_nr - K_r >= 0, evaluated stably."""
    x = _x(k, p)
    s = np.sqrt(1.0 + x)
    return 0.5 / p.m0 * x / (s * (1.0 + s))


def beta(k, tau: float, p: DispersionParams):
    """K_nr exp(-i tau k^2/2m0) - K_r exp(-i tau (omega_k - m0 c^2)).

    Written as K_nr e^{-i tau b} (e^{-i tau (a - b)} - 1) + (K_nr - K_r) e^{-i tau b}
    with a - b = k^2 b / (2 m0 (omega + m0 c^2)) so both pieces are small
    exactly when they should be.
    """
    k = np.asarray(k, dtype=float)
    b = kinetic_rel(k, p)
    amb = k * k * b / (2.0 * p.m0 * (omega_c(k, p) + p.rest_energy))
    eb = np.exp(-1j * tau * b)
    return 0.5 / p.m0 * eb * np.expm1(-1j * tau * amb) + kernel_gap(k, p) * eb


def beta_verbatim(k, tau: float, p: DispersionParams):
    """The printed variant with c^2/omega (no 1/2) on the relativistic term."""
    k = np.asarray(k, dtype=float)
    return (0.5 / p.m0 * np.exp(-1j * tau * k * k / (2 * p.m0))
            - 2.0 * kernel_pair(k, p)[1] * np.exp(-1j * tau * kinetic_rel(k, p)))


# ---------------------------------------------------------------------------
# test functions

class TFKind(str, Enum):
    GAUSSIAN = "gaussian"
    BUMP = "bump"
    TABULATED = "tabulated"


def _sphere_area(d: int) -> float:
    return 2.0 if d == 1 else 4.0 * math.pi


def radial_integral(g: Callable, d: int, spec: QuadratureSpec = DEFAULT_QUAD, *,
                    lower: float = 0.0, upper: float = math.inf,
                    breakpoints: Sequence[float] = (), full_output: bool = False):
    """int over lower <= |k| < upper of an isotropic function with profile g, in R^d."""
    if d not in (1, 3):
        raise ValueError("dimension must be 1 or 3")
    area = _sphere_area(d)
    if d == 1:
        h = lambda r: area * g(r)
    else:
        h = lambda r: area * r * r * g(r)
    bps = [b for b in breakpoints if lower < b < upper]
    return integrate_1d(h, (lower, upper), spec, breakpoints=bps, full_output=full_output)


# composite Gauss-Legendre panels for the Fourier transform of the bump
BUMP_K_CUT = 1000.0
_GL_X, _GL_W = np.polynomial.legendre.leggauss(16)


def _panels(a: float, b: float, n: int):
    edges = np.linspace(a, b, n + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[1:] + edges[:-1])
    x = (mid[:, None] + half[:, None] * _GL_X).ravel()
    w = (half[:, None] * _GL_W).ravel()
    return x, w


def _bump(r):
    r = np.asarray(r, dtype=float)
    out = np.zeros_like(r)
    m = np.abs(r) < 1
    out[m] = np.exp(-1.0 / (1.0 - r[m] ** 2))
    return out


@dataclass(frozen=True, eq=False)
class TestFunction:
    """Unit-normalized isotropic test function on R^d, d in {1, 3}.

    Use the constructors :meth:`gaussian`, :meth:`bump` and :meth:`tabulated`.
    ``ft(k)`` is the radial Fourier profile; ``profile(r)`` the position-space
    profile (not available for tabulated data).
    """

    __test__ = False  # keep pytest from collecting this class

    kind: TFKind
    d: int
    scale: float
    _ft: Callable
    _x: Callable | None
    support_k: tuple = (0.0, math.inf)

    def __post_init__(self):
        if self.d not in (1, 3):
            raise ValueError("dimension must be 1 or 3")
        if not self.scale > 0:
            raise ValueError("scale must be positive")

    # -- constructors -------------------------------------------------------
    @classmethod
    def gaussian(cls, width: float = 1.0, d: int = 3) -> "TestFunction":
        """f~(k) = (w^2/pi)^(d/4) exp(-k^2 w^2/2); f(x) = (pi w^2)^(-d/4) exp(-x^2/(2 w^2))."""
        w = float(width)
        a = (w * w / math.pi) ** (d / 4)
        b = (math.pi * w * w) ** (-d / 4)
        return cls(TFKind.GAUSSIAN, d, w,
                   lambda k: a * np.exp(-0.5 * (w * np.asarray(k, dtype=float)) ** 2),
                   lambda r: b * np.exp(-0.5 * (np.asarray(r, dtype=float) / w) ** 2))

    @classmethod
    def bump(cls, radius: float = 1.0, d: int = 3, panels: int = 256) -> "TestFunction":
        """exp(-1/(1 - (r/R)^2)) inside the ball of radius R, normalized."""
        R = float(radius)
        r, w = _panels(0.0, R, panels)
        prof = _bump(r / R)
        jac = 2.0 * w if d == 1 else 4.0 * math.pi * r * r * w
        amp = 1.0 / math.sqrt(float(np.dot(jac, prof ** 2)))
        prof = prof * amp

        def ft(k):
            k = np.atleast_1d(np.asarray(k, dtype=float))
            if d == 1:
                kern = np.cos(np.outer(k, r))
                out = kern @ (2.0 * w * prof) / math.sqrt(2 * math.pi)
            else:
                kern = np.sinc(np.outer(k, r) / math.pi)
                out = kern @ (4.0 * math.pi * r * r * w * prof) / (2 * math.pi) ** 1.5
            return out

        # past k ~ 1000/R the true transform is below 1e-16 and the panel sum
        # returns round-off, which the infinite-range map would amplify
        return cls(TFKind.BUMP, d, R, ft, lambda s: amp * _bump(np.asarray(s) / R),
                   (0.0, BUMP_K_CUT / R))

    @classmethod
    def tabulated(cls, k: np.ndarray, values: np.ndarray, d: int = 3) -> "TestFunction":
        """Radial momentum profile from samples (cubic spline, zero outside the table).

        The samples are rescaled so the function has unit norm; they should go
        to zero at both table ends unless the table starts at k = 0.
        """
        k = np.asarray(k, dtype=float)
        v = np.asarray(values, dtype=float)
        if k.ndim != 1 or k.shape != v.shape or k.size < 4 or np.any(np.diff(k) <= 0) or k[0] < 0:
            raise ValueError("need an increasing nonnegative k table with >= 4 entries")
        spline = CubicSpline(k, v)
        lo, hi = float(k[0]), float(k[-1])

        def raw(q):
            q = np.asarray(q, dtype=float)
            return np.where((q >= lo) & (q <= hi), spline(np.clip(q, lo, hi)), 0.0)

        nrm = radial_integral(lambda q: raw(q) ** 2, d, lower=lo, upper=hi,
                              breakpoints=tuple(k[1:-1:max(1, k.size // 32)])).real
        if not nrm > 0:
            raise ValueError("tabulated profile has zero norm")
        s = 1.0 / math.sqrt(nrm)
        return cls(TFKind.TABULATED, d, hi, lambda q: s * raw(q), None, (lo, hi))

    @classmethod
    def momentum_shell(cls, k_lo: float, k_hi: float, d: int = 3, n: int = 257) -> "TestFunction":
        """Smooth bump in |k| supported on [k_lo, k_hi]."""
        k = np.linspace(k_lo, k_hi, n)
        return cls.tabulated(k, _bump((2 * k - k_lo - k_hi) / (k_hi - k_lo)), d)

    # -- accessors ----------------------------------------------------------
    def ft(self, k) -> np.ndarray:
        return self._ft(k)

    def profile(self, r) -> np.ndarray:
        if self._x is None:
            raise NotImplementedError("tabulated test functions are given in momentum space only")
        return self._x(r)

    @property
    def breakpoints(self) -> tuple:
        lo, hi = self.support_k
        return tuple(b for b in (lo, hi) if 0 < b < math.inf)

    def k_range(self) -> tuple:
        return self.support_k

    @cached_property
    def parseval(self) -> tuple:
        """(momentum-space norm^2, position-space norm^2)."""
        lo, hi = self.support_k
        pk = radial_integral(lambda k: np.abs(self.ft(k)) ** 2, self.d, lower=lo, upper=hi).real
        if self._x is None:
            return pk, math.nan
        upper = self.scale if self.kind is TFKind.BUMP else math.inf
        px = radial_integral(lambda r: np.abs(self.profile(r)) ** 2, self.d, upper=upper).real
        return pk, px

    def check_parseval(self, tol: float = PARSEVAL_TOL) -> float:
        pk, px = self.parseval
        err = abs(pk - 1.0) if math.isnan(px) else max(abs(pk - px), abs(pk - 1.0))
        if err > tol:
            raise ValueError(f"Parseval check failed: |f~|^2 = {pk}, |f|^2 = {px}")
        return err


def _overlap_range(f1: TestFunction, f2: TestFunction):
    lo = max(f1.support_k[0], f2.support_k[0])
    hi = min(f1.support_k[1], f2.support_k[1])
    return lo, hi


def _check_pair(f1: TestFunction, f2: TestFunction):
    if f1.d != f2.d:
        raise ValueError("test functions live in different dimensions")


# ---------------------------------------------------------------------------
# correlator difference

def delta_C(f1: TestFunction, f2: TestFunction, tau: float, p: DispersionParams,
            quad: QuadratureSpec = DEFAULT_QUAD, *, verbatim: bool = False,
            full_output: bool = False):
    """|int conj(f1~) f2~ beta(k, tau) d^dk|.

    ``verbatim`` switches to the printed variant |int (f1~ - f2~) beta' d^dk|
    with beta' carrying c^2/omega; it is kept for comparison only.
    """
    _check_pair(f1, f2)
    lo, hi = _overlap_range(f1, f2)
    if verbatim:
        lo, hi = min(f1.support_k[0], f2.support_k[0]), max(f1.support_k[1], f2.support_k[1])
        g = lambda k: (f1.ft(k) - f2.ft(k)) * beta_verbatim(k, tau, p)
    else:
        if not hi > lo:
            res = 0.0
            return (res, 0.0) if full_output else res
        g = lambda k: np.conj(f1.ft(k)) * f2.ft(k) * beta(k, tau, p)
    bps = tuple(sorted(set(f1.breakpoints + f2.breakpoints + (p.m0 * p.c,))))
    r = radial_integral(g, f1.d, quad, lower=lo, upper=hi, breakpoints=bps, full_output=True)
    val = abs(r.value)
    return (val, r.error) if full_output else val


def epsilon_for_delta(f: TestFunction, delta: float, p: DispersionParams,
                      quad: QuadratureSpec = DEFAULT_QUAD) -> float:
    """int_{|k| > m0 c delta} |f~(k)|^2 d^dk (the smallest admissible epsilon)."""
    if not delta > 0:
        raise ValueError("delta must be positive")
    K = p.m0 * p.c * delta
    lo, hi = f.support_k
    if K >= hi:
        return 0.0
    if f.kind is TFKind.GAUSSIAN:
        w = f.scale
        if f.d == 1:
            return float(erfc(K * w))
        return float(gammaincc(1.5, (K * w) ** 2))
    val = radial_integral(lambda k: np.abs(f.ft(k)) ** 2, f.d, quad, lower=max(K, lo),
                          upper=hi, breakpoints=f.breakpoints).real
    return float(min(max(val, 0.0), 1.0))


# ---------------------------------------------------------------------------
# delta-cut bound on the correlator difference

@dataclass(frozen=True)
class Lemma2Report:
    delta: float
    epsilon: float
    tau: float
    c: float
    m0: float
    deltaC: float
    lhs: float
    rhs: float
    passed: bool
    margin: float
    hbar: float = HBAR

    def as_row(self) -> dict:
        return {"delta": self.delta, "c": self.c, "tau": self.tau, "epsilon": self.epsilon,
                "deltaC": self.deltaC, "lhs": self.lhs, "rhs": self.rhs,
                "margin": self.margin, "pass": self.passed}


def bound_rhs(epsilon: float, delta: float, tau: float, p: DispersionParams) -> float:
    """2 eps + delta^2/2 + |tau| (m0 c^2/hbar) delta^4/8."""
    return 2 * epsilon + delta ** 2 / 2 + abs(tau) * p.rest_energy / HBAR * delta ** 4 / 8


def verify_lemma2(f1: TestFunction, f2: TestFunction, tau: float, delta: float,
                  p: DispersionParams, quad: QuadratureSpec = DEFAULT_QUAD) -> Lemma2Report:
    """Evaluate both sides of the bound with epsilon taken from the tails of f1, f2."""
    _check_pair(f1, f2)
    eps = max(epsilon_for_delta(f1, delta, p, quad), epsilon_for_delta(f2, delta, p, quad))
    dc = delta_C(f1, f2, tau, p, quad)
    lhs = 2 * p.m0 * dc
    rhs = bound_rhs(eps, delta, tau, p)
    return Lemma2Report(delta, eps, tau, p.c, p.m0, dc, lhs, rhs, lhs <= rhs, rhs - lhs)


@dataclass(frozen=True)
class InequalityCheck:
    n_points: int
    violations: tuple       # counts for (i), (ii), (iii)
    worst_ratio: tuple      # max lhs/rhs for (i), (ii); max K_r/K_nr for (iii)

    @property
    def ok(self) -> bool:
        return sum(self.violations) == 0


def pointwise_inequalities(p: DispersionParams, delta: float, tau: float,
                           n_points: int = 1000) -> InequalityCheck:
    """Check on |k| <= m0 c delta:
    (i) K_nr - K_r <= delta^2/(4 m0); (ii) |phase difference| <= m0 c^2 |tau| delta^4/8;
    (iii) K_r <= K_nr."""
    k = np.linspace(0.0, p.m0 * p.c * delta, n_points)
    knr, kr = kernel_pair(k, p)
    gap = kernel_gap(k, p)
    b1 = delta ** 2 / (4 * p.m0)
    b = kinetic_rel(k, p)
    amb = k * k * b / (2.0 * p.m0 * (omega_c(k, p) + p.rest_energy))
    phase = 2.0 * np.abs(np.sin(0.5 * tau * amb))
    b2 = p.rest_energy * abs(tau) * delta ** 4 / (8 * HBAR)
    v = (int(np.sum(gap > b1)), int(np.sum(phase > b2)), int(np.sum(kr > knr)))
    with np.errstate(invalid="ignore", divide="ignore"):
        r1 = float(np.max(gap) / b1)
        r2 = float(np.max(phase) / b2) if b2 > 0 else float(np.max(phase) > 0)
    return InequalityCheck(n_points, v, (r1, r2, float(np.max(kr / knr))))


# ---------------------------------------------------------------------------
# c -> infinity

@dataclass(frozen=True)
class ConvergenceScan:
    c: np.ndarray
    deltaC: np.ndarray
    slope: float
    intercept: float


def convergence_scan(f1: TestFunction, f2: TestFunction, tau: float, c_list: Sequence[float],
                     m0: float = 1.0, quad: QuadratureSpec = DEFAULT_QUAD) -> ConvergenceScan:
    """Delta C along ``c_list`` and the least-squares slope of log Delta C vs log c."""
    c = np.asarray(c_list, dtype=float)
    if c.size < 4 or np.any(np.diff(c) <= 0):
        raise ValueError("need >= 4 increasing speeds")
    if c[-1] / c[0] < 100.0:
        raise ValueError("speeds must span at least two decades")
    dc = np.array([delta_C(f1, f2, tau, DispersionParams(m0, ci), quad) for ci in c])
    slope, icpt = np.polyfit(np.log(c), np.log(dc), 1)
    return ConvergenceScan(c, dc, float(slope), float(icpt))


@dataclass(frozen=True)
class MismatchCertificate:
    value: float
    error: float
    degenerate: bool


def kernel_mismatch_certificate(p: DispersionParams, f: TestFunction,
                                quad: QuadratureSpec = DEFAULT_QUAD) -> MismatchCertificate:
    """int |f~|^2 (K_nr - K_r) d^dk with its quadrature error estimate.

    The integrand is positive away from k = 0, so a value that does not
    exceed its error bar means f~ is concentrated at k = 0; that case is
    flagged degenerate (the kernels agree there) rather than reported as a
    counterexample.
    """
    lo, hi = f.support_k
    r = radial_integral(lambda k: np.abs(f.ft(k)) ** 2 * kernel_gap(k, p), f.d, quad,
                        lower=lo, upper=hi, breakpoints=f.breakpoints + (p.m0 * p.c,),
                        full_output=True)
    val = float(r.value.real)
    degenerate = not val > r.error
    if degenerate:
        warnings.warn("test function is concentrated at k = 0; mismatch is degenerate",
                      RuntimeWarning, stacklevel=2)
    return MismatchCertificate(val, float(r.error), degenerate)
