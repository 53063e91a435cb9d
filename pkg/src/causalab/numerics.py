"""Shared numerical kernels.

Adaptive Gauss-Kronrod quadrature (with a rational map for semi-infinite
ranges), scan-and-refine root finding, a guarded matrix exponential and the
grid utilities (interpolatory interval weights, 4th-order differences) used by
the wave-function modules.

All routines are pure functions of their arguments and work in float64.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np
import scipy.linalg
import scipy.optimize

from .errors import DimensionMismatch, MissedRoot, NonConvergence

__all__ = [
    "QuadratureSpec",
    "QuadResult",
    "Bracket",
    "integrate_1d",
    "integrate_radial_3d",
    "scan_brackets",
    "find_roots",
    "matrix_exponential",
    "interval_weights",
    "fd4_derivative",
]


@dataclass(frozen=True)
class QuadratureSpec:
    relative_tolerance: float = 1e-12
    absolute_tolerance: float = 1e-15
    max_subdivisions: int = 4000

    def __post_init__(self):
        if not (self.relative_tolerance > 0 and self.absolute_tolerance > 0):
            raise ValueError("quadrature tolerances must be positive")
        if self.max_subdivisions < 1:
            raise ValueError("max_subdivisions must be >= 1")


DEFAULT_QUAD = QuadratureSpec()


@dataclass(frozen=True)
class QuadResult:
    value: complex
    error: float
    n_intervals: int


# Gauss-Kronrod 7/15 abscissae and weights on [-1, 1] (QUADPACK qk15).
_XGK = np.array([
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
])
_WGK = np.array([
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
])
_WG = np.array([
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
])
_NODES = np.concatenate([-_XGK[:-1], _XGK[::-1]])
_KW = np.concatenate([_WGK[:-1], _WGK[::-1]])
_GW = np.zeros(15)
_GW[[1, 3, 5, 7, 9, 11, 13]] = np.concatenate([_WG[:-1], _WG[::-1]])


def _gk15(g, a, b):
    half = 0.5 * (b - a)
    mid = 0.5 * (a + b)
    vals = np.asarray(g(mid + half * _NODES), dtype=complex)
    if vals.shape != (15,):
        vals = np.broadcast_to(vals, (15,)).astype(complex)
    if not np.all(np.isfinite(vals)):
        raise ValueError(f"integrand not finite on [{a}, {b}]")
    k = half * np.dot(_KW, vals)
    gauss = half * np.dot(_GW, vals)
    return k, abs(k - gauss)


def _mapped(f, interval):
    """Return (g, a, b, to_t) so that the integral of f over interval equals
    the integral of g over the finite [a, b]; to_t maps x-breakpoints."""
    lo, hi = float(interval[0]), float(interval[1])
    if math.isfinite(lo) and math.isfinite(hi):
        return f, lo, hi, lambda x: x
    if math.isfinite(lo):  # [lo, inf): x = lo + t/(1-t)
        def g(t):
            s = 1.0 - t
            return f(lo + t / s) / (s * s)
        return g, 0.0, 1.0, lambda x: (x - lo) / (1.0 + x - lo)
    if math.isfinite(hi):  # (-inf, hi]: x = hi - t/(1-t)
        def g(t):
            s = 1.0 - t
            return f(hi - t / s) / (s * s)
        return g, 0.0, 1.0, lambda x: (hi - x) / (1.0 + hi - x)
    raise ValueError("doubly infinite interval must be split before mapping")


def integrate_1d(f: Callable[[np.ndarray], np.ndarray], interval: Sequence[float],
                 spec: QuadratureSpec = DEFAULT_QUAD, *,
                 breakpoints: Sequence[float] = (), full_output: bool = False):
    """Adaptive Gauss-Kronrod integral of ``f`` over ``interval``.

    ``f`` must accept a 1-D float array and return values of the same shape
    (real or complex). Infinite endpoints are handled by the substitution
    x = a + t/(1-t) onto [0, 1); a doubly infinite range is split at 0 (or
    at the first breakpoint).

    Returns the integral as a complex number, or a :class:`QuadResult` when
    ``full_output`` is set.

    Raises
    ------
    NonConvergence
        If the subdivision budget is spent while the global error estimate
        still exceeds ``max(abs_tol, rel_tol * |result|)``.
    """
    lo, hi = float(interval[0]), float(interval[1])
    if lo == hi:
        res = QuadResult(0j, 0.0, 0)
        return res if full_output else res.value
    if lo > hi:
        res = integrate_1d(f, (hi, lo), spec, breakpoints=breakpoints, full_output=True)
        res = QuadResult(-res.value, res.error, res.n_intervals)
        return res if full_output else res.value

    pieces = []
    if math.isinf(lo) and math.isinf(hi):
        split = float(breakpoints[0]) if len(breakpoints) else 0.0
        pieces = [(lo, split), (split, hi)]
    else:
        pieces = [(lo, hi)]

    initial = []
    for plo, phi in pieces:
        g, a, b, to_t = _mapped(f, (plo, phi))
        cuts = sorted({float(to_t(p)) for p in breakpoints if plo < p < phi})
        edges = [a, *cuts, b]
        for x0, x1 in zip(edges[:-1], edges[1:]):
            if x1 > x0:
                initial.append((g, x0, x1))

    heap = []
    total = 0j
    err = 0.0
    counter = 0
    for g, a, b in initial:
        val, e = _gk15(g, a, b)
        total += val
        err += e
        heapq.heappush(heap, (-e, counter, g, a, b, val))
        counter += 1

    n_int = len(heap)
    while err > max(spec.absolute_tolerance, spec.relative_tolerance * abs(total)):
        if n_int >= spec.max_subdivisions:
            raise NonConvergence(
                f"quadrature error {err:.3e} above tolerance after {n_int} subintervals")
        neg_e, _, g, a, b, val = heapq.heappop(heap)
        mid = 0.5 * (a + b)
        if not (a < mid < b):
            # interval exhausted at machine resolution; accept its estimate
            raise NonConvergence(f"interval [{a}, {b}] cannot be subdivided further")
        v1, e1 = _gk15(g, a, mid)
        v2, e2 = _gk15(g, mid, b)
        total += v1 + v2 - val
        err += e1 + e2 + neg_e
        heapq.heappush(heap, (-e1, counter, g, a, mid, v1))
        heapq.heappush(heap, (-e2, counter + 1, g, mid, b, v2))
        counter += 2
        n_int += 1
    # recompute the sum to shed accumulated cancellation in the running total
    total = sum(item[5] for item in heap)
    err = max(sum(-item[0] for item in heap), 0.0)
    res = QuadResult(complex(total), float(err), n_int)
    return res if full_output else res.value


def integrate_radial_3d(g: Callable[[np.ndarray], np.ndarray],
                        spec: QuadratureSpec = DEFAULT_QUAD, *,
                        breakpoints: Sequence[float] = (), full_output: bool = False):
    """Integral over R^3 of an isotropic function with radial profile ``g``."""
    return integrate_1d(lambda k: 4.0 * np.pi * k * k * g(k), (0.0, math.inf), spec,
                        breakpoints=breakpoints, full_output=full_output)


@dataclass(frozen=True)
class Bracket:
    lo: float
    hi: float
    residual_lo: float
    residual_hi: float

    def __post_init__(self):
        if not self.lo < self.hi:
            raise ValueError("bracket requires lo < hi")
        if not self.residual_lo * self.residual_hi < 0:
            raise ValueError("bracket endpoints must straddle a sign change")


def _eval(residual, xs):
    return np.array([float(residual(x)) for x in xs])


def scan_brackets(residual: Callable[[float], float], interval: Sequence[float],
                  samples: int = 512, singularities: Sequence[float] = ()):
    """Sign-change brackets of ``residual`` found by uniform sampling.

    Returns ``(brackets, exact)`` where ``exact`` lists sample points at which
    the residual is exactly zero. Each span between declared singularities is
    sampled with ``samples`` points, stepping one part in 1e9 away from the
    singular points themselves.
    """
    lo, hi = float(interval[0]), float(interval[1])
    cuts = sorted(s for s in singularities if lo < s < hi)
    edges = [lo, *cuts, hi]
    brackets, exact = [], []
    for i, (a, b) in enumerate(zip(edges[:-1], edges[1:])):
        pad = 1e-9 * (b - a)
        a_eff = a + pad if i > 0 or lo in singularities else a
        b_eff = b - pad if i < len(edges) - 2 or hi in singularities else b
        xs = np.linspace(a_eff, b_eff, samples)
        fs = _eval(residual, xs)
        if not np.all(np.isfinite(fs)):
            raise ValueError("residual not finite on the scan grid; declare singularities")
        exact.extend(xs[fs == 0.0].tolist())
        for j in range(samples - 1):
            if fs[j] * fs[j + 1] < 0:
                brackets.append(Bracket(xs[j], xs[j + 1], fs[j], fs[j + 1]))
    return brackets, exact


def _refine(residual, br: Bracket):
    root = scipy.optimize.brentq(residual, br.lo, br.hi, xtol=1e-300,
                                 rtol=4 * np.finfo(float).eps, maxiter=500)
    # local derivative scale times a length scale; poles fail this test
    slope = abs(br.residual_hi - br.residual_lo) / (br.hi - br.lo)
    scale = slope * max(1.0, abs(root))
    ok = abs(residual(root)) <= 1e-10 * scale
    return root, ok


def find_roots(residual: Callable[[float], float], search_interval: Sequence[float],
               expected_count: int | None = None, *, singularities: Sequence[float] = (),
               samples: int = 512, max_doublings: int = 4) -> list[float]:
    """Sorted roots of a scalar function on an interval.

    Brackets come from :func:`scan_brackets`; each is refined with Brent's
    method. A refined point is kept only when its residual is below 1e-10
    times the local derivative scale (bracket slope times max(1, |root|)),
    which discards sign changes caused by poles. When ``expected_count`` is given and not met, the scan
    density is doubled (up to ``max_doublings`` times) before giving up.

    Raises
    ------
    MissedRoot
        If the number of roots found never matches ``expected_count``.
    """
    n = samples
    for _ in range(max_doublings + 1):
        brackets, exact = scan_brackets(residual, search_interval, n, singularities)
        roots = list(exact)
        for br in brackets:
            r, ok = _refine(residual, br)
            if ok:
                roots.append(r)
        roots = sorted(roots)
        dedup = []
        for r in roots:
            if not dedup or abs(r - dedup[-1]) > 1e-14 * max(1.0, abs(r)):
                dedup.append(r)
        if expected_count is None or len(dedup) == expected_count:
            return dedup
        n *= 2
    raise MissedRoot(f"found {len(dedup)} roots, expected {expected_count}")


def matrix_exponential(M: np.ndarray) -> np.ndarray:
    """e^M for a square matrix of dimension at most 4096 (Pade scaling-and-squaring)."""
    M = np.asarray(M)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise DimensionMismatch(f"expected a square matrix, got shape {M.shape}")
    if M.shape[0] > 4096:
        raise DimensionMismatch("matrix dimension exceeds 4096")
    if not np.all(np.isfinite(M)):
        raise ValueError("matrix has non-finite entries")
    return scipy.linalg.expm(M.astype(complex))


# ---------------------------------------------------------------------------
# grid helpers

_STENCIL = 8  # interpolation nodes per cell: degree-7 local polynomials
_GL_X, _GL_W = np.polynomial.legendre.leggauss(_STENCIL // 2)
_LAGRANGE_DEN = np.array([np.prod([m - q for q in range(_STENCIL) if q != m])
                          for m in range(_STENCIL)], dtype=float)


def _lagrange(u):
    """Lagrange basis on nodes 0..7 evaluated at u (no u may be a node)."""
    d = u[..., None] - np.arange(_STENCIL)
    return np.prod(d, axis=-1)[..., None] / d / _LAGRANGE_DEN


@lru_cache(maxsize=256)
def _interval_weights_cached(x0, h, n, a, b, periodic):
    if periodic:
        ncell = n
    else:
        ncell = n - 1
    ja = max(int(math.floor((a - x0) / h)), 0)
    jb = min(int(math.ceil((b - x0) / h)) - 1, ncell - 1)
    w = np.zeros(n)
    if jb < ja:
        return w
    j = np.arange(ja, jb + 1)
    xl = x0 + j * h
    lo = np.maximum(a, xl)
    hi = np.minimum(b, xl + h)
    keep = hi > lo
    j, lo, hi = j[keep], lo[keep], hi[keep]
    if periodic:
        start = j - (_STENCIL // 2 - 1)
    else:
        start = np.clip(j - (_STENCIL // 2 - 1), 0, n - _STENCIL)
    ulo = (lo - x0) / h - start
    uhi = (hi - x0) / h - start
    half = 0.5 * (uhi - ulo)
    u = (0.5 * (uhi + ulo))[:, None] + half[:, None] * _GL_X
    cellw = np.einsum("cg,cgm->cm", half[:, None] * _GL_W, _lagrange(u)) * h
    idx = start[:, None] + np.arange(_STENCIL)
    if periodic:
        idx %= n
    np.add.at(w, idx.ravel(), cellw.ravel())
    w.setflags(write=False)
    return w


def interval_weights(x0: float, h: float, n: int, a: float, b: float,
                     periodic: bool = False) -> np.ndarray:
    """Quadrature weights for the integral over [a, b] of a function sampled
    at x0 + j*h, j = 0..n-1.

    Each grid cell is integrated exactly against the degree-7 polynomial
    through the 8 nearest samples (wrapping around for periodic grids, where
    the last cell ends at x0 + n*h). Partial cells at a and b are handled by
    Gauss-Legendre on the cell fragment, so the rule is 8th-order accurate
    regardless of how [a, b] sits on the grid.
    """
    if n < _STENCIL:
        raise ValueError(f"need at least {_STENCIL} grid points")
    return _interval_weights_cached(float(x0), float(h), int(n), float(a), float(b),
                                    bool(periodic))


def fd4_derivative(values: np.ndarray, h: float, *, periodic: bool = False,
                   twist: complex = 1.0) -> np.ndarray:
    """Fourth-order finite-difference derivative of uniformly sampled data.

    Closed grids use one-sided 4th-order stencils at the two ends. Periodic
    grids wrap around; ``twist`` is the factor f(x + L) = twist * f(x), so a
    twisted function psi(0) = e^{i theta} psi(L) takes twist = e^{-i theta}.
    """
    f = np.asarray(values)
    if f.size < 5:
        raise ValueError("need at least 5 samples")
    if periodic:
        ext = np.concatenate([f[-2:] / twist, f, f[:2] * twist])
        return (ext[:-4] - 8 * ext[1:-3] + 8 * ext[3:-1] - ext[4:]) / (12 * h)
    d = np.empty_like(f, dtype=np.result_type(f, float))
    d[2:-2] = (f[:-4] - 8 * f[1:-3] + 8 * f[3:-1] - f[4:]) / (12 * h)
    d[0] = (-25 * f[0] + 48 * f[1] - 36 * f[2] + 16 * f[3] - 3 * f[4]) / (12 * h)
    d[1] = (-3 * f[0] - 10 * f[1] + 18 * f[2] - 6 * f[3] + f[4]) / (12 * h)
    d[-1] = (25 * f[-1] - 48 * f[-2] + 36 * f[-3] - 16 * f[-4] + 3 * f[-5]) / (12 * h)
    d[-2] = (3 * f[-1] + 10 * f[-2] - 18 * f[-3] + 6 * f[-4] - f[-5]) / (12 * h)
    return d
