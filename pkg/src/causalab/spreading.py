"""Free and confined time evolution, localization probabilities and the
vanish-or-almost-never-vanish classification of p_A(t) = (psi_t, A psi_t).

Free evolution on the line uses H = p^2/2m (hbar = 1) realized by FFT on a
periodic box that is much wider than the initial support. Confined evolution
expands the state in the eigenmodes from :mod:`causalab.boundary` (where
2m = 1).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Sequence, Union

import numpy as np

from .boundary import EigenMode, GridSpec, WaveFunction
from .errors import (EmptyRegion, GridMismatch, RangeExcursion, ResolutionInsufficient,
                     SupportTooWide, TruncatedBasis)
from .numerics import interval_weights

DEFAULT_SAMPLES = 2 ** 14
DEFAULT_BOX_FACTOR = 8.0
EDGE_FRACTION = 0.25
RANGE_TOL = 1e-10


# ---------------------------------------------------------------------------
# states on the line

def bump(x: np.ndarray) -> np.ndarray:
    """exp(-1/(1 - x^2)) on (-1, 1), zero elsewhere (unnormalized)."""
    x = np.asarray(x, dtype=float)
    out = np.zeros_like(x)
    inside = np.abs(x) < 1.0
    out[inside] = np.exp(-1.0 / (1.0 - x[inside] ** 2))
    return out


def line_grid(halfwidth: float, n: int = DEFAULT_SAMPLES,
              box_factor: float = DEFAULT_BOX_FACTOR, center: float = 0.0) -> GridSpec:
    """Periodic box of length ``box_factor * 2 * halfwidth`` centred on ``center``."""
    if box_factor < 8.0:
        raise SupportTooWide("the embedding box must be at least 8 support widths long")
    L = box_factor * 2.0 * halfwidth
    return GridSpec(L, n, closed=False, origin=center - 0.5 * L)


def bump_state(grid: GridSpec, center: float = 0.0, radius: float = 1.0) -> WaveFunction:
    """Normalized C-infinity bump supported on [center - radius, center + radius]."""
    return WaveFunction.from_function(grid, lambda x: bump((x - center) / radius).astype(complex),
                                      normalize=True)


def gaussian_state(grid: GridSpec, sigma: float, x0: float = 0.0, k0: float = 0.0) -> WaveFunction:
    """(2 pi sigma^2)^(-1/4) exp(-(x-x0)^2/(4 sigma^2) + i k0 x); |psi|^2 has width sigma."""
    def f(x):
        return ((2 * np.pi * sigma ** 2) ** -0.25
                * np.exp(-(x - x0) ** 2 / (4 * sigma ** 2) + 1j * k0 * x))
    return WaveFunction.from_function(grid, f)


def gaussian_evolved(x: np.ndarray, t: float, sigma: float, m: float = 1.0) -> np.ndarray:
    """Closed-form free evolution of :func:`gaussian_state` (x0 = k0 = 0)."""
    z = 1.0 + 1j * t / (2.0 * m * sigma ** 2)
    return (2 * np.pi * sigma ** 2) ** -0.25 / np.sqrt(z) * np.exp(-x ** 2 / (4 * sigma ** 2 * z))


# ---------------------------------------------------------------------------
# free evolution

@dataclass(frozen=True)
class FreeEvolution:
    psi: WaveFunction
    norm_defect: float
    edge_mass: float       # mass within 25% of the box edges after evolution
    spectral_tail: float   # mass in the top eighth of the resolved momenta
    alias_bound: float


def _check_free_grid(g: GridSpec):
    if g.closed or g.theta != 0.0:
        raise ValueError("free evolution needs a periodic (open, untwisted) grid")


def _edge_mask(g: GridSpec) -> np.ndarray:
    x = g.points - g.origin
    return (x < EDGE_FRACTION * g.L) | (x > (1.0 - EDGE_FRACTION) * g.L)


def _check_support(psi: WaveFunction, edge_tol: float):
    mask = _edge_mask(psi.grid)
    dens = np.abs(psi.values) ** 2
    peak = float(dens.max()) if dens.size else 0.0
    if peak > 0 and float(dens[mask].max(initial=0.0)) > edge_tol * peak:
        raise SupportTooWide("initial state reaches within 25% of the box edge; "
                             "use a wider embedding box")


class _FreePropagator:
    """Caches the transform of psi0 so many times cost one inverse FFT each."""

    def __init__(self, psi0: WaveFunction, m: float, edge_tol: float = 1e-20):
        g = psi0.grid
        _check_free_grid(g)
        _check_support(psi0, edge_tol)
        if not m > 0:
            raise ValueError("mass must be positive")
        self.psi0 = psi0
        self.m = m
        self.k = 2 * np.pi * np.fft.fftfreq(g.n, d=g.spacing)
        self.coeff = np.fft.fft(psi0.values)
        power = np.abs(self.coeff) ** 2
        hi = np.abs(self.k) > 0.75 * np.abs(self.k).max()
        self.spectral_tail = float(power[hi].sum() / max(power.sum(), 1e-300))

    def values(self, t: float) -> np.ndarray:
        if t == 0:
            return self.psi0.values.copy()
        phase = np.exp(-1j * t * self.k ** 2 / (2.0 * self.m))
        return np.fft.ifft(phase * self.coeff)

    def evolve(self, t: float) -> FreeEvolution:
        g = self.psi0.grid
        v = self.values(t)
        if t == 0:
            out = self.psi0
        else:
            out = WaveFunction(g, v, np.fft.ifft(1j * self.k * np.exp(
                -1j * t * self.k ** 2 / (2.0 * self.m)) * self.coeff))
        n0 = self.psi0.norm
        defect = abs(out.norm - n0)
        dens = np.abs(v) ** 2
        edge = float(g.spacing * dens[_edge_mask(g)].sum())
        return FreeEvolution(out, defect, edge, self.spectral_tail, edge + self.spectral_tail)


def evolve_free_line(psi0: WaveFunction, t: float, m: float = 1.0, *,
                     full_output: bool = False, edge_tol: float = 1e-20):
    """Evolve ``psi0`` under p^2/2m on the line.

    The line is embedded in the periodic grid of ``psi0``; the state must not
    reach within 25% of the box edges (relative density ``edge_tol``), so that
    wrap-around stays negligible over the times of interest. The returned
    state carries exact spectral derivatives.

    With ``full_output`` a :class:`FreeEvolution` is returned, holding the norm
    defect and an aliasing bound (mass that reached the edge zones plus mass in
    the highest resolved momenta).
    """
    res = _FreePropagator(psi0, m, edge_tol).evolve(t)
    return res if full_output else res.psi


# ---------------------------------------------------------------------------
# bounded evolution

@dataclass(frozen=True, eq=False)
class SpectralDecomposition:
    modes: tuple
    coefficients: np.ndarray
    captured: float   # fraction of |psi|^2 carried by the modes

    @property
    def grid(self) -> GridSpec:
        return self.modes[0].grid

    @property
    def energies(self) -> np.ndarray:
        return np.array([m.energy for m in self.modes])


def decompose(psi: WaveFunction, modes: Sequence[EigenMode],
              capture_tol: float = 1e-10) -> SpectralDecomposition:
    """Coefficients c_n = <psi_n, psi>; raises TruncatedBasis if the modes miss
    more than ``capture_tol`` of the squared norm."""
    if not modes:
        raise TruncatedBasis("no modes supplied")
    g = modes[0].grid
    if psi.grid != g:
        raise GridMismatch("state and modes live on different grids")
    w = g.weights()
    c = np.array([np.dot(w, np.conj(m.samples) * psi.values) for m in modes])
    total = psi.norm ** 2
    captured = float(np.sum(np.abs(c) ** 2) / total)
    if 1.0 - captured > capture_tol:
        raise TruncatedBasis(f"modes capture only {captured:.12f} of the norm")
    return SpectralDecomposition(tuple(modes), c, captured)


def evolve_bounded(decomp: SpectralDecomposition, t: float) -> WaveFunction:
    """psi_t = sum_n c_n exp(-i E_n t) psi_n, with exact derivative samples."""
    ct = decomp.coefficients * np.exp(-1j * decomp.energies * t)
    S = np.array([m.samples for m in decomp.modes])
    D = np.array([m.derivative for m in decomp.modes])
    return WaveFunction(decomp.grid, ct @ S, ct @ D)


# ---------------------------------------------------------------------------
# localization

class LocKind(str, Enum):
    PROJECTOR = "projector"
    RANK_ONE = "rank_one"


@dataclass(frozen=True)
class LocalizationOperator:
    """N(V) (or A = 1 - N(V) when ``complement``) for an interval V = (a, b).

    PROJECTOR is multiplication by the indicator of V. RANK_ONE is the
    projection onto chi_V, which is a positive contraction only when
    normalized (or when |V| <= 1).
    """

    region: tuple
    kind: LocKind = LocKind.PROJECTOR
    complement: bool = False
    normalized: bool = True

    def __post_init__(self):
        a, b = (float(v) for v in self.region)
        if not b > a:
            raise EmptyRegion(f"region ({a}, {b}) is empty")
        object.__setattr__(self, "region", (a, b))
        object.__setattr__(self, "kind", LocKind(self.kind))
        if self.kind is LocKind.RANK_ONE and not self.normalized and b - a > 1.0:
            raise ValueError("unnormalized rank-one operator exceeds 1 when |V| > 1")

    def complemented(self) -> "LocalizationOperator":
        return LocalizationOperator(self.region, self.kind, not self.complement, self.normalized)


def _clip_region(g: GridSpec, region):
    lo, hi = g.origin, g.origin + g.L
    a, b = max(region[0], lo), min(region[1], hi)
    if not b > a:
        raise EmptyRegion(f"region {region} misses the domain [{lo}, {hi}]")
    return a, b, lo, hi


def _region_weights(g: GridSpec, a: float, b: float) -> np.ndarray:
    # |psi|^2 is periodic on any open grid, twisted or not
    return interval_weights(g.origin, g.spacing, g.n, a, b, periodic=not g.closed)


def localization_probability(psi: WaveFunction, N: LocalizationOperator) -> float:
    """(psi, N psi) for a unit vector psi, clamped to [0, 1].

    The complement is evaluated directly on the outside of V (not as one
    minus the inside), so small values keep their relative accuracy.

    Raises
    ------
    EmptyRegion
        If V does not meet the grid domain.
    RangeExcursion
        If the raw value leaves [-1e-10, 1 + 1e-10] (e.g. psi not normalized).
    """
    g = psi.grid
    a, b, lo, hi = _clip_region(g, N.region)
    dens = np.abs(psi.values) ** 2
    if N.kind is LocKind.PROJECTOR:
        if N.complement:
            val = 0.0
            for s, e in ((lo, a), (b, hi)):
                if e > s:
                    val += float(np.dot(_region_weights(g, s, e), dens))
        else:
            val = float(np.dot(_region_weights(g, a, b), dens))
    else:
        if not g.closed and g.theta != 0.0:
            raise NotImplementedError("rank-one localization on twisted grids")
        amp = complex(np.dot(_region_weights(g, a, b), psi.values))
        # chi_V is the indicator of the requested V, not of its clipped part
        size = N.region[1] - N.region[0]
        inside = abs(amp) ** 2 / (size if N.normalized else 1.0)
        val = psi.norm ** 2 - inside if N.complement else inside
    if val < -RANGE_TOL or val > 1.0 + RANGE_TOL:
        raise RangeExcursion(f"localization probability {val!r} outside [0, 1]")
    return min(max(val, 0.0), 1.0)


# ---------------------------------------------------------------------------
# p_A(t) series and the dichotomy verdict

@dataclass(frozen=True, eq=False)
class ProbabilityRecord:
    times: np.ndarray
    values: np.ndarray
    tolerance: float = RANGE_TOL
    label: str = ""

    def __post_init__(self):
        t = np.asarray(self.times, dtype=float)
        v = np.asarray(self.values, dtype=float)
        if t.shape != v.shape or t.ndim != 1 or t.size == 0:
            raise ValueError("times and values must be equal-length nonempty vectors")
        if np.any(np.diff(t) <= 0):
            raise ValueError("times must be strictly increasing")
        if np.any(v < -self.tolerance) or np.any(v > 1 + self.tolerance):
            raise RangeExcursion("p_A sample outside [0, 1]")
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "values", np.clip(v, 0.0, 1.0))


Evolution = Union[str, SpectralDecomposition]


def p_A_series(psi0: WaveFunction, A: LocalizationOperator, times: Sequence[float],
               evolution: Evolution = "free", m: float = 1.0) -> ProbabilityRecord:
    """Sample p_A(t) = (psi_t, A psi_t) with A = 1 - N(V).

    ``evolution`` is ``"free"`` (line, mass ``m``) or a
    :class:`SpectralDecomposition` of ``psi0`` for a confined system.
    """
    if not A.complement:
        raise ValueError("p_A is defined with A = 1 - N(V); pass a complemented operator")
    times = np.asarray(times, dtype=float)
    if times.size == 0:
        raise ValueError("no sample times")
    if isinstance(evolution, SpectralDecomposition):
        states = (evolve_bounded(evolution, t) for t in times)
    elif evolution == "free":
        prop = _FreePropagator(psi0, m)
        states = (WaveFunction(psi0.grid, prop.values(t)) for t in times)
    else:
        raise ValueError(f"unknown evolution {evolution!r}")
    vals = [localization_probability(s, A) for s in states]
    return ProbabilityRecord(times, np.array(vals))


class Branch(str, Enum):
    CONFINED = "Confined"
    SPREADING = "Spreading"


@dataclass(frozen=True)
class SupportEvidence:
    n_samples: int
    n_nonzero: int
    min_nonzero: float
    first_nonzero_time: float
    longest_zero_run: int


@dataclass(frozen=True)
class DichotomyVerdict:
    branch: Branch
    zero_fraction: float
    support_evidence: SupportEvidence
    within_bound: bool = field(default=True)  # zero_fraction <= ZERO_FRACTION_BOUND


ZERO_FRACTION_BOUND = 0.05
MIN_SAMPLES = 64


def classify_dichotomy(record: ProbabilityRecord, tol: float = RANGE_TOL) -> DichotomyVerdict:
    """Confined when every sample is <= ``tol``, Spreading otherwise.

    The zero fraction is evidence only: isolated zeros (such as t = 0) are a
    measure-zero set and do not change the branch. ``within_bound`` tells
    whether a Spreading record has at most ``ZERO_FRACTION_BOUND`` zeros.
    """
    v = record.values
    if v.size < MIN_SAMPLES:
        raise ValueError(f"need at least {MIN_SAMPLES} samples, got {v.size}")
    zero = v <= tol
    run = best = 0
    for z in zero:
        run = run + 1 if z else 0
        best = max(best, run)
    nz = ~zero
    ev = SupportEvidence(
        n_samples=int(v.size),
        n_nonzero=int(nz.sum()),
        min_nonzero=float(v[nz].min()) if nz.any() else 0.0,
        first_nonzero_time=float(record.times[nz][0]) if nz.any() else math.nan,
        longest_zero_run=best,
    )
    frac = float(zero.mean())
    branch = Branch.CONFINED if zero.all() else Branch.SPREADING
    within = branch is Branch.CONFINED or frac <= ZERO_FRACTION_BOUND
    return DichotomyVerdict(branch, frac, ev, within)


# ---------------------------------------------------------------------------
# tails

NOISE_FLOOR = 1e-13


def tail_probability(psi0: WaveFunction, t: float, R: float, m: float = 1.0,
                     noise_floor: float = NOISE_FLOOR, *, strict: bool = True) -> float:
    """Probability outside [-R, R] after free evolution for time ``t``.

    ``psi0`` must vanish outside [-R, R] (to within the noise floor). For
    t != 0 the value must exceed ``noise_floor``; otherwise it cannot be told
    apart from round-off and ResolutionInsufficient is raised. With
    ``strict=False`` the raw value is returned instead.
    """
    if t < 0:
        raise ValueError("t must be nonnegative")
    A = LocalizationOperator((-R, R), complement=True)
    start = localization_probability(psi0, A)
    if start > noise_floor:
        raise ValueError(f"initial state has mass {start:.3e} outside [-R, R]")
    if t == 0:
        return 0.0
    psi = WaveFunction(psi0.grid, _FreePropagator(psi0, m).values(t))
    val = localization_probability(psi, A)
    if strict and not val > noise_floor:
        raise ResolutionInsufficient(
            f"tail {val:.3e} at t={t} is not above the noise floor {noise_floor:.1e}")
    return val
