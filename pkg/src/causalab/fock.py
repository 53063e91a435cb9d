"""Truncated Fock spaces for finitely many field modes.

Each mode carries occupations 0..D; the full space is the tensor product, so
ladder operators stay exactly factorized and [a_i, a_i^dag] = 1 holds exactly
on occupations below the cutoff.

Smeared operators follow these conventions (hbar = 1, (f, g) = int conj(f) g):

    a(h)   = sum_i conj(<u_i, h>) a_i              (antilinear in h)
    Phi(f) = (2 m0)^(-1/2) (a(f) + a(f)^dag)
    Pi(g)  = -i (m0/2)^(1/2) (a(g) - a(g)^dag)

so that [Phi(f), Pi(g)] = i Re(f, g) and a(f) = (m0/2)^(1/2) Phi(f) + i (2 m0)^(-1/2) Pi(f).
The relativistic pair uses w = c/sqrt(2 omega_k) and v = 1/w:

    Phi_r(f) = a(w f) + a(w f)^dag,  Pi_r(g) = -(i/2) (a(v g) - a(v g)^dag).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from functools import reduce
from typing import Callable, Sequence, Union

import numpy as np

from .errors import AmplitudeTooLarge, DimensionMismatch, SpanViolation, UnsafeState
from .numerics import DEFAULT_QUAD, QuadratureSpec, matrix_exponential
from .relcompare import (DispersionParams, TestFunction, kinetic_rel, omega_c,
                         radial_integral)

MAX_DIM = 4096
GRAM_TOL = 1e-10
SPAN_TOL = 1e-10
# off-diagonal Gram entries vanish, so they need an absolute target
_GRAM_QUAD = QuadratureSpec(relative_tolerance=1e-12, absolute_tolerance=1e-13)


def build_ladder(D: int) -> tuple[np.ndarray, np.ndarray]:
    """(a, a^dag) on occupations 0..D, with a[n-1, n] = sqrt(n)."""
    if D < 1:
        raise ValueError("cutoff D must be >= 1")
    a = np.diag(np.sqrt(np.arange(1, D + 1, dtype=float)), k=1)
    return a, a.T.copy()


def ladder_products(D: int) -> tuple[np.ndarray, np.ndarray]:
    """(a a^dag, a^dag a) for the cutoff-D ladder, exact in float64.

    The entries sqrt(n) are irrational, so squaring their float64 values is
    off by an ulp; the products are formed in extended precision and rounded
    once, which returns the exact integers diag(1..D, 0) and diag(0..D).
    """
    if D < 1:
        raise ValueError("cutoff D must be >= 1")
    a = np.diag(np.sqrt(np.arange(1, D + 1, dtype=np.longdouble)), k=1)
    return (a @ a.T).astype(float), (a.T @ a).astype(float)


def ladder_commutator(D: int) -> np.ndarray:
    """[a, a^dag] = I - (D + 1)|D><D|, exactly."""
    aad, ada = ladder_products(D)
    return aad - ada


class TruncatedFock:
    """Tensor product of ``n_modes`` copies of C^(D+1)."""

    def __init__(self, n_modes: int, D: int):
        if n_modes < 1 or D < 1:
            raise ValueError("need n_modes >= 1 and D >= 1")
        dim = (D + 1) ** n_modes
        if dim > MAX_DIM:
            raise DimensionMismatch(f"dimension {dim} exceeds {MAX_DIM}")
        self.n_modes, self.D, self.dim = n_modes, D, dim
        a, _ = build_ladder(D)
        eye = np.eye(D + 1)
        self._a = []
        for i in range(n_modes):
            factors = [a if j == i else eye for j in range(n_modes)]
            self._a.append(reduce(np.kron, factors))
        # occupation of mode i in each basis state (mode 0 is the slowest index)
        idx = np.arange(dim)
        self.occupations = np.stack(
            [(idx // (D + 1) ** (n_modes - 1 - i)) % (D + 1) for i in range(n_modes)], axis=1)

    def a(self, i: int) -> np.ndarray:
        return self._a[i]

    def adag(self, i: int) -> np.ndarray:
        return self._a[i].T

    def number_operator(self) -> np.ndarray:
        return np.diag(self.occupations.sum(axis=1).astype(float))

    def vacuum(self) -> np.ndarray:
        v = np.zeros(self.dim, dtype=complex)
        v[0] = 1.0
        return v

    def basis_state(self, occ: Sequence[int]) -> np.ndarray:
        occ = np.asarray(occ)
        if occ.shape != (self.n_modes,) or np.any(occ < 0) or np.any(occ > self.D):
            raise ValueError(f"occupation {occ} not representable")
        j = int(np.flatnonzero((self.occupations == occ).all(axis=1))[0])
        v = np.zeros(self.dim, dtype=complex)
        v[j] = 1.0
        return v

    def coherent_state(self, alphas: Sequence[complex]) -> np.ndarray:
        """Product of truncated coherent states, renormalized."""
        alphas = np.asarray(alphas, dtype=complex)
        n = np.arange(self.D + 1)
        logf = np.array([math.lgamma(k + 1) for k in n])
        vecs = []
        for al in alphas:
            v = np.where(n == 0, 1.0 + 0j, al ** n / np.exp(0.5 * logf))
            vecs.append(v / np.linalg.norm(v))
        return reduce(np.kron, vecs)

    def annihilator(self, coeffs: Sequence[complex]) -> np.ndarray:
        """sum_i conj(coeffs_i) a_i, i.e. a(h) for h with mode coordinates ``coeffs``."""
        coeffs = np.asarray(coeffs, dtype=complex)
        if coeffs.shape != (self.n_modes,):
            raise DimensionMismatch("coefficient vector does not match mode count")
        return sum(np.conj(c) * a for c, a in zip(coeffs, self._a))

    def max_occupation(self, chi: np.ndarray, tol: float = 1e-14) -> int:
        """Largest single-mode occupation present in ``chi``."""
        present = np.abs(chi) > tol * max(np.abs(chi).max(), 1e-300)
        return int(self.occupations[present].max()) if present.any() else 0

    def safe_projector(self, level: int) -> np.ndarray:
        """Diagonal 0/1 vector selecting states with every occupation <= level."""
        return (self.occupations <= level).all(axis=1).astype(float)


# ---------------------------------------------------------------------------
# mode bases

Profile = Callable[[np.ndarray], np.ndarray]


class Weighting(str, Enum):
    NONRELATIVISTIC = "nonrelativistic"
    RELATIVISTIC = "relativistic"


def _as_profile(f: Union[TestFunction, Profile]) -> Profile:
    return f.ft if isinstance(f, TestFunction) else f


class ModeBasis:
    """Orthonormal radial mode functions u_i in momentum space.

    The modes are built from generator profiles g_j by diagonalizing their
    Gram matrix (directions with relative weight below ``rank_tol`` are
    dropped), so u_i = sum_j C[i, j] g_j.
    """

    def __init__(self, generators: Sequence[Profile], d: int, m0: float = 1.0,
                 c: float | None = None, quad: QuadratureSpec = DEFAULT_QUAD,
                 rank_tol: float = 1e-13):
        if not generators:
            raise ValueError("need at least one generator")
        self.generators = tuple(generators)
        self.d, self.m0, self.c, self.quad = d, float(m0), c, quad
        n = len(self.generators)
        G = np.empty((n, n), dtype=complex)
        for i in range(n):
            for j in range(i, n):
                G[i, j] = self._inner(self.generators[i], self.generators[j])
                G[j, i] = np.conj(G[i, j])
        self.gram_generators = G
        s = 1.0 / np.sqrt(np.real(np.diag(G)))
        Gs = G * np.outer(s, s)
        lam, V = np.linalg.eigh(Gs)
        keep = lam > rank_tol * lam.max()
        self.dropped_weight = float(lam[~keep].sum()) if (~keep).any() else 0.0
        # u = C g with C = Lambda^{-1/2} V^dag S
        self.C = (V[:, keep] / np.sqrt(lam[keep])).conj().T * s[None, :]
        self.C = self.C[::-1]  # largest-weight direction first
        gram = self.gram
        if np.abs(gram - np.eye(len(gram))).max() > 1e-13:
            # one Lowdin step against the measured overlaps of the assembled modes
            lam2, V2 = np.linalg.eigh(gram.conj())
            self.C = (V2 / np.sqrt(lam2)) @ V2.conj().T @ self.C
            gram = self.gram
        if np.abs(gram - np.eye(len(gram))).max() > GRAM_TOL:
            raise ValueError("mode functions are not orthonormal within 1e-10")

    # -- constructors -------------------------------------------------------
    @classmethod
    def from_functions(cls, fs: Sequence[TestFunction], m0: float = 1.0,
                       c: float | None = None, **kw) -> "ModeBasis":
        """Basis spanning ``fs``; with finite ``c`` it also spans w f and v f.

        With q = (1 + x)^(1/4), x = (k/(m0 c))^2, the relativistic directions
        enter as (q - 1) f ~ x f/4 and (w/w0 - 1 + v/v0 - 1) f = (q - 1)^2/q f
        ~ x^2 f/16. These span the same space as {f, w f, v f} but stay well
        separated for every c (w/w0 - 1 and v/v0 - 1 alone agree up to sign
        at leading order), and the factors (m0 c)^2 and (m0 c)^4 keep their
        norms O(1).
        """
        d = fs[0].d
        if any(f.d != d for f in fs):
            raise ValueError("mixed dimensions")
        gens = [f.ft for f in fs]
        if c is not None:
            p = DispersionParams(m0, c)
            s = (m0 * c) ** 2
            for f in fs:
                gens.append(lambda k, f=f: s * _v_rel_minus_one(k, p) * f.ft(k))
                gens.append(lambda k, f=f: s * s * _wv_second_order(k, p) * f.ft(k))
        return cls(gens, d, m0, c, **kw)

    # -- geometry -----------------------------------------------------------
    def _inner(self, f: Profile, g: Profile) -> complex:
        return complex(radial_integral(lambda k: np.conj(f(k)) * g(k), self.d, self.quad))

    @property
    def n_modes(self) -> int:
        return self.C.shape[0]

    @property
    def gram(self) -> np.ndarray:
        """Inner products of the assembled mode functions, by direct quadrature.

        (Forming conj(C) G C^T instead would add round-off of order
        eps / lambda_min for nearly dependent generators.)
        """
        n = self.n_modes
        out = np.empty((n, n), dtype=complex)
        for i in range(n):
            for j in range(i, n):
                out[i, j] = radial_integral(
                    lambda k, i=i, j=j: np.conj(self.mode(i)(k)) * self.mode(j)(k), self.d, _GRAM_QUAD)
                out[j, i] = np.conj(out[i, j])
        return out

    def mode(self, i: int) -> Profile:
        row = self.C[i]
        return lambda k: sum(cj * g(k) for cj, g in zip(row, self.generators))

    def coordinates(self, h: Union[TestFunction, Profile], *, check: bool = True) -> np.ndarray:
        """<u_i, h> for all modes; SpanViolation if h sticks out of the span."""
        h = _as_profile(h)
        gh = np.array([self._inner(g, h) for g in self.generators])
        coords = self.C.conj() @ gh
        if check:
            hh = self._inner(h, h).real
            miss = hh - float(np.sum(np.abs(coords) ** 2))
            if miss > SPAN_TOL * max(hh, 1e-300):
                raise SpanViolation(f"function lies outside the mode span (defect {miss:.3e})")
        return coords

    def one_body(self, weight: Profile) -> np.ndarray:
        """Matrix <u_i, weight u_j> of a multiplication operator in momentum space."""
        n = len(self.generators)
        W = np.empty((n, n), dtype=complex)
        for i in range(n):
            for j in range(n):
                gi, gj = self.generators[i], self.generators[j]
                W[i, j] = self._inner(gi, lambda k, gj=gj: weight(k) * gj(k))
        return self.C.conj() @ W @ self.C.T


def _w0(m0):
    return 1.0 / math.sqrt(2.0 * m0)


def _v_rel_minus_one(k, p: DispersionParams):
    """(sqrt(2 omega)/c) / v0 - 1 = (1 + x)^(1/4) - 1, stably."""
    x = (np.asarray(k, dtype=float) / (p.m0 * p.c)) ** 2
    q = (1.0 + x) ** 0.25
    return x / ((1.0 + q) * (1.0 + q * q))


def _wv_second_order(k, p: DispersionParams):
    """(w/w0 - 1) + (v/v0 - 1) = (q - 1)^2 / q with q = (1 + x)^(1/4)."""
    x = (np.asarray(k, dtype=float) / (p.m0 * p.c)) ** 2
    q = (1.0 + x) ** 0.25
    qm1 = x / ((1.0 + q) * (1.0 + q * q))
    return qm1 * qm1 / q


def w_weight(k, p: DispersionParams):
    return p.c / np.sqrt(2.0 * omega_c(k, p))


def v_weight(k, p: DispersionParams):
    return np.sqrt(2.0 * omega_c(k, p)) / p.c


# ---------------------------------------------------------------------------
# field operators

Smearing = Union[TestFunction, Profile, np.ndarray]


class FieldOperators:
    """Smeared fields on a truncated Fock space over a mode basis."""

    def __init__(self, basis: ModeBasis, D: int,
                 weighting: Weighting | str = Weighting.NONRELATIVISTIC):
        self.basis = basis
        self.fock = TruncatedFock(basis.n_modes, D)
        self.weighting = Weighting(weighting)
        if self.weighting is Weighting.RELATIVISTIC and basis.c is None:
            raise ValueError("relativistic fields need a basis built with finite c")
        self.m0 = basis.m0
        self.params = None if basis.c is None else DispersionParams(basis.m0, basis.c)

    def _coords(self, f: Smearing, weight: Callable | None = None) -> np.ndarray:
        if isinstance(f, np.ndarray):
            if weight is not None:
                raise ValueError("coordinate input cannot be reweighted; pass a profile")
            return f.astype(complex)
        prof = _as_profile(f)
        if weight is not None:
            prof = lambda k, prof=prof: weight(k) * prof(k)
        return self.basis.coordinates(prof)

    def a(self, f: Smearing) -> np.ndarray:
        return self.fock.annihilator(self._coords(f))

    def Phi(self, f: Smearing) -> np.ndarray:
        if self.weighting is Weighting.RELATIVISTIC:
            A = self.fock.annihilator(self._coords(f, lambda k: w_weight(k, self.params)))
            return A + A.conj().T
        A = self.a(f)
        return (A + A.conj().T) / math.sqrt(2.0 * self.m0)

    def Pi(self, g: Smearing) -> np.ndarray:
        if self.weighting is Weighting.RELATIVISTIC:
            A = self.fock.annihilator(self._coords(g, lambda k: v_weight(k, self.params)))
            return -0.5j * (A - A.conj().T)
        A = self.a(g)
        return -1j * math.sqrt(0.5 * self.m0) * (A - A.conj().T)

    def a_from_fields(self, f: Smearing) -> np.ndarray:
        """(m0/2)^(1/2) Phi(f) + i (2 m0)^(-1/2) Pi(f), which equals a(f)."""
        if self.weighting is not Weighting.NONRELATIVISTIC:
            raise ValueError("defined for the nonrelativistic fields")
        return (math.sqrt(0.5 * self.m0) * self.Phi(f)
                + 1j / math.sqrt(2.0 * self.m0) * self.Pi(f))

    def number_operator(self) -> np.ndarray:
        return self.fock.number_operator()

    def hamiltonian(self, relativistic: bool = False) -> np.ndarray:
        """sum_ij h_ij a_i^dag a_j with h the kinetic (or omega - m0 c^2) matrix."""
        if relativistic:
            if self.params is None:
                raise ValueError("relativistic Hamiltonian needs finite c")
            h = self.basis.one_body(lambda k: kinetic_rel(k, self.params))
        else:
            h = self.basis.one_body(lambda k: np.asarray(k, dtype=float) ** 2 / (2 * self.m0))
        n = self.fock.n_modes
        H = np.zeros((self.fock.dim, self.fock.dim), dtype=complex)
        for i in range(n):
            for j in range(n):
                H += h[i, j] * self.fock.adag(i) @ self.fock.a(j)
        return H


def smeared_commutator(fields: FieldOperators, f: Smearing, g: Smearing,
                       chi: np.ndarray | None = None) -> complex:
    """<chi, [Phi(f), Pi(g)] chi>, default chi = vacuum.

    Raises UnsafeState if chi has weight on occupations above D - 2, where the
    truncation changes the commutator.
    """
    fk = fields.fock
    chi = fk.vacuum() if chi is None else np.asarray(chi, dtype=complex)
    if fk.max_occupation(chi) > fk.D - 2:
        raise UnsafeState("state reaches the occupation cutoff")
    P, Q = fields.Phi(f), fields.Pi(g)
    comm = P @ Q - Q @ P
    return complex(np.vdot(chi, comm @ chi))


def weyl_relation_residual(f: Sequence[float], g: Sequence[float], D: int,
                           m0: float = 1.0, phase_sign: int = 1,
                           safe_level: int | None = None) -> float:
    """Operator-norm defect of exp(iPi(f)) exp(iPhi(g)) = exp(iPhi(g)) exp(iPi(f)) exp(i s (f, g)).

    ``f`` and ``g`` are real mode coordinates (one entry per mode). The
    residual is measured on states with every occupation <= ``safe_level``
    (default D // 4). ``phase_sign`` s = +1 is the sign consistent with
    [Phi, Pi] = i (f, g); s = -1 is accepted for comparison.

    Raises AmplitudeTooLarge when a coherent displacement exceeds sqrt(D)/4.
    """
    f = np.atleast_1d(np.asarray(f, dtype=float))
    g = np.atleast_1d(np.asarray(g, dtype=float))
    if f.shape != g.shape:
        raise DimensionMismatch("f and g need the same number of modes")
    # displacement amplitudes of exp(i Pi(f)) and exp(i Phi(g))
    amp = max(np.linalg.norm(f) * math.sqrt(0.5 * m0), np.linalg.norm(g) / math.sqrt(2 * m0))
    if amp > math.sqrt(D) / 4:
        raise AmplitudeTooLarge(f"amplitude {amp:.3g} exceeds sqrt(D)/4 = {math.sqrt(D) / 4:.3g}")
    fk = TruncatedFock(f.size, D)
    Af, Ag = fk.annihilator(f), fk.annihilator(g)
    Phi_g = (Ag + Ag.conj().T) / math.sqrt(2 * m0)
    Pi_f = -1j * math.sqrt(0.5 * m0) * (Af - Af.conj().T)
    fg = float(np.dot(f, g))
    U = matrix_exponential(1j * Pi_f)
    V = matrix_exponential(1j * Phi_g)
    R = U @ V - V @ U * np.exp(1j * phase_sign * fg)
    level = D // 4 if safe_level is None else safe_level
    cols = fk.safe_projector(level).astype(bool)
    return float(np.linalg.norm(R[:, cols], 2))


def vacuum_annihilation_check(basis: ModeBasis, D: int) -> float:
    """max_i ||a(u_i) Psi_0|| with a(u_i) assembled from the smeared fields."""
    fields = FieldOperators(basis, D)
    vac = fields.fock.vacuum()
    worst = 0.0
    for i in range(basis.n_modes):
        e = np.zeros(basis.n_modes, dtype=complex)
        e[i] = 1.0
        worst = max(worst, float(np.linalg.norm(fields.a_from_fields(e) @ vac)))
    if worst >= 1e-12:
        raise AssertionError(f"vacuum not annihilated: {worst:.3e}")
    return worst


def coherent_truncation_defect(alpha: complex, D: int) -> float:
    """||(a - alpha)|alpha>_D|| for the renormalized truncated coherent state."""
    fk = TruncatedFock(1, D)
    v = fk.coherent_state([alpha])
    return float(np.linalg.norm(fk.a(0) @ v - alpha * v))


def two_point_vacuum(basis: ModeBasis, f1: Smearing, f2: Smearing,
                     weighting: Weighting | str = Weighting.NONRELATIVISTIC) -> complex:
    """<Psi_0, Phi(f1) Phi(f2) Psi_0> as a matrix element on a one-quantum truncation."""
    fields = FieldOperators(basis, 1, weighting)
    vac = fields.fock.vacuum()
    return complex(np.vdot(vac, fields.Phi(f1) @ (fields.Phi(f2) @ vac)))
