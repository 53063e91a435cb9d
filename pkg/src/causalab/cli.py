"""Batch front end: ``causalab <command> --config run.json [--out DIR] [--jobs N] [--plot KIND]``.

Each command reads flat keys from a JSON document, writes ``<command>.csv``
(with ``#`` metadata lines and shortest round-trip floats), a JSON summary
``<command>.json`` and optionally ``<command>.svg``.

Exit status: 0 success, 2 invalid configuration, 3 numerical
non-convergence, 4 a checked property failed.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np

from . import __version__
from .boundary import (BoundarySpec, GridSpec, WaveFunction, boundary_residual, boundary_term,
                       flux_report, momentum_spectrum_twisted, momentum_symmetry_defect,
                       probability_current, solve_spectrum)
from .errors import ConfigError, MissedRoot, NonConvergence
from .fock import (ModeBasis, ladder_commutator, two_point_vacuum, vacuum_annihilation_check,
                   weyl_relation_residual)
from .lieb_liniger import TONKS, energy_density, scaling_residual, solve_ll
from .plotting import ResultTable, plot
from .relcompare import (DispersionParams, TestFunction, beta, convergence_scan, kernel_gap,
                         kernel_mismatch_certificate, kernel_pair, pointwise_inequalities,
                         verify_lemma2)
from .spreading import (NOISE_FLOOR, LocalizationOperator, bump_state, classify_dichotomy,
                        decompose, evolve_bounded, evolve_free_line, gaussian_evolved,
                        gaussian_state, line_grid, p_A_series, tail_probability)

EXIT_OK, EXIT_CONFIG, EXIT_NONCONV, EXIT_ASSERT = 0, 2, 3, 4


@dataclass
class Outcome:
    columns: list
    rows: list
    values: dict = field(default_factory=dict)
    ok: bool = True
    plot_axes: tuple = ()


class Params:
    """Flat key-value access with defaults; unknown keys are a config error."""

    def __init__(self, raw: dict, defaults: dict, required: tuple = ()):
        unknown = set(raw) - set(defaults) - set(required) - {"seed", "command"}
        if unknown:
            raise ConfigError(f"unknown keys: {sorted(unknown)}")
        missing = [k for k in required if k not in raw]
        if missing:
            raise ConfigError(f"missing keys: {missing}")
        self.v = {**defaults, **raw}

    def __getitem__(self, key):
        return self.v[key]

    def num(self, key, positive=False, integer=False):
        val = self.v[key]
        if isinstance(val, bool) or not isinstance(val, (int, float)):
            raise ConfigError(f"{key} must be a number")
        if integer and int(val) != val:
            raise ConfigError(f"{key} must be an integer")
        if positive and not val > 0:
            raise ConfigError(f"{key} must be positive")
        return int(val) if integer else float(val)

    def nums(self, key, positive=False):
        val = self.v[key]
        if not isinstance(val, list) or not val:
            raise ConfigError(f"{key} must be a nonempty list")
        out = []
        for x in val:
            if isinstance(x, bool) or not isinstance(x, (int, float)):
                raise ConfigError(f"{key} entries must be numbers")
            if positive and not x > 0:
                raise ConfigError(f"{key} entries must be positive")
            out.append(float(x))
        return out

    def choice(self, key, options):
        val = self.v[key]
        if val not in options:
            raise ConfigError(f"{key} must be one of {sorted(options)}")
        return val


# ---------------------------------------------------------------------------
# helpers

_BC_KEYS = {"bc": "dirichlet", "L": 1.0, "sigma0": 0.0, "sigmaL": 0.0, "theta": 0.0}
_LEMMA_KEYS = {"shape": "gaussian", "width": 1.0, "shape2": "gaussian", "width2": 1.0,
               "d": 3, "m0": 1.0}

# flat keys accepted by each command, with their defaults ("seed" is always accepted)
DEFAULTS: dict[str, dict] = {
    "spectrum": {**_BC_KEYS, "modes": 5, "points": None},
    "twisted-momentum": {"theta": 0.0, "L": 1.0, "modes": 7, "points": None},
    "defect": {**_BC_KEYS, "pairs": 50, "modes": 6, "points": None},
    "current": {**_BC_KEYS, "modes": 2, "t": 0.1, "points": None},
    "evolve": {"state": "gaussian", "sigma": 0.5, "times": [0.0, 0.1, 0.5, 1.0], "m": 1.0,
               "points": 4096},
    "tail": {"times": [0.0, 1e-4, 1e-3, 1e-2], "R": 2.0, "m": 1.0, "points": 2 ** 20,
             "noise_floor": NOISE_FLOOR},
    "dichotomy": {"setup": "free", "state": "bump", "sigma": 0.5, "V": [-1.0, 1.0], "T": 1.0,
                  "samples": 64, "tol": 1e-10, "m": 1.0, "points": 2 ** 14, **_BC_KEYS,
                  "modes": 5},
    "fock-check": {"D": 16, "m0": 1.0, "c": 1000.0, "width": 1.0, "d": 3},
    "weyl-residual": {"amplitude": 0.5, "D_list": [8, 16, 32], "m0": 1.0},
    "kernels": {"m0": 1.0, "c": 10.0, "k_max": 20.0, "n": 201, "tau": 0.0},
    "lemma2": {**_LEMMA_KEYS, "delta": 0.5, "c": 10.0, "tau": 0.0},
    "lemma2-sweep": {**_LEMMA_KEYS, "deltas": [round(0.1 * i, 1) for i in range(1, 11)],
                     "cs": [5.0, 10.0, 50.0], "taus": [0.0, 0.01]},
    "converge": {**_LEMMA_KEYS, "c_list": [10.0, 100.0, 1000.0, 10000.0], "tau": 0.0},
    "lieb-liniger": {"gammas": [0.1, 1.0, 10.0, 100.0, 1000.0], "n_nodes": 256},
    "ll-scaling": {"lambda": 1.0, "rho1": 1.0, "rho2": 2.0, "n_nodes": 256, "m0": 0.5},
}

_LEMMA_COLS = ["delta", "c", "tau", "epsilon", "deltaC", "lhs", "rhs", "margin", "pass",
               "inequality_violations"]

# fixed CSV header of each command
COLUMNS: dict[str, list] = {
    "spectrum": ["index", "energy", "node_count", "bc_residual"],
    "twisted-momentum": ["index", "k", "k_squared", "energy_sorted", "abs_diff_sorted"],
    "defect": ["pair", "defect_re", "defect_im", "boundary_re", "boundary_im", "abs_diff"],
    "current": ["x", "j"],
    "evolve": ["t", "norm", "norm_defect", "alias_bound", "max_err_closed_form"],
    "tail": ["t", "tail", "resolved"],
    "dichotomy": ["t", "p_A"],
    "fock-check": ["check", "value", "pass"],
    "weyl-residual": ["D", "residual"],
    "kernels": ["k", "K_nr", "K_r", "gap", "beta_re", "beta_im"],
    "lemma2": _LEMMA_COLS,
    "lemma2-sweep": _LEMMA_COLS,
    "converge": ["c", "deltaC", "mismatch", "mismatch_error"],
    "lieb-liniger": ["gamma", "alpha", "f", "f_over_tonks", "residual"],
    "ll-scaling": ["rho", "gamma", "e", "e_m0_units", "e_over_rho3"],
}

KEY_DOCS = {
    "bc": "boundary condition: dirichlet, neumann, robin or twisted",
    "L": "box length",
    "sigma0": "Robin parameter at x = 0 (psi' = sigma0 psi)",
    "sigmaL": "Robin parameter at x = L (psi' = -sigmaL psi)",
    "theta": "twist angle, psi(L) = exp(i theta) psi(0)",
    "modes": "number of eigenmodes",
    "points": "grid points (null: max(512, 64 modes) on the box)",
    "pairs": "number of random state pairs",
    "t": "evolution time",
    "state": "initial state: gaussian or bump (bump is supported on [-1, 1])",
    "sigma": "Gaussian width",
    "times": "sample times",
    "m": "particle mass",
    "R": "tail radius, probability outside [-R, R]",
    "noise_floor": "values at or below this are unresolved",
    "setup": "free (line) or bounded (box)",
    "V": "localization region [a, b]; p_A = 1 - P(V)",
    "T": "end of the sampling window",
    "samples": "number of equally spaced samples on [0, T]",
    "tol": "p_A values at or below this count as zero",
    "D": "Fock cutoff (occupations 0..D)",
    "m0": "rest mass",
    "c": "speed of light",
    "width": "test function scale (Gaussian width or bump radius)",
    "width2": "scale of the second test function",
    "shape": "test function: gaussian or bump",
    "shape2": "second test function: gaussian or bump",
    "d": "space dimension, 1 or 3",
    "amplitude": "coherent smearing amplitude",
    "D_list": "cutoffs to compare",
    "k_max": "largest momentum on the grid",
    "n": "number of momentum grid points",
    "tau": "time argument of the correlators",
    "delta": "momentum cut delta of the bound",
    "deltas": "list of delta values",
    "cs": "list of c values",
    "taus": "list of tau values",
    "c_list": "c values for the log-log fit (at least 3 decades)",
    "gammas": "dimensionless couplings (each >= 1e-3)",
    "n_nodes": "Gauss-Legendre nodes",
    "lambda": "coupling constant",
    "rho1": "first density",
    "rho2": "second density (must differ from rho1)",
}


def _bc(p: Params) -> BoundarySpec:
    kind = p.choice("bc", {"dirichlet", "neumann", "robin", "twisted"})
    L = p.num("L", positive=True)
    if kind == "dirichlet":
        return BoundarySpec.dirichlet(L)
    if kind == "neumann":
        return BoundarySpec.neumann(L)
    if kind == "robin":
        return BoundarySpec.robin(p.num("sigma0"), p.num("sigmaL"), L)
    return BoundarySpec.twisted(p.num("theta"), L)


def _points(p: Params, modes: int) -> int:
    n = p.v.get("points")
    return max(512, 64 * modes) if n is None else p.num("points", positive=True, integer=True)


def _test_function(p: Params, suffix: str = "") -> TestFunction:
    kind = p.choice("shape" + suffix, {"gaussian", "bump"})
    scale = p.num("width" + suffix, positive=True)
    d = int(p.choice("d", {1, 3}))
    return TestFunction.gaussian(scale, d) if kind == "gaussian" else TestFunction.bump(scale, d)


def _mixture(modes, rng):
    c = rng.normal(size=len(modes)) + 1j * rng.normal(size=len(modes))
    c /= np.linalg.norm(c)
    g = modes[0].grid
    vals = sum(ci * m.samples for ci, m in zip(c, modes))
    der = sum(ci * m.derivative for ci, m in zip(c, modes))
    return WaveFunction(g, vals, der)


# ---------------------------------------------------------------------------
# commands

def cmd_spectrum(raw):
    p = Params(raw, DEFAULTS["spectrum"])
    bc = _bc(p)
    n = p.num("modes", positive=True, integer=True)
    modes = solve_spectrum(bc, GridSpec.for_boundary(bc, _points(p, n)), n)
    rows = []
    for m in modes:
        rows.append([m.index, m.energy, -1 if m.node_count is None else m.node_count,
                     boundary_residual(bc, m.wavefunction)])
    ok = all(r[3] < 1e-8 for r in rows)
    return Outcome(["index", "energy", "node_count", "bc_residual"], rows,
                   {"energies": [m.energy for m in modes]}, ok, ("index", "energy"))


def cmd_twisted_momentum(raw):
    p = Params(raw, DEFAULTS["twisted-momentum"])
    theta, L = p.num("theta"), p.num("L", positive=True)
    n = p.num("modes", positive=True, integer=True)
    ks = momentum_spectrum_twisted(theta, L, n)
    bc = BoundarySpec.twisted(theta, L)
    energies = sorted(m.energy for m in solve_spectrum(bc, GridSpec.for_boundary(bc, _points(p, n)), n))
    sq = sorted(k * k for k in ks)
    rows = [[i, k, k * k, e, abs(s - e)] for i, (k, s, e) in enumerate(zip(ks, sq, energies))]
    worst = max(r[4] for r in rows)
    return Outcome(["index", "k", "k_squared", "energy_sorted", "abs_diff_sorted"], rows,
                   {"max_abs_diff": worst}, worst <= 1e-10, ("index", "k"))


def cmd_defect(raw):
    p = Params(raw, DEFAULTS["defect"])
    bc = _bc(p)
    n = p.num("modes", positive=True, integer=True)
    modes = solve_spectrum(bc, GridSpec.for_boundary(bc, _points(p, n)), n)
    rng = np.random.default_rng(int(raw.get("seed", 0)))
    rows = []
    for i in range(p.num("pairs", positive=True, integer=True)):
        phi, psi = _mixture(modes, rng), _mixture(modes, rng)
        dfc, bt = momentum_symmetry_defect(phi, psi), boundary_term(phi, psi)
        rows.append([i, dfc.real, dfc.imag, bt.real, bt.imag, abs(dfc - bt)])
    worst = max(r[5] for r in rows)
    return Outcome(["pair", "defect_re", "defect_im", "boundary_re", "boundary_im", "abs_diff"],
                   rows, {"max_abs_diff": worst}, worst <= 1e-8, ("pair", "abs_diff"))


def cmd_current(raw):
    p = Params(raw, DEFAULTS["current"])
    bc = _bc(p)
    n = p.num("modes", positive=True, integer=True)
    grid = GridSpec.for_boundary(bc, _points(p, n))
    modes = solve_spectrum(bc, grid, n)
    psi0 = WaveFunction(grid, sum(m.samples for m in modes) / math.sqrt(n))
    psi_t = evolve_bounded(decompose(psi0, modes), p.num("t"))
    rep = flux_report(bc, psi_t)
    xs = grid.points
    stride = max(1, grid.n // 128)
    rows = [[float(x), probability_current(psi_t, float(x))] for x in xs[::stride]]
    return Outcome(["x", "j"], rows, {"j0": rep.j0, "jL": rep.jL,
                                      "classification": rep.classification.value},
                   True, ("x", "j"))


def cmd_evolve(raw):
    p = Params(raw, DEFAULTS["evolve"])
    state = p.choice("state", {"gaussian", "bump"})
    m = p.num("m", positive=True)
    n = p.num("points", positive=True, integer=True)
    sigma = p.num("sigma", positive=True)
    if state == "gaussian":
        grid = line_grid(6 * sigma, n)
        psi0 = gaussian_state(grid, sigma)
    else:
        grid = line_grid(1.0, n)
        psi0 = bump_state(grid)
    rows = []
    for t in p.nums("times"):
        r = evolve_free_line(psi0, t, m, full_output=True)
        err = (float(np.abs(r.psi.values - gaussian_evolved(grid.points, t, sigma, m)).max())
               if state == "gaussian" else 0.0)
        rows.append([t, r.psi.norm, r.norm_defect, r.alias_bound, err])
    ok = all(r[2] <= 1e-10 for r in rows) and all(r[4] <= 1e-8 for r in rows)
    return Outcome(["t", "norm", "norm_defect", "alias_bound", "max_err_closed_form"], rows,
                   {"max_norm_defect": max(r[2] for r in rows)}, ok, ("t", "norm"))


def cmd_tail(raw):
    p = Params(raw, DEFAULTS["tail"])
    grid = line_grid(1.0, p.num("points", positive=True, integer=True))
    psi0 = bump_state(grid)
    R, m, floor = p.num("R", positive=True), p.num("m", positive=True), p.num("noise_floor", positive=True)
    rows = []
    for t in p.nums("times"):
        v = tail_probability(psi0, t, R, m, floor, strict=False)
        resolved = t == 0 or v > floor
        rows.append([t, v, int(resolved)])
    ok = all(r[2] for r in rows)
    return Outcome(["t", "tail", "resolved"], rows, {"resolved_all": ok}, ok, ("t", "tail"))


def cmd_dichotomy(raw):
    p = Params(raw, DEFAULTS["dichotomy"])
    setup = p.choice("setup", {"free", "bounded"})
    times = np.linspace(0.0, p.num("T", positive=True), p.num("samples", positive=True, integer=True))
    V = p.nums("V")
    if len(V) != 2:
        raise ConfigError("V must be [a, b]")
    A = LocalizationOperator(tuple(V), complement=True)
    if setup == "free":
        n = p.num("points", positive=True, integer=True)
        if p.choice("state", {"gaussian", "bump"}) == "bump":
            psi0 = bump_state(line_grid(1.0, n))
        else:
            s = p.num("sigma", positive=True)
            psi0 = gaussian_state(line_grid(6 * s, n), s)
        rec = p_A_series(psi0, A, times, "free", p.num("m", positive=True))
    else:
        bc = _bc(p)
        k = p.num("modes", positive=True, integer=True)
        grid = GridSpec.for_boundary(bc, _points(p, k))
        modes = solve_spectrum(bc, grid, k)
        rng = np.random.default_rng(int(raw.get("seed", 0)))
        psi0 = _mixture(modes, rng)
        rec = p_A_series(psi0, A, times, decompose(psi0, modes))
    verdict = classify_dichotomy(rec, p.num("tol"))
    rows = [[float(t), float(v)] for t, v in zip(rec.times, rec.values)]
    return Outcome(["t", "p_A"], rows, {"verdict": verdict.branch.value,
                                        "zero_fraction": verdict.zero_fraction},
                   True, ("t", "p_A"))


def cmd_fock_check(raw):
    p = Params(raw, DEFAULTS["fock-check"])
    D = p.num("D", positive=True, integer=True)
    m0, c = p.num("m0", positive=True), p.num("c", positive=True)
    g = TestFunction.gaussian(p.num("width", positive=True), int(p.choice("d", {1, 3})))
    comm = ladder_commutator(D)
    ladder = float(np.abs(comm[:D, :D] - np.eye(D)).max())
    basis = ModeBasis.from_functions([g], m0=m0, c=c)
    vac = vacuum_annihilation_check(ModeBasis.from_functions([g], m0=m0), D)
    nr = two_point_vacuum(basis, g, g).real
    rel = two_point_vacuum(basis, g, g, "relativistic").real
    rows = [["ladder_defect_below_cutoff", ladder, int(ladder == 0.0)],
            ["vacuum_annihilation", vac, int(vac < 1e-12)],
            ["two_point_nonrel", nr, 1],
            ["two_point_rel", rel, 1],
            ["two_point_ratio", rel / nr, int(abs(rel / nr - 1) < 1e-4)]]
    return Outcome(["check", "value", "pass"], rows, {r[0]: r[1] for r in rows},
                   all(r[2] for r in rows))


def cmd_weyl_residual(raw):
    p = Params(raw, DEFAULTS["weyl-residual"])
    amp, m0 = p.num("amplitude"), p.num("m0", positive=True)
    rows = [[int(D), weyl_relation_residual([amp], [amp], int(D), m0)] for D in p.nums("D_list", True)]
    dec = all(b[1] < a[1] for a, b in zip(rows, rows[1:]))
    return Outcome(["D", "residual"], rows, {"strictly_decreasing": dec}, dec, ("D", "residual"))


def cmd_kernels(raw):
    p = Params(raw, DEFAULTS["kernels"])
    par = DispersionParams(p.num("m0", positive=True), p.num("c", positive=True))
    k = np.linspace(0.0, p.num("k_max", positive=True), p.num("n", positive=True, integer=True))
    knr, kr = kernel_pair(k, par)
    b = beta(k, p.num("tau"), par)
    rows = [list(map(float, r)) for r in zip(k, knr, kr, kernel_gap(k, par), b.real, b.imag)]
    ok = bool(np.all(kr <= knr))
    return Outcome(["k", "K_nr", "K_r", "gap", "beta_re", "beta_im"], rows, {}, ok, ("k", "gap"))


def _lemma_cell(args):
    (shape, width, shape2, width2, d, m0, delta, c, tau) = args
    mk = lambda s, w: TestFunction.gaussian(w, d) if s == "gaussian" else TestFunction.bump(w, d)
    par = DispersionParams(m0, c)
    rep = verify_lemma2(mk(shape, width), mk(shape2, width2), tau, delta, par)
    ineq = pointwise_inequalities(par, delta, tau)
    return [delta, c, tau, rep.epsilon, rep.deltaC, rep.lhs, rep.rhs, rep.margin,
            int(rep.passed), sum(ineq.violations)]


def _lemma_args(p, delta, c, tau):
    return (p.choice("shape", {"gaussian", "bump"}), p.num("width", positive=True),
            p.choice("shape2", {"gaussian", "bump"}), p.num("width2", positive=True),
            int(p.choice("d", {1, 3})), p.num("m0", positive=True), delta, c, tau)


def cmd_lemma2(raw):
    p = Params(raw, DEFAULTS["lemma2"])
    row = _lemma_cell(_lemma_args(p, p.num("delta", positive=True), p.num("c", positive=True),
                                  p.num("tau")))
    ok = bool(row[8]) and row[9] == 0
    return Outcome(_LEMMA_COLS, [row], dict(zip(_LEMMA_COLS, row)), ok)


def _pmap(fn, items, jobs):
    if jobs <= 1:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=jobs) as ex:
        return list(ex.map(fn, items))  # map keeps input order


def cmd_lemma2_sweep(raw, jobs=1):
    p = Params(raw, DEFAULTS["lemma2-sweep"])
    cells = [_lemma_args(p, d, c, t) for d in p.nums("deltas", True)
             for c in p.nums("cs", True) for t in p.nums("taus")]
    rows = _pmap(_lemma_cell, cells, jobs)
    ok = all(r[8] and r[9] == 0 for r in rows)
    return Outcome(_LEMMA_COLS, rows, {"cells": len(rows), "all_pass": ok}, ok,
                   ("delta", "c", "margin"))


def cmd_converge(raw):
    p = Params(raw, DEFAULTS["converge"])
    f1, f2 = _test_function(p), _test_function(p, "2")
    m0 = p.num("m0", positive=True)
    scan = convergence_scan(f1, f2, p.num("tau"), p.nums("c_list", True), m0)
    certs = [kernel_mismatch_certificate(DispersionParams(m0, c), f1) for c in scan.c]
    rows = [[float(c), float(v), cert.value, cert.error] for c, v, cert in zip(scan.c, scan.deltaC, certs)]
    ok = abs(scan.slope + 2) <= 0.1 and all(cert.value > 0 for cert in certs)
    return Outcome(["c", "deltaC", "mismatch", "mismatch_error"], rows, {"slope": scan.slope}, ok,
                   ("c", "deltaC"))


def _ll_cell(args):
    gamma, n = args
    s = solve_ll(gamma, n)
    return [gamma, s.alpha, s.f_gamma, s.f_gamma / TONKS, s.residual]


def cmd_lieb_liniger(raw, jobs=1):
    p = Params(raw, DEFAULTS["lieb-liniger"])
    n = p.num("n_nodes", positive=True, integer=True)
    try:
        rows = _pmap(_ll_cell, [(g, n) for g in p.nums("gammas", True)], jobs)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    return Outcome(["gamma", "alpha", "f", "f_over_tonks", "residual"], rows, {}, True,
                   ("gamma", "f"))


def cmd_ll_scaling(raw):
    p = Params(raw, DEFAULTS["ll-scaling"])
    lam, r1, r2 = p.num("lambda", positive=True), p.num("rho1", positive=True), p.num("rho2", positive=True)
    n = p.num("n_nodes", positive=True, integer=True)
    if r1 == r2:
        raise ConfigError("rho1 and rho2 must differ")
    res = scaling_residual(lam, r1, r2, n)
    m0 = p.num("m0", positive=True)
    rows = []
    for rho in (r1, r2):
        e = energy_density(lam, rho, n)
        # with hbar = 1 the energy scales as 1/(2 m0) relative to the 2m0 = 1 units
        rows.append([rho, lam / rho, e, e / (2 * m0), e / rho ** 3])
    return Outcome(["rho", "gamma", "e", "e_m0_units", "e_over_rho3"], rows,
                   {"scaling_residual": res}, res < 1e-9, ("rho", "e"))


COMMANDS: dict[str, Callable] = {
    "spectrum": cmd_spectrum,
    "twisted-momentum": cmd_twisted_momentum,
    "defect": cmd_defect,
    "current": cmd_current,
    "evolve": cmd_evolve,
    "tail": cmd_tail,
    "dichotomy": cmd_dichotomy,
    "fock-check": cmd_fock_check,
    "weyl-residual": cmd_weyl_residual,
    "kernels": cmd_kernels,
    "lemma2": cmd_lemma2,
    "lemma2-sweep": cmd_lemma2_sweep,
    "converge": cmd_converge,
    "lieb-liniger": cmd_lieb_liniger,
    "ll-scaling": cmd_ll_scaling,
}
_PARALLEL = {"lemma2-sweep", "lieb-liniger"}


# ---------------------------------------------------------------------------
# output

def fmt_cell(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        v = float(v)
        if not math.isfinite(v):
            raise ValueError("non-finite value in result table")
        return repr(v)
    return str(v)


def render_csv(table: ResultTable) -> str:
    lines = [f"# {k}: {v}" for k, v in table.metadata.items()]
    lines.append(",".join(table.columns))
    lines.extend(",".join(fmt_cell(c) for c in row) for row in table.rows)
    return "\n".join(lines) + "\n"


def config_hash(cfg: dict) -> str:
    return hashlib.sha256(json.dumps(cfg, sort_keys=True).encode()).hexdigest()


def run(command: str, cfg: dict, out: Path, jobs: int = 1, plot_kind: str | None = None) -> int:
    """Execute one command and write its artifacts; returns the exit status."""
    if command not in COMMANDS:
        print(f"error: unknown command {command!r}", file=sys.stderr)
        return EXIT_CONFIG
    t0 = time.perf_counter()
    try:
        fn = COMMANDS[command]
        res = fn(cfg, jobs) if command in _PARALLEL else fn(cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (NonConvergence, MissedRoot) as exc:
        print(f"non-convergence: {exc}", file=sys.stderr)
        return EXIT_NONCONV
    except AssertionError as exc:
        print(f"assertion failed: {exc}", file=sys.stderr)
        return EXIT_ASSERT
    except (ValueError, TypeError, KeyError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    elapsed = time.perf_counter() - t0
    if res.columns != COLUMNS[command]:
        raise RuntimeError(f"{command} produced header {res.columns}, expected {COLUMNS[command]}")

    h = config_hash(cfg)
    meta = {"command": command, "config_hash": h, "causalab": __version__,
            "numpy": np.__version__, "columns": ";".join(res.columns)}
    table = ResultTable(res.columns, res.rows, meta)
    out.mkdir(parents=True, exist_ok=True)
    (out / f"{command}.csv").write_text(render_csv(table), encoding="utf-8")
    summary = {"command": command, "config_hash": h, "ok": res.ok,
               "values": _jsonable(res.values), "timings": {"seconds": elapsed}}
    if "verdict" in res.values:
        summary["verdict"] = res.values["verdict"]
    (out / f"{command}.json").write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n",
                                         encoding="utf-8")
    if plot_kind:
        axes = res.plot_axes
        if len(axes) < 2:
            print(f"error: command {command} has no default plot axes", file=sys.stderr)
            return EXIT_CONFIG
        x, y, *z = axes
        # probabilities are drawn on their full range
        kw = {"ylim": (0.0, 1.0)} if plot_kind == "line" and y == "p_A" else {}
        svg = plot(table, plot_kind, x, y, z[0] if z else None, **kw)
        (out / f"{command}.svg").write_text(svg, encoding="utf-8")
    if not res.ok:
        print(f"{command}: property check failed", file=sys.stderr)
        return EXIT_ASSERT
    return EXIT_OK


def _jsonable(v):
    if isinstance(v, dict):
        return {k: _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, (np.floating, float)):
        return float(v)
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, np.bool_):
        return bool(v)
    return v


def _fmt_default(v) -> str:
    return json.dumps(v)


def config_reference() -> str:
    """Markdown reference of every command's flat keys, defaults and CSV header."""
    out = ["All keys are optional; unknown keys are rejected (exit 2). `seed` is accepted by",
           "every command and seeds the random mixtures of `defect` and bounded `dichotomy`.", ""]
    for cmd in sorted(COMMANDS):
        out.append(f"### `{cmd}`")
        out.append("")
        out.append("CSV columns: " + ", ".join(f"`{c}`" for c in COLUMNS[cmd]))
        out.append("")
        out.append("| key | default | meaning |")
        out.append("|---|---|---|")
        for key, val in DEFAULTS[cmd].items():
            out.append(f"| `{key}` | `{_fmt_default(val)}` | {KEY_DOCS[key]} |")
        out.append("")
    return "\n".join(out)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="causalab", description=__doc__.splitlines()[0])
    ap.add_argument("command", choices=sorted(COMMANDS))
    ap.add_argument("--config", required=True, help="JSON file with flat keys")
    ap.add_argument("--out", default=".", help="output directory")
    ap.add_argument("--jobs", type=int, default=1, help="worker processes for sweeps")
    ap.add_argument("--plot", choices=["line", "loglog", "heatmap"], default=None)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    try:
        cfg = json.loads(Path(args.config).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if not isinstance(cfg, dict):
        print("config error: top level must be an object", file=sys.stderr)
        return EXIT_CONFIG
    if args.jobs < 1:
        print("config error: --jobs must be >= 1", file=sys.stderr)
        return EXIT_CONFIG
    return run(args.command, cfg, Path(args.out), args.jobs, args.plot)


if __name__ == "__main__":
    sys.exit(main())
