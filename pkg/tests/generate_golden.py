"""Regenerate tests/golden.json and tests/golden_cli/ from the independent oracles
and from fixed library runs. Run from the repository root:

    python3 tests/generate_golden.py
"""

from __future__ import annotations

import json
import math
import sys
import tempfile
from pathlib import Path

import numpy as np

HERE = Path(__file__).resolve().parent
sys.path.insert(0, str(HERE))

import oracles  # noqa: E402
from causalab import cli  # noqa: E402
from causalab.fock import coherent_truncation_defect, weyl_relation_residual  # noqa: E402
from causalab.lieb_liniger import solve_ll  # noqa: E402
from causalab.relcompare import DispersionParams, TestFunction, verify_lemma2  # noqa: E402
from causalab.spreading import bump_state, line_grid, tail_probability  # noqa: E402

CLI_CONFIGS = {
    "spectrum": {"bc": "dirichlet", "L": 3.14159265358979, "modes": 3},
    "twisted-momentum": {"theta": 1.0, "L": 2.0, "modes": 7},
    "defect": {"bc": "robin", "sigma0": 1.0, "sigmaL": 1.0, "L": 1.0, "pairs": 10, "seed": 7},
    "current": {"bc": "robin", "sigma0": 1.0, "sigmaL": 1.0, "L": 1.0, "modes": 2, "t": 0.1},
    "evolve": {"state": "gaussian", "sigma": 0.5, "times": [0.0, 0.5], "points": 2048},
    "tail": {"times": [0.0, 0.01, 0.02], "points": 65536},
    "dichotomy": {"setup": "free", "state": "bump", "V": [-1.0, 1.0], "T": 1.0},
    "fock-check": {"D": 8},
    "weyl-residual": {"D_list": [8, 16]},
    "kernels": {"tau": 0.1, "n": 11},
    "lemma2": {"delta": 0.5, "c": 10.0},
    "lemma2-sweep": {"deltas": [0.1, 0.5], "cs": [5.0, 10.0], "taus": [0.0, 0.01]},
    "converge": {"c_list": [10.0, 100.0, 1000.0, 10000.0]},
    "lieb-liniger": {"gammas": [1.0, 10.0], "n_nodes": 128},
    "ll-scaling": {"lambda": 1.0, "rho1": 1.0, "rho2": 2.0, "n_nodes": 128},
}


def main():
    g = {}
    g["robin11_fd4000"] = oracles.robin_fd_energies(1, 1, 1, 5, 4000).tolist()
    g["robin11_fd_richardson"] = oracles.robin_fd_richardson(1, 1, 1, 5).tolist()
    g["beta_series_m1_c4_k1_tau01"] = [oracles.beta_series(1.0, 0.1, 1.0, 4.0).real,
                                       oracles.beta_series(1.0, 0.1, 1.0, 4.0).imag]
    g["gap_gauss_c10_hermite"] = oracles.gaussian_gap_hermite(1.0, 10.0)
    tf = TestFunction.gaussian(1.0, 3)
    g["lemma2_margin_d05_c10_tau0"] = verify_lemma2(tf, tf, 0.0, 0.5, DispersionParams(1.0, 10.0)).margin

    psi0 = bump_state(line_grid(1.0, 2 ** 20))
    g["tail_fft_2e20"] = {str(t): tail_probability(psi0, t, 2.0, strict=False)
                          for t in (1e-4, 1e-3, 1e-2, 2e-2)}
    g["tail_contour"] = {str(t): oracles.bump_tail_contour(t, 2.0, depth)
                         for t, depth in ((1e-3, 0.4), (1e-2, 0.2), (2e-2, 0.2))}

    g["weyl_residual_a05"] = {str(D): weyl_relation_residual([0.5], [0.5], D) for D in (8, 16, 32)}
    g["coherent_defect_a05_D32"] = coherent_truncation_defect(0.5, 32)
    g["coherent_defect_exact_a05_D32"] = oracles.coherent_truncation_exact(0.5, 32)
    g["ll_f_256"] = {str(gm): solve_ll(gm, 256).f_gamma for gm in (0.1, 1.0, 10.0, 100.0, 1000.0)}

    (HERE / "golden.json").write_text(json.dumps(g, indent=2, sort_keys=True) + "\n")

    out = HERE / "golden_cli"
    out.mkdir(exist_ok=True)
    with tempfile.TemporaryDirectory() as tmp:
        for cmd, cfg in CLI_CONFIGS.items():
            status = cli.run(cmd, cfg, Path(tmp))
            if status != 0:
                raise SystemExit(f"{cmd} exited with {status}")
            (out / f"{cmd}.csv").write_text((Path(tmp) / f"{cmd}.csv").read_text())
    (out / "configs.json").write_text(json.dumps(CLI_CONFIGS, indent=2, sort_keys=True) + "\n")
    print("golden files written")


if __name__ == "__main__":
    main()
