"""Sub-critical decay runs: fitted exponents of mean-removed norms next to the closed-form rates.

The fits are reported, never asserted: on a torus the mean is conserved and
the lowest nonzero wavenumber eventually dominates, so late-time decay turns
exponential rather than algebraic.
"""

from __future__ import annotations

import argparse

import numpy as np

from cnqg.diagnostics import SeriesRecorder, decay_fit
from cnqg.initial import gaussian_bump
from cnqg.solver import SolverConfig, run
from cnqg.spectral import Grid


# name -> (N, points per axis, box length, alpha, bump width)
CASES = {
    "2d-alpha1.5": (2, 128, 51.2, 1.5, 3.2),
    "3d-alpha2": (3, 32, 25.6, 2.0, 3.2),
}


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--t-end", type=float, default=20.0)
    parser.add_argument("--nu", type=float, default=0.05)
    args = parser.parse_args()

    for name, (dim, points, length, alpha, width) in CASES.items():
        grid = Grid.cube(dim, points, length)
        cfg = SolverConfig(alpha=alpha, nu=args.nu, t_end=args.t_end, dt_max=0.01, record_every=10, store_fields=False)
        recorder = SeriesRecorder(grid, cfg, spectra=False)
        traj = run(gaussian_bump(grid, 1.0, width), cfg, hooks=[recorder])
        print(f"{name}: {traj.status}, {traj.steps} steps")
        if traj.status != "completed":
            continue
        window = (0.1 * args.t_end, args.t_end)
        for quantity, p in (("L2", 2.0), ("Lp", 4.0), ("gradL2", 2.0)):
            fit = decay_fit(recorder.series, window, quantity, p=p)
            print(f"  {quantity:<7} fitted {fit.exponent:7.4f} expected {fit.expected:7.4f} "
                  f"r2 {fit.r2:.4f} exp-like {fit.exponential_like} outside {fit.outside_hypotheses}")


if __name__ == "__main__":
    main()
