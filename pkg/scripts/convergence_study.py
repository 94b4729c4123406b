"""Temporal order of both schemes by step halving on a smooth 2-D run."""

from __future__ import annotations

import argparse
import math

import numpy as np

from cnqg.initial import random_smooth_field
from cnqg.solver import SolverConfig, run
from cnqg.spectral import Grid


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--points", type=int, default=64)
    parser.add_argument("--t-end", type=float, default=0.5)
    parser.add_argument("--levels", type=int, default=5)
    args = parser.parse_args()

    grid = Grid.cube(2, args.points, 2 * np.pi)
    theta0 = random_smooth_field(grid, np.random.default_rng(3), nonnegative=True, max_mode_fraction=0.06)
    steps = [0.04 / 2**i for i in range(args.levels)]
    print(f"{'scheme':<9} {'dt':>10} {'diff to dt/2':>14} {'order':>7}")
    for scheme in ("IF-Euler", "ETDRK2"):
        finals = []
        for dt in steps:
            cfg = SolverConfig(alpha=1.5, nu=0.1, t_end=args.t_end, dt_max=dt, scheme=scheme,
                               record_every=10**9, store_fields=False)
            finals.append(run(theta0, cfg, dt=dt).final.theta.values)
        diffs = [float(np.sqrt(np.mean((a - b) ** 2))) for a, b in zip(finals, finals[1:])]
        for i, d in enumerate(diffs):
            order = math.log2(diffs[i - 1] / d) if i else float("nan")
            print(f"{scheme:<9} {steps[i]:>10.5f} {d:>14.4e} {order:>7.3f}")


if __name__ == "__main__":
    main()
