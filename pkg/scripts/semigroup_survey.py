"""Empirical L^p -> L^q decay exponent of the fractional heat semigroup, and Riesz-potential ratios.

The fitted exponent is compared with the scaling value (N/alpha)(1/p - 1/q);
nothing is asserted.
"""

from __future__ import annotations

import numpy as np

from cnqg.diagnostics import riesz_potential_ratio, semigroup_decay_exponent
from cnqg.initial import random_smooth_field
from cnqg.spectral import Grid


def main() -> None:
    print(f"{'N':>2} {'alpha':>5} {'p':>3} {'q':>4} {'fitted':>8} {'(N/a)(1/p-1/q)':>15}")
    for dim, points, length in ((1, 4096, 200.0), (2, 256, 60.0)):
        grid = Grid.cube(dim, points, length)
        for alpha in (0.5, 1.0, 1.5, 2.0):
            for p, q in ((1.0, 2.0), (1.0, np.inf), (2.0, 4.0)):
                times = np.geomspace(0.5, 4.0, 6)
                beta = semigroup_decay_exponent(grid, alpha, p, q, times, 0.2)
                scaling = dim / alpha * (1 / p - 1 / q)
                print(f"{dim:>2} {alpha:>5g} {p:>3g} {q:>4g} {beta:>8.4f} {scaling:>15.4f}")
    print("\nRiesz potential ratio ||Lambda^-d f||_p / ||f||_q, 1/q = 1/p + d/N, 20 random fields per grid")
    rng = np.random.default_rng(0)
    for points in (32, 64, 128):
        grid = Grid.cube(2, points, 2 * np.pi)
        ratios = [riesz_potential_ratio(random_smooth_field(grid, rng), 0.5, 4.0) for _ in range(20)]
        print(f"  M={points:>4}: max ratio {max(ratios):.4f}")


if __name__ == "__main__":
    main()
