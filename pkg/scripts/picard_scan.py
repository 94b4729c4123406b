"""Contraction of the Duhamel iteration against amplitude and horizon."""

from __future__ import annotations

import numpy as np

from cnqg.initial import gaussian_bump
from cnqg.solver import SolverConfig, existence_time_scan
from cnqg.spectral import Grid


def main() -> None:
    grid = Grid.cube(2, 32, 2 * np.pi)
    cfg = SolverConfig(alpha=1.5, nu=0.5, t_end=1.0)
    points = existence_time_scan(
        gaussian_bump(grid, 1.0, 0.8), [0.25, 0.5, 1, 2, 4, 8, 16], [0.0625, 0.125, 0.25, 0.5, 1, 2], cfg
    )
    print(f"{'amplitude':>9} {'largest contracting horizon':>28} {'early ratio':>12}")
    for p in points:
        print(f"{p.amplitude:>9g} {p.horizon:>28g} {p.first_ratio:>12.4f}")


if __name__ == "__main__":
    main()
