"""Wall time of 1000 IF-Euler steps at 256^2 with full diagnostics every 10 steps."""

from __future__ import annotations

import argparse
import time

from cnqg.diagnostics import SeriesRecorder
from cnqg.initial import gaussian_bump
from cnqg.solver import SolverConfig, run
from cnqg.spectral import Grid, fft_workers


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--points", type=int, default=256)
    parser.add_argument("--steps", type=int, default=1000)
    args = parser.parse_args()

    grid = Grid.cube(2, args.points, 25.6)
    dt = 1e-3
    cfg = SolverConfig(alpha=1.5, nu=0.05, t_end=args.steps * dt, dt_max=dt, record_every=10, store_fields=False)
    recorder = SeriesRecorder(grid, cfg)
    start = time.perf_counter()
    traj = run(gaussian_bump(grid, 1.0, 2.0), cfg, hooks=[recorder])
    elapsed = time.perf_counter() - start
    print(f"{traj.steps} steps, {len(recorder.series)} diagnostic rows, {elapsed:.2f}s "
          f"({1e3 * elapsed / traj.steps:.2f} ms/step, {fft_workers()} FFT worker(s))")


if __name__ == "__main__":
    main()
