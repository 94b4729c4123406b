"""Interior error of the quadrature oracle against the spectral operators as the grid is refined."""

from __future__ import annotations

import numpy as np

from cnqg.initial import gaussian_bump
from cnqg.oracle import QuadratureSpec, interior_relative_error, lambda_alpha_quadrature, riesz_quadrature
from cnqg.spectral import Grid, forward_transform, fractional_laplacian, inverse_transform, riesz_transform


def main() -> None:
    alphas = (0.25, 0.5, 1.0, 1.5, 1.9)
    for exclusion in ("skip-diagonal", "zeta-corrected"):
        spec = QuadratureSpec(exclusion=exclusion)
        print(f"exclusion = {exclusion}")
        print(f"{'M':>5} " + " ".join(f"{'a=' + format(a, 'g'):>9}" for a in alphas) + f" {'riesz':>9}")
        for points in (64, 128, 256, 512):
            grid = Grid((points,), (40.0,))
            f = gaussian_bump(grid, 1.0, 1.5)
            F = forward_transform(f)
            errs = []
            for alpha in alphas:
                ref = inverse_transform(fractional_laplacian(F, alpha)).values
                errs.append(interior_relative_error(ref, lambda_alpha_quadrature(f, alpha, spec).values, grid, 0.25))
            ref = inverse_transform(riesz_transform(F)).values
            errs.append(interior_relative_error(ref, riesz_quadrature(f, spec).values, grid, 0.25))
            print(f"{points:>5} " + " ".join(f"{e:>9.2e}" for e in errs))


if __name__ == "__main__":
    np.set_printoptions(precision=3)
    main()
