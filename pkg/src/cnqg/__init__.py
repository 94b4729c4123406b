"""Periodic pseudo-spectral solver for ``theta_t + div(theta R theta) + nu Lambda^alpha theta = 0``.

Submodules: :mod:`~cnqg.spectral` (grid, transforms, Fourier multipliers),
:mod:`~cnqg.oracle` (singular-integral quadrature cross-checks),
:mod:`~cnqg.solver` (integrating-factor time stepping, Picard iteration),
:mod:`~cnqg.diagnostics` (norms, inequality checks, virial probe, decay fits)
and :mod:`~cnqg.cli` (manifests, checkpoints, subcommands).
"""

from .errors import CNQGError
from .spectral import (
    Grid,
    PhysicalField,
    SpectralField,
    divergence,
    forward_transform,
    fractional_laplacian,
    gradient,
    inverse_transform,
    riesz_potential,
    riesz_transform,
    semigroup_apply,
)
from .solver import SolverConfig, Trajectory, mollify, picard_iterate, run, step

__all__ = [
    "CNQGError",
    "Grid",
    "PhysicalField",
    "SpectralField",
    "SolverConfig",
    "Trajectory",
    "divergence",
    "forward_transform",
    "fractional_laplacian",
    "gradient",
    "inverse_transform",
    "mollify",
    "picard_iterate",
    "riesz_potential",
    "riesz_transform",
    "run",
    "semigroup_apply",
    "step",
]
