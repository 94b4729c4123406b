"""Norms, inequality checkers, decay fits and the virial probe.

Integrals are midpoint sums with cell volume ``h^N``.  Fourier-side norms use
the Parseval factor of the mean-normalized convention (box volume ``V``).
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Any, Iterable, Sequence

import numpy as np

from .errors import (
    InsufficientData,
    InvalidExponent,
    InvalidExponents,
    MeanNotZero,
    NotLocalized,
    SignViolation,
    UnderResolved,
)
from .oracle import QuadratureSpec, riesz_constant, virial_rhs
from .solver import SolverConfig, Trajectory, TrajectoryRecord
from .spectral import (
    Grid,
    PhysicalField,
    SpectralField,
    fft,
    forward_transform,
    gradient_symbol,
    ifft,
    inverse_transform,
    power_symbol,
    riesz_potential,
    semigroup_apply,
    tail_energy_fraction,
)

# ---------------------------------------------------------------- norms


def lp_norm(f: PhysicalField, p: float) -> float:
    """``(sum |f|^p h^N)^{1/p}``; ``p = inf`` gives the grid maximum of ``|f|``."""
    if not p >= 1:
        raise InvalidExponent(f"p={p} must be >= 1")
    values = np.abs(f.values)
    if f.values.ndim == f.grid.dim + 1:
        values = np.sqrt(np.sum(values**2, axis=0))
    if math.isinf(p):
        return float(values.max())
    return float((np.sum(values**p) * f.grid.cell_volume) ** (1.0 / p))


def hs_norm(F: SpectralField, s: float) -> float:
    """Homogeneous ``||Lambda^s f||_2``; the mean mode is excluded for every ``s``."""
    grid = F.grid
    weight = power_symbol(grid, 2 * s) if s != 0 else np.ones(grid.shape)
    coeffs = F.coeffs
    if s < 0:
        scale = np.abs(coeffs).max()
        if abs(F.mean) > 1e-12 * max(scale, np.finfo(float).tiny):
            raise MeanNotZero("negative-order norm needs mean-zero input")
    energy = np.abs(coeffs) ** 2 * weight
    energy[(0,) * grid.dim] = 0.0
    return float(np.sqrt(grid.volume * energy.sum()))


def l2_from_coeffs(coeffs: np.ndarray, grid: Grid) -> float:
    return float(np.sqrt(grid.volume * np.sum(np.abs(coeffs) ** 2)))


def fluctuation(f: PhysicalField) -> PhysicalField:
    return PhysicalField(f.grid, f.values - f.values.mean())


def mass(f: PhysicalField) -> float:
    return float(f.values.sum() * f.grid.cell_volume)


# ------------------------------------------------------------- reports


@dataclass
class InequalityReport:
    """Outcome of an inequality check; ``passed`` iff ``worst_violation <= tolerance``."""

    name: str
    sampled_points: int
    worst_violation: float
    tolerance: float
    details: dict[str, Any] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return bool(self.worst_violation <= self.tolerance)

    def summary(self) -> dict[str, Any]:
        return {
            "name": self.name,
            "sampled_points": self.sampled_points,
            "worst_violation": self.worst_violation,
            "tolerance": self.tolerance,
            "pass": self.passed,
            **{k: v for k, v in self.details.items() if isinstance(v, (int, float, str, bool))},
        }


def _apply_power(values: np.ndarray, grid: Grid, s: float) -> np.ndarray:
    return ifft(power_symbol(grid, s) * fft(values, grid), grid)


def pointwise_lemma_check(f: PhysicalField, s: float, p: float, slack: float = 1e-8) -> InequalityReport:
    """``int |f|^{p-2} f Lambda^s f >= (2/p) ||Lambda^{s/2} |f|^{p/2}||^2``.

    Violation is ``rhs - lhs``; the tolerance is ``slack`` times
    ``int |f|^{p-1} |Lambda^s f|``.
    """
    if not 0 <= s <= 2:
        raise ValueError(f"s={s} outside [0, 2]")
    if p < 2:
        raise InvalidExponent(f"p={p} must be >= 2")
    grid = f.grid
    theta = f.values
    coeffs = fft(theta, grid)
    tail = tail_energy_fraction(coeffs, grid)
    if tail >= 1e-6:
        raise UnderResolved(f"top-third spectral energy fraction {tail:.2e} >= 1e-6")
    lam_theta = _apply_power(theta, grid, s)
    abs_theta = np.abs(theta)
    cell = grid.cell_volume
    lhs = float(np.sum(abs_theta ** (p - 2) * theta * lam_theta) * cell)
    g = abs_theta ** (p / 2)
    g_hat = fft(g, grid)
    rhs = float((2.0 / p) * grid.volume * np.sum(power_symbol(grid, s) * np.abs(g_hat) ** 2))
    scale = float(np.sum(abs_theta ** (p - 1) * np.abs(lam_theta)) * cell)
    return InequalityReport(
        name=f"pointwise_lemma(s={s:g},p={p:g})",
        sampled_points=1,
        worst_violation=rhs - lhs,
        tolerance=slack * scale,
        details={"lhs": lhs, "rhs": rhs, "scale": scale},
    )


def _records_with_fields(traj: Trajectory) -> list[TrajectoryRecord]:
    recs = [r for r in traj.records if r.theta is not None]
    if not recs:
        raise InsufficientData("trajectory stores no fields")
    return recs


def energy_inequality_check(traj: Trajectory, cfg: SolverConfig | None = None, rtol: float = 1e-6) -> InequalityReport:
    """Integrated and per-interval energy inequality with the solver's exact dissipation integrals.

    ``E(t) + 2 nu D(t) + 2 eps D_eps(t) <= E(0)`` where ``D`` is the time
    integral of ``||Lambda^{alpha/2} theta||^2`` accumulated by the stepper.
    """
    cfg = traj.cfg if cfg is None else cfg
    recs = _records_with_fields(traj)
    grid = traj.grid
    energies = np.array([lp_norm(r.theta, 2) ** 2 for r in recs])
    budget = energies + 2 * cfg.nu * np.array([r.dissipation for r in recs])
    budget += 2 * cfg.eps * np.array([r.eps_dissipation for r in recs])
    e0 = energies[0]
    cumulative = (budget - e0)[1:] if len(budget) > 1 else np.zeros(1)
    increments = np.diff(budget) if len(budget) > 1 else np.zeros(1)
    worst = float(max(cumulative.max(), increments.max()))
    nonneg = bool(recs[0].theta.values.min() >= -1e-12 * max(1.0, np.abs(recs[0].theta.values).max()))
    return InequalityReport(
        name="energy_inequality",
        sampled_points=len(recs),
        worst_violation=worst,
        tolerance=rtol * e0,
        details={
            "worst_cumulative": float(cumulative.max()),
            "worst_increment": float(increments.max()),
            "final_budget_gap": float(cumulative[-1]),
            "informational": not nonneg,
            "grid_points": grid.size,
        },
    )


def level_set_energy_check(
    traj: Trajectory, lambdas: Iterable[float], rtol: float = 1e-4, cfg: SolverConfig | None = None
) -> list[InequalityReport]:
    """Energy inequality for the truncations ``(theta - lambda)_+``.

    ``||theta_l(t2)||^2 + 2 nu int_{t1}^{t2} ||Lambda^{alpha/2} theta_l||^2 <= ||theta_l(t1)||^2``
    checked from the first record to every later one and between consecutive
    records, with the trapezoid rule in time.
    """
    cfg = traj.cfg if cfg is None else cfg
    recs = _records_with_fields(traj)
    grid = traj.grid
    times = np.array([r.t for r in recs])
    e0 = lp_norm(recs[0].theta, 2) ** 2
    weight = power_symbol(grid, cfg.alpha)
    reports = []
    for lam in lambdas:
        energy = np.empty(len(recs))
        dissip = np.empty(len(recs))
        for i, r in enumerate(recs):
            trunc = np.maximum(r.theta.values - lam, 0.0)
            energy[i] = np.sum(trunc**2) * grid.cell_volume
            dissip[i] = grid.volume * np.sum(weight * np.abs(fft(trunc, grid)) ** 2)
        integral = np.concatenate([[0.0], np.cumsum(0.5 * np.diff(times) * (dissip[1:] + dissip[:-1]))])
        cumulative = (energy + 2 * cfg.nu * integral - energy[0])[1:] if len(recs) > 1 else np.zeros(1)
        steps = np.diff(energy + 2 * cfg.nu * integral) if len(recs) > 1 else np.zeros(1)
        worst = float(max(cumulative.max(), steps.max()))
        reports.append(
            InequalityReport(
                name=f"level_set(lambda={lam:.6g})",
                sampled_points=len(recs),
                worst_violation=worst,
                tolerance=rtol * e0,
                details={"lambda": float(lam), "initial_energy": float(energy[0]), "final_energy": float(energy[-1])},
            )
        )
    return reports


def maximum_principle_check(traj: Trajectory, rtol: float = 1e-8, floor: float = 1e-6) -> InequalityReport:
    """Monotone ``L^2``, ``L^4``, ``L^inf`` norms and a lower bound on ``min theta``.

    Each sub-check is normalized by its own tolerance, so the report passes
    when ``worst_violation <= 1``.
    """
    recs = _records_with_fields(traj)
    norms = np.array([[lp_norm(r.theta, p) for p in (2, 4, math.inf)] for r in recs])
    if len(recs) > 1:
        growth = (norms[1:] - norms[:-1]) / np.maximum(norms[:-1], np.finfo(float).tiny)
        worst_growth = float(growth.max())
    else:
        worst_growth = 0.0
    sup0 = norms[0, 2]
    min_theta = min(float(r.theta.values.min()) for r in recs)
    negativity = -min_theta / sup0 if sup0 > 0 else 0.0
    normalized = max(worst_growth / rtol, negativity / floor)
    return InequalityReport(
        name="maximum_principle",
        sampled_points=len(recs),
        worst_violation=float(normalized),
        tolerance=1.0,
        details={"worst_relative_growth": worst_growth, "min_theta": min_theta, "relative_negativity": float(negativity)},
    )


def spectral_apriori_check(traj: Trajectory, cfg: SolverConfig | None = None, rtol: float = 1e-6) -> InequalityReport:
    """``|theta_hat(k, t)| <= ||theta0||_1 + |k| int_0^t ||theta||_2^2`` at every stored ``(k, t)``.

    ``theta_hat`` is rescaled by the box volume so it approximates the
    continuum transform ``int theta e^{-ik.x} dx``.
    """
    recs = _records_with_fields(traj)
    grid = traj.grid
    l1_0 = lp_norm(recs[0].theta, 1)
    times = np.array([r.t for r in recs])
    kmag = grid.k_magnitude
    l2sq = np.array([lp_norm(r.theta, 2) ** 2 for r in recs])
    integral = np.concatenate([[0.0], np.cumsum(0.5 * np.diff(times) * (l2sq[1:] + l2sq[:-1]))])
    worst = -math.inf
    initial = -math.inf
    for i, r in enumerate(recs):
        hat = np.abs(fft(r.theta.values, grid)) * grid.volume
        excess = float((hat - (l1_0 + kmag * integral[i])).max())
        worst = max(worst, excess)
        if i == 0:
            initial = excess
    scale = l1_0 if l1_0 > 0 else 1.0
    return InequalityReport(
        name="spectral_apriori",
        sampled_points=len(recs) * grid.size,
        worst_violation=worst / scale,
        tolerance=rtol,
        details={"initial_violation": initial / scale, "l1_initial": l1_0},
    )


# ---------------------------------------------------------------- virial


@dataclass
class VirialProbe:
    times: np.ndarray
    w: np.ndarray
    J: np.ndarray
    mass: np.ndarray
    dwdt: np.ndarray
    identity_residual: np.ndarray
    relative_residual: np.ndarray
    lower_bound: np.ndarray
    lower_bound_ok: bool
    constant: float
    outside_fraction: np.ndarray


def second_moment(theta: PhysicalField) -> float:
    grid = theta.grid
    r2 = sum((x - c) ** 2 for x, c in zip(grid.mesh(), grid.center))
    return float(np.sum(r2 * theta.values) * grid.cell_volume)


def virial_lower_bound(dim: int, total_mass: float, w: float) -> float:
    """``2^{-(N-1)/2} M^{(N+3)/2} w^{-(N-1)/2}``."""
    return 2 ** (-(dim - 1) / 2) * total_mass ** ((dim + 3) / 2) * w ** (-(dim - 1) / 2)


def virial_probe(
    traj: Trajectory,
    spec: QuadratureSpec = QuadratureSpec(),
    difference: str = "centered",
    sign_tol: float = 1e-2,
    support_tol: float = 1e-10,
) -> VirialProbe:
    """Second moment ``w`` of ``Theta = -theta``, ``J_N`` and the identity ``dw/dt = -c_N J_N``.

    Spectral runs without dissipation develop small undershoots at the edge
    of the support, so ``Theta`` may dip below zero by ``sign_tol`` times its
    maximum before :class:`SignViolation` is raised.  ``w``, ``M`` and ``J``
    use the raw field: the identity is bilinear and clipping would bias it.
    The initial support must lie within ``L/4`` of the box centre up to
    ``support_tol``; later records report the mass fraction outside it.
    """
    recs = _records_with_fields(traj)
    grid = traj.grid
    dim = grid.dim
    r2 = sum((x - c) ** 2 for x, c in zip(grid.mesh(), grid.center))
    outside = r2 >= (min(grid.lengths) / 4) ** 2
    theta0 = -recs[0].theta.values
    if np.abs(theta0[outside]).max(initial=0.0) > support_tol * np.abs(theta0).max():
        raise NotLocalized("initial Theta is not supported within L/4 of the box centre")
    times, w, J, masses, out_frac = [], [], [], [], []
    for r in recs:
        big_theta = -r.theta.values
        top = float(big_theta.max())
        if top <= 0 or big_theta.min() < -sign_tol * top:
            raise SignViolation(f"Theta = -theta has values down to {big_theta.min():.3e} at t={r.t:.6g}")
        times.append(r.t)
        w.append(float(np.sum(r2 * big_theta) * grid.cell_volume))
        J.append(virial_rhs(PhysicalField(grid, big_theta), spec, sign_tol=sign_tol))
        m = float(big_theta.sum() * grid.cell_volume)
        masses.append(m)
        out_frac.append(float(np.abs(big_theta[outside]).sum() * grid.cell_volume / m))
    times_a, w_a, J_a, m_a = map(np.array, (times, w, J, masses))
    if len(times_a) < 3:
        raise InsufficientData("virial probe needs at least 3 records")
    if difference == "centered":
        dwdt = np.gradient(w_a, times_a, edge_order=2)
    elif difference == "backward":
        dwdt = np.concatenate([[np.nan], np.diff(w_a) / np.diff(times_a)])
    else:
        raise ValueError("difference must be 'centered' or 'backward'")
    c = riesz_constant(dim)
    residual = np.abs(dwdt + c * J_a)
    with np.errstate(divide="ignore", invalid="ignore"):
        relative = residual / np.abs(dwdt)
    bound = np.array([virial_lower_bound(dim, m, wi) for m, wi in zip(m_a, w_a)])
    ok = bool(np.all(bound <= J_a * (1 + 1e-12)))
    return VirialProbe(times_a, w_a, J_a, m_a, dwdt, residual, relative, bound, ok, c, np.array(out_frac))


# ---------------------------------------------------------------- decay


def expected_l2_exponent(dim: int, alpha: float, eps: float = 0.0) -> float:
    return 0.5 * ((dim + 2 - 2 * alpha) / alpha - eps)


def expected_lp_exponent(dim: int, alpha: float, p: float) -> float:
    return dim * (p - 2) / (2 * p * alpha)


@dataclass
class DecayFit:
    quantity: str
    exponent: float
    r2: float
    expected: float
    n_samples: int
    semilog_r2: float
    exponential_like: bool
    outside_hypotheses: bool
    note: str


def _r_squared(x: np.ndarray, y: np.ndarray) -> tuple[float, float]:
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - float(np.sum(resid**2)) / ss_tot if ss_tot > 0 else 1.0
    return float(slope), r2


def decay_fit(
    series: "DiagnosticsSeries",
    window: tuple[float, float],
    quantity: str = "L2",
    p: float = 2.0,
    dim: int | None = None,
    alpha: float | None = None,
    eps: float = 0.0,
) -> DecayFit:
    """Least-squares exponent ``gamma`` in ``q ~ (1 + t)^{-gamma}`` over ``window``.

    Uses mean-removed quantities: ``L2`` -> ``l2_fluct``, ``Lp`` ->
    ``l<p>_fluct``, ``gradL2`` -> ``grad_l2``.  The expected exponent comes from
    the algebraic decay formulas; nothing is asserted.
    """
    dim = series.meta.get("dim") if dim is None else dim
    alpha = series.meta.get("alpha") if alpha is None else alpha
    column = {"L2": "l2_fluct", "Lp": f"l{p:g}_fluct", "gradL2": "grad_l2"}.get(quantity)
    if column is None:
        raise ValueError("quantity must be L2, Lp or gradL2")
    if column not in series.columns:
        raise KeyError(f"series has no column {column!r}")
    t = series.times
    q = series.column(column)
    sel = (t >= window[0]) & (t <= window[1]) & (q > 0)
    n = int(sel.sum())
    if n < 20:
        raise InsufficientData(f"{n} samples in window {window}; need >= 20")
    x = np.log1p(t[sel])
    y = np.log(q[sel])
    slope, r2 = _r_squared(x, y)
    _, r2_semi = _r_squared(t[sel], y)
    if quantity == "Lp":
        expected = expected_lp_exponent(dim, alpha, p)
    else:
        expected = expected_l2_exponent(dim, alpha, eps)
    outside = not (dim > 2 and 1 < alpha <= 2)
    exponential_like = bool(r2_semi > r2)
    notes = ["mean mode removed: on a periodic box the conserved mean never decays"]
    if outside:
        notes.append("parameters outside the proven algebraic-decay range (needs N > 2, 1 < alpha <= 2)")
    if exponential_like:
        notes.append("log-linear fit beats log-log fit: decay looks exponential, not algebraic")
    return DecayFit(quantity, -slope, r2, expected, n, r2_semi, exponential_like, outside, "; ".join(notes))


# ---------------------------------------------------------- uniqueness class


def uniqueness_time_exponent(q: float, alpha: float, dim: int) -> float:
    """Time exponent ``p`` solving ``1/p + N/(q alpha) = 1 - 1/alpha``."""
    inv = 1 - 1 / alpha - dim / (q * alpha)
    if inv <= 0:
        raise InvalidExponents(f"no admissible p for q={q}, alpha={alpha}, N={dim}")
    return 1 / inv


@dataclass
class UniquenessMonitor:
    times: np.ndarray
    lq_norms: np.ndarray
    running_integral: np.ndarray


def uniqueness_class_monitor(traj: Trajectory, p: float, q: float, alpha: float) -> UniquenessMonitor:
    """``||theta(t)||_q`` and ``(int_0^t ||theta||_q^p)^{1/p}`` for an admissible ``(p, q)``."""
    dim = traj.grid.dim
    if not alpha > 1:
        raise InvalidExponents("uniqueness class needs alpha > 1")
    if not q > dim / (alpha - 1):
        raise InvalidExponents(f"q={q} must exceed N/(alpha-1)={dim / (alpha - 1):g}")
    if abs(1 / p + dim / (q * alpha) - (1 - 1 / alpha)) > 1e-12:
        raise InvalidExponents(f"1/p + N/(q alpha) != 1 - 1/alpha for p={p}, q={q}, alpha={alpha}")
    recs = _records_with_fields(traj)
    times = np.array([r.t for r in recs])
    norms = np.array([lp_norm(r.theta, q) for r in recs])
    vals = norms**p
    integral = np.concatenate([[0.0], np.cumsum(0.5 * np.diff(times) * (vals[1:] + vals[:-1]))])
    return UniquenessMonitor(times, norms, integral ** (1 / p))


# ----------------------------------------------------------- empirical surveys


def riesz_potential_ratio(f: PhysicalField, delta: float, p: float) -> float:
    """``||Lambda^{-delta} f||_p / ||f||_q`` with ``1/q = 1/p + delta/N``."""
    dim = f.grid.dim
    q = 1 / (1 / p + delta / dim)
    F = forward_transform(fluctuation(f))
    g = inverse_transform(riesz_potential(F, delta), hermitian="symmetrize")
    return lp_norm(g, p) / lp_norm(fluctuation(f), q)


def semigroup_decay_exponent(grid: Grid, alpha: float, p: float, q: float, times: Sequence[float], width: float) -> float:
    """Fitted ``beta`` in ``||G(t) f||_q / ||f||_p ~ t^{-beta}`` for a narrow Gaussian ``f``.

    Compare with ``(N/alpha)(1/p - 1/q)``; times should satisfy
    ``width^alpha << t << (L/2)^alpha``.
    """
    r2 = sum((x - c) ** 2 for x, c in zip(grid.mesh(), grid.center))
    f = PhysicalField(grid, np.exp(-r2 / (2 * width**2)))
    F = forward_transform(f)
    ratios = []
    for t in times:
        g = ifft(semigroup_apply(F, t, alpha, 1.0).coeffs, grid)
        ratios.append(lp_norm(PhysicalField(grid, g), q) / lp_norm(f, p))
    slope, _ = np.polyfit(np.log(times), np.log(ratios), 1)
    return float(-slope)


def commutator_ratio(f: PhysicalField, g: PhysicalField, s: float) -> float:
    """``||Lambda^s(fg) - f Lambda^s g||_2`` over ``||grad f||_inf ||Lambda^{s-1} g||_2 + ||g||_inf ||Lambda^s f||_2``."""
    if s < 1:
        raise ValueError("commutator estimate needs s >= 1")
    grid = f.grid
    fv, gv = f.values, g.values
    lhs = _apply_power(fv * gv, grid, s) - fv * _apply_power(gv, grid, s)
    grad = ifft(gradient_symbol(grid) * fft(fv, grid), grid)
    grad_inf = float(np.sqrt(np.max(np.sum(grad * grad, axis=0))))
    rhs = grad_inf * hs_norm(forward_transform(g), s - 1)
    rhs += float(np.abs(gv).max()) * hs_norm(forward_transform(f), s)
    return lp_norm(PhysicalField(grid, lhs), 2) / rhs if rhs > 0 else 0.0


# ---------------------------------------------------------------- series


BASE_COLUMNS = ("t", "l2", "l4", "linf", "mass", "grad_linf")
TAIL_COLUMNS = (
    "energy_residual",
    "l1",
    "min",
    "mean",
    "grad_l2",
    "l2_fluct",
    "l4_fluct",
    "linf_fluct",
    "dissipation",
    "tail_fraction",
)


def hs_column(s: float) -> str:
    return f"hs_{s:g}"


@dataclass
class DiagnosticsSeries:
    """Column store of per-record diagnostics plus radial spectra.

    Column order is ``t, l2, l4, linf, mass, grad_linf, hs_<s>..., energy_residual``
    followed by ``l1, min, mean, grad_l2, l2_fluct, l4_fluct, linf_fluct,
    dissipation, tail_fraction`` and any extra ``l<p>`` / ``l<p>_fluct`` columns.
    """

    names: list[str]
    rows: list[list[float]] = field(default_factory=list)
    spectra: list[np.ndarray] = field(default_factory=list)
    meta: dict[str, Any] = field(default_factory=dict)

    @property
    def columns(self) -> list[str]:
        return self.names

    def append(self, row: dict[str, float]) -> None:
        self.rows.append([float(row[n]) for n in self.names])

    def column(self, name: str) -> np.ndarray:
        i = self.names.index(name)
        return np.array([r[i] for r in self.rows])

    @property
    def times(self) -> np.ndarray:
        return self.column("t")

    def __len__(self) -> int:
        return len(self.rows)

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(self.names)
            for row in self.rows:
                writer.writerow([format(v, ".17g") for v in row])

    @classmethod
    def from_csv(cls, path, meta: dict[str, Any] | None = None) -> "DiagnosticsSeries":
        with open(path, newline="") as fh:
            reader = csv.reader(fh)
            names = next(reader)
            rows = [[float(v) for v in row] for row in reader if row]
        if not names or names[0] != "t":
            raise ValueError("series CSV must start with a 't' column")
        return cls(names, rows, [], dict(meta or {}))


def radial_spectrum(coeffs: np.ndarray, grid: Grid) -> np.ndarray:
    """``|theta_hat|`` energy summed over integer shells of the mode-number radius."""
    shell = np.zeros(grid.shape)
    for m in grid.mode_numbers:
        shell = shell + m.astype(float) ** 2
    index = np.rint(np.sqrt(shell)).astype(int).ravel()
    return np.bincount(index, weights=(grid.volume * np.abs(coeffs) ** 2).ravel())


class SeriesRecorder:
    """Solver hook that appends one diagnostics row per record."""

    name = "diagnostics"

    def __init__(
        self,
        grid: Grid,
        cfg: SolverConfig,
        hs_orders: Sequence[float] = (0.5, 1.0),
        lp_extra: Sequence[float] = (),
        spectra: bool = True,
    ):
        self.grid = grid
        self.cfg = cfg
        self.hs_orders = tuple(hs_orders)
        self.lp_extra = tuple(p for p in lp_extra if p not in (1, 2, 4, math.inf))
        self.keep_spectra = spectra
        names = list(BASE_COLUMNS) + [hs_column(s) for s in self.hs_orders] + list(TAIL_COLUMNS)
        for p in self.lp_extra:
            names += [f"l{p:g}", f"l{p:g}_fluct"]
        self.series = DiagnosticsSeries(
            names, meta={"dim": grid.dim, "alpha": cfg.alpha, "nu": cfg.nu, "eps": cfg.eps}
        )
        self._e0: float | None = None
        self._weights = {s: power_symbol(grid, 2 * s) for s in self.hs_orders}
        self._k2 = grid.k_squared

    def __call__(self, rec: TrajectoryRecord) -> dict[str, float]:
        grid = self.grid
        values = rec.theta.values
        cell = grid.cell_volume
        coeffs = fft(values, grid)
        power = grid.volume * np.abs(coeffs) ** 2
        fluct = values - values.mean()
        absv = np.abs(values)
        absf = np.abs(fluct)
        l2sq = float(np.sum(values * values) * cell)
        if self._e0 is None:
            self._e0 = l2sq
        fluct_power = power.copy()
        fluct_power[(0,) * grid.dim] = 0.0
        row = {
            "t": rec.t,
            "l1": float(absv.sum() * cell),
            "l2": math.sqrt(l2sq),
            "l4": float((np.sum(absv**4) * cell) ** 0.25),
            "linf": float(absv.max()),
            "mass": float(values.sum() * cell),
            "grad_linf": rec.grad_inf,
            "energy_residual": l2sq + 2 * self.cfg.nu * rec.dissipation + 2 * self.cfg.eps * rec.eps_dissipation - self._e0,
            "min": float(values.min()),
            "mean": float(values.mean()),
            "grad_l2": float(np.sqrt(np.sum(self._k2 * fluct_power))),
            "l2_fluct": float(np.sqrt(np.sum(fluct * fluct) * cell)),
            "l4_fluct": float((np.sum(absf**4) * cell) ** 0.25),
            "linf_fluct": float(absf.max()),
            "dissipation": rec.dissipation,
            "tail_fraction": rec.tail_fraction,
        }
        for s, weight in self._weights.items():
            row[hs_column(s)] = float(np.sqrt(np.sum(weight * fluct_power)))
        for p in self.lp_extra:
            row[f"l{p:g}"] = float((np.sum(absv**p) * cell) ** (1 / p))
            row[f"l{p:g}_fluct"] = float((np.sum(absf**p) * cell) ** (1 / p))
        self.series.append(row)
        if self.keep_spectra:
            self.series.spectra.append(radial_spectrum(coeffs, grid))
        return row
