"""Integrating-factor time stepping, mollification and the Picard (mild-solution) iterator.

The linear part ``nu Lambda^alpha + eps |k|^2`` is always integrated exactly
per Fourier mode; only the transport term ``div(u theta)`` with ``u = R theta``
is treated explicitly.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Callable, Sequence

import numpy as np

from .errors import (
    ArityError,
    ConfigError,
    NoContraction,
    NumericalBlowup,
    StepTooLarge,
    UnderResolvedMollifier,
)
from .spectral import (
    Grid,
    PhysicalField,
    SpectralField,
    dealias_mask,
    fft,
    forward_transform,
    gradient_symbol,
    ifft,
    inverse_transform,
    linear_rate,
    power_symbol,
    riesz_symbol,
    tail_energy_fraction,
)

SCHEMES = ("IF-Euler", "ETDRK2")
TINY = 1e-300


@dataclass(frozen=True)
class SolverConfig:
    """Physical and numerical parameters of a run.

    ``nonlinear=False`` drops the transport term (pure linear decay).
    ``clip_negative`` zeroes values of the wrong sign after every step, taking
    the sign of the initial data as reference.
    Blow-up detection trips when ``max |grad theta|`` exceeds
    ``grad_growth_limit`` times its initial value, or when the share of
    fluctuation energy in the top third of the retained spectrum exceeds
    ``tail_limit``.
    """

    alpha: float
    nu: float
    t_end: float
    dt_max: float = 1e-2
    eps: float = 0.0
    scheme: str = "IF-Euler"
    dealias_fraction: float = 2.0 / 3.0
    cfl: float = 0.5
    record_every: int = 1
    nonlinear: bool = True
    clip_negative: bool = False
    grad_growth_limit: float = 1e4
    tail_limit: float = 1e-3
    store_fields: bool = True

    def __post_init__(self) -> None:
        checks = [
            ("alpha", 0.0 <= self.alpha <= 2.0, "must lie in [0, 2]"),
            ("nu", self.nu >= 0.0, "must be >= 0"),
            ("eps", self.eps >= 0.0, "must be >= 0"),
            ("t_end", self.t_end > 0.0, "must be > 0"),
            ("dt_max", self.dt_max > 0.0, "must be > 0"),
            ("scheme", self.scheme in SCHEMES, f"must be one of {SCHEMES}"),
            ("dealias_fraction", 0.5 < self.dealias_fraction <= 1.0, "must lie in (0.5, 1]"),
            ("cfl", self.cfl > 0.0, "must be > 0"),
            ("record_every", int(self.record_every) == self.record_every and self.record_every >= 1, "must be an integer >= 1"),
            ("grad_growth_limit", self.grad_growth_limit > 1.0, "must be > 1"),
            ("tail_limit", 0.0 < self.tail_limit <= 1.0, "must lie in (0, 1]"),
        ]
        for key, ok, message in checks:
            if not ok:
                raise ConfigError(key, f"{message} (got {getattr(self, key)!r})")


class Operators:
    """Symbols and masks for one (grid, config) pair, built once and reused."""

    def __init__(self, grid: Grid, cfg: SolverConfig):
        self.grid = grid
        self.cfg = cfg
        self.mask = dealias_mask(grid, cfg.dealias_fraction)
        self.riesz = riesz_symbol(grid) * self.mask
        self.grad = gradient_symbol(grid)
        self.rate = linear_rate(grid, cfg.alpha, cfg.nu, cfg.eps)
        self.power_alpha = power_symbol(grid, cfg.alpha)
        self.k2 = grid.k_squared
        self.min_spacing = min(grid.spacing)
        self._dt = None
        self._factors: dict[str, np.ndarray] = {}

    def factors(self, dt: float) -> dict[str, np.ndarray]:
        if dt != self._dt:
            z = -self.rate * dt
            small = np.abs(z) < 1e-2
            zs = np.where(small, 1.0, z)
            phi1 = np.where(small, 1 + z / 2 + z**2 / 6 + z**3 / 24, np.expm1(zs) / zs)
            phi2 = np.where(small, 0.5 + z / 6 + z**2 / 24 + z**3 / 120, (np.expm1(zs) - zs) / zs**2)
            # Integral of exp(-2 c s) over [0, dt].
            x = 2 * self.rate * dt
            xs = np.where(x < 1e-8, 1.0, x)
            decay_integral = dt * np.where(x < 1e-8, 1 - x / 2, -np.expm1(-xs) / xs)
            self._factors = {"E": np.exp(z), "phi1": phi1, "phi2": phi2, "decay_integral": decay_integral}
            self._dt = dt
        return self._factors

    def nonlinear(self, coeffs: np.ndarray) -> tuple[np.ndarray, float]:
        """Dealiased ``div(u theta)`` and ``max |u|``."""
        grid = self.grid
        truncated = coeffs * self.mask
        theta = ifft(truncated, grid)
        u = ifft(self.riesz * truncated, grid)
        umax = float(np.sqrt(np.max(np.sum(u * u, axis=0))))
        if not self.cfg.nonlinear:
            return np.zeros_like(coeffs), umax
        flux = fft(u * theta, grid)
        return self.mask * np.sum(self.grad * flux, axis=0), umax

    def cfl_limit(self, umax: float) -> float:
        return self.cfg.cfl * self.min_spacing / max(umax, TINY)

    def dissipation_weights(self) -> tuple[np.ndarray, np.ndarray]:
        """Per-mode ``V |k|^alpha`` and ``V |k|^2`` factors of the dissipation rates."""
        volume = self.grid.volume
        return volume * self.power_alpha, volume * self.k2


_OPERATOR_CACHE: dict[tuple[Grid, SolverConfig], Operators] = {}


def operators_for(grid: Grid, cfg: SolverConfig) -> Operators:
    key = (grid, cfg)
    ops = _OPERATOR_CACHE.get(key)
    if ops is None:
        if len(_OPERATOR_CACHE) > 8:
            _OPERATOR_CACHE.clear()
        ops = _OPERATOR_CACHE[key] = Operators(grid, cfg)
    return ops


def _scalar(theta: SpectralField) -> None:
    if not theta.is_scalar:
        raise ArityError("solver works on scalar fields")


def nonlinear_term(theta: SpectralField, cfg: SolverConfig) -> SpectralField:
    """Coefficients of ``div(u theta)``, ``u = R theta``, with 2/3-style truncation."""
    _scalar(theta)
    out, _ = operators_for(theta.grid, cfg).nonlinear(theta.coeffs)
    return SpectralField(theta.grid, out)


def advective_term(theta: SpectralField, cfg: SolverConfig) -> SpectralField:
    """``u . grad theta + theta Lambda theta``: same quantity in non-conservative form."""
    _scalar(theta)
    ops = operators_for(theta.grid, cfg)
    grid = theta.grid
    truncated = theta.coeffs * ops.mask
    th = ifft(truncated, grid)
    u = ifft(ops.riesz * truncated, grid)
    grad = ifft(ops.grad * truncated, grid)
    lam = ifft(power_symbol(grid, 1.0) * truncated, grid)
    physical = np.sum(u * grad, axis=0) + th * lam
    return SpectralField(grid, ops.mask * fft(physical, grid))


@dataclass
class _StepResult:
    coeffs: np.ndarray
    umax: float
    dissipation: float
    eps_dissipation: float


def _advance(ops: Operators, coeffs: np.ndarray, dt: float, nl: np.ndarray | None = None, umax: float | None = None) -> _StepResult:
    cfg = ops.cfg
    if nl is None:
        nl, umax = ops.nonlinear(coeffs)
    f = ops.factors(dt)
    w_alpha, w_2 = ops.dissipation_weights()
    if cfg.scheme == "IF-Euler":
        pre = coeffs - dt * nl
        new = f["E"] * pre
        energy = np.abs(pre) ** 2 * f["decay_integral"]
        return _StepResult(new, umax, float(np.sum(w_alpha * energy)), float(np.sum(w_2 * energy)))
    # Two-stage exponential Runge-Kutta (Cox-Matthews) with forcing -nl.
    stage = f["E"] * coeffs - dt * f["phi1"] * nl
    nl_stage, _ = ops.nonlinear(stage)
    new = stage - dt * f["phi2"] * (nl_stage - nl)
    density = _log_mean(np.abs(coeffs) ** 2, np.abs(new) ** 2) * dt
    return _StepResult(new, umax, float(np.sum(w_alpha * density)), float(np.sum(w_2 * density)))


def _log_mean(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Elementwise logarithmic mean; exact time average of an exponential decay."""
    out = np.zeros_like(a)
    pos = (a > 0) & (b > 0)
    ratio = np.ones_like(a)
    ratio[pos] = b[pos] / a[pos]
    near = pos & (np.abs(ratio - 1) < 1e-6)
    far = pos & ~near
    out[near] = a[near] * (1 + (ratio[near] - 1) / 2)
    out[far] = a[far] * (ratio[far] - 1) / np.log(ratio[far])
    return out


def step(theta: SpectralField, dt: float, cfg: SolverConfig) -> SpectralField:
    """One step of the configured scheme; raises :class:`StepTooLarge` on CFL or ``dt_max`` violation."""
    _scalar(theta)
    ops = operators_for(theta.grid, cfg)
    nl, umax = ops.nonlinear(theta.coeffs)
    limit = min(cfg.dt_max, ops.cfl_limit(umax))
    if dt > limit * (1 + 1e-12):
        raise StepTooLarge(f"dt={dt:.3e} exceeds the allowed {limit:.3e}", limit)
    return SpectralField(theta.grid, _advance(ops, theta.coeffs, dt, nl, umax).coeffs)


@dataclass
class TrajectoryRecord:
    t: float
    step: int
    theta: PhysicalField | None
    dissipation: float
    eps_dissipation: float
    dt: float = 0.0
    umax: float = 0.0
    grad_inf: float = 0.0
    tail_fraction: float = 0.0
    outputs: dict[str, Any] = field(default_factory=dict)


@dataclass
class Trajectory:
    """Records of a run plus its termination status (``completed`` or ``blowup_suspected``)."""

    grid: Grid
    cfg: SolverConfig
    records: list[TrajectoryRecord] = field(default_factory=list)
    status: str = "completed"
    reason: str = ""
    steps: int = 0

    def __len__(self) -> int:
        return len(self.records)

    def __iter__(self):
        return iter(self.records)

    def __getitem__(self, i):
        return self.records[i]

    @property
    def times(self) -> np.ndarray:
        return np.array([r.t for r in self.records])

    @property
    def initial(self) -> PhysicalField:
        return self.records[0].theta

    @property
    def final(self) -> TrajectoryRecord:
        return self.records[-1]


Hook = Callable[[TrajectoryRecord], Any]


def _grad_inf(ops: Operators, coeffs: np.ndarray) -> float:
    g = ifft(ops.grad * coeffs, ops.grid)
    return float(np.sqrt(np.max(np.sum(g * g, axis=0))))


def run(
    theta0: PhysicalField,
    cfg: SolverConfig,
    hooks: Sequence[Hook] = (),
    dt: float | None = None,
) -> Trajectory:
    """Integrate from ``theta0`` to ``cfg.t_end``.

    The step is ``min(dt_max, CFL limit, remaining time)`` unless a fixed
    ``dt`` is given (which must respect the same bounds).  Hooks are called
    on each record; their return values are kept in ``record.outputs``.
    """
    if not theta0.is_scalar:
        raise ArityError("initial data must be scalar")
    grid = theta0.grid
    ops = operators_for(grid, cfg)
    coeffs = forward_transform(theta0).coeffs
    sign = -1.0 if theta0.values.max() <= 0 and theta0.values.min() < 0 else 1.0
    traj = Trajectory(grid, cfg)
    t, n = 0.0, 0
    dissipation = eps_dissipation = 0.0
    grad0 = _grad_inf(ops, coeffs)

    def record(coeffs: np.ndarray, dt_used: float, umax: float) -> TrajectoryRecord:
        # Without store_fields only the first and the latest record keep their field.
        if not cfg.store_fields and len(traj.records) > 1:
            traj.records[-1].theta = None
        theta = PhysicalField(grid, ifft(coeffs, grid))
        rec = TrajectoryRecord(
            t=t,
            step=n,
            theta=theta,
            dissipation=dissipation,
            eps_dissipation=eps_dissipation,
            dt=dt_used,
            umax=umax,
            grad_inf=_grad_inf(ops, coeffs),
            tail_fraction=tail_energy_fraction(coeffs, grid, cfg.dealias_fraction),
        )
        for i, hook in enumerate(hooks):
            rec.outputs[getattr(hook, "name", f"hook{i}")] = hook(rec)
        traj.records.append(rec)
        return rec

    nl, umax = ops.nonlinear(coeffs)
    record(coeffs, 0.0, umax)
    while t < cfg.t_end * (1 - 1e-14):
        limit = min(cfg.dt_max, ops.cfl_limit(umax))
        remaining = cfg.t_end - t
        if dt is not None:
            if dt > limit * (1 + 1e-12):
                raise StepTooLarge(f"dt={dt:.3e} exceeds the allowed {limit:.3e} at t={t:.6g}", limit)
            h = min(dt, remaining)
        else:
            h = min(limit, remaining)
            # Avoid a sliver of a final step.
            if remaining - h < 1e-3 * h:
                h = remaining
        result = _advance(ops, coeffs, h, nl, umax)
        new = result.coeffs
        if not np.all(np.isfinite(new)):
            raise NumericalBlowup(f"non-finite coefficients at t={t + h:.6g}", traj.records[-1], traj)
        if cfg.clip_negative:
            values = ifft(new, grid)
            new = fft(np.maximum(sign * values, 0.0) * sign, grid)
        coeffs = new
        t = cfg.t_end if h == remaining else t + h
        n += 1
        dissipation += result.dissipation
        eps_dissipation += result.eps_dissipation
        nl, umax = ops.nonlinear(coeffs)
        if not np.isfinite(umax):
            raise NumericalBlowup(f"non-finite velocity at t={t:.6g}", traj.records[-1], traj)
        done = t >= cfg.t_end * (1 - 1e-14)
        if n % cfg.record_every == 0 or done:
            rec = record(coeffs, h, umax)
            if grad0 > 0 and rec.grad_inf > cfg.grad_growth_limit * grad0:
                traj.status, traj.reason = "blowup_suspected", f"gradient grew by {rec.grad_inf / grad0:.3g}"
                break
            if rec.tail_fraction > cfg.tail_limit:
                traj.status, traj.reason = "blowup_suspected", f"spectral tail fraction {rec.tail_fraction:.3g}"
                break
    traj.steps = n
    return traj


# --------------------------------------------------------------- mollifier


def mollify(theta0: PhysicalField, eps_mollify: float) -> PhysicalField:
    """Convolve with a smooth, nonnegative, unit-mass bump of radius ``eps_mollify``."""
    if not theta0.is_scalar:
        raise ArityError("mollify expects a scalar field")
    grid = theta0.grid
    h = max(grid.spacing)
    if eps_mollify < 2 * h:
        raise UnderResolvedMollifier(f"radius {eps_mollify} below two grid cells ({2 * h})")
    r2 = np.zeros(grid.shape)
    for x, length in zip(grid.mesh(), grid.lengths):
        d = (x + length / 2) % length - length / 2
        r2 = r2 + d * d
    r2 /= eps_mollify**2
    psi = np.zeros(grid.shape)
    inside = r2 < 1
    psi[inside] = np.exp(-1.0 / (1.0 - r2[inside]))
    psi /= psi.sum() * grid.cell_volume
    kernel = fft(psi, grid) * grid.volume
    kernel[(0,) * grid.dim] = 1.0
    out = inverse_transform(SpectralField(grid, kernel * forward_transform(theta0).coeffs), hermitian="symmetrize")
    return out


# ------------------------------------------------------------ Picard iteration


@dataclass
class PicardResult:
    times: np.ndarray
    fixed_point: np.ndarray
    iterates: list[float]
    contraction_ratios: list[float]
    converged: bool
    grid: Grid

    def state_at(self, index: int) -> PhysicalField:
        return PhysicalField(self.grid, ifft(self.fixed_point[index], self.grid))


def _l2_coeffs(c: np.ndarray, grid: Grid) -> np.ndarray:
    axes = tuple(range(-grid.dim, 0))
    return np.sqrt(grid.volume * np.sum(np.abs(c) ** 2, axis=axes))


def picard_iterate(
    theta0: PhysicalField,
    T: float,
    n_steps: int,
    max_iters: int,
    cfg: SolverConfig,
    tol: float = 1e-10,
) -> PicardResult:
    """Fixed-point iteration of the Duhamel map on ``n_steps`` uniform intervals of ``[0, T]``.

    Starts from the free evolution ``G(t) theta0``.  The time integral uses the
    trapezoid rule with exact semigroup weights.  Stops once the successive
    difference falls below ``tol`` relative to the iterate, or after
    ``max_iters``; three consecutive ratios above 1 raise :class:`NoContraction`.
    """
    if not theta0.is_scalar:
        raise ArityError("initial data must be scalar")
    if cfg.nu <= 0 or not 0 < cfg.alpha <= 2:
        raise ConfigError("nu" if cfg.nu <= 0 else "alpha", "Picard iteration needs nu > 0 and alpha in (0, 2]")
    if n_steps < 16:
        raise ConfigError("n_steps", f"must be >= 16 (got {n_steps})")
    if T <= 0:
        raise ConfigError("T", "must be > 0")
    grid = theta0.grid
    ops = operators_for(grid, cfg)
    tau = T / n_steps
    base = np.exp(-ops.rate * tau)
    powers = [np.ones(grid.shape)]
    for _ in range(n_steps):
        powers.append(powers[-1] * base)
    c0 = forward_transform(theta0).coeffs
    current = np.stack([p * c0 for p in powers])
    diffs: list[float] = []
    ratios: list[float] = []
    above = 0
    converged = False
    for _ in range(max_iters):
        nl = np.stack([ops.nonlinear(current[j])[0] for j in range(n_steps + 1)])
        new = np.empty_like(current)
        for i in range(n_steps + 1):
            acc = np.zeros(grid.shape, dtype=complex)
            for j in range(i + 1):
                weight = 0.5 if j in (0, i) else 1.0
                if i == 0:
                    weight = 0.0
                acc += weight * powers[i - j] * nl[j]
            new[i] = powers[i] * c0 - tau * acc
        diff = float(_l2_coeffs(new - current, grid).max())
        size = float(_l2_coeffs(new, grid).max())
        diffs.append(diff)
        if len(diffs) > 1:
            ratio = diff / diffs[-2] if diffs[-2] > 0 else 0.0
            ratios.append(ratio)
            above = above + 1 if ratio > 1 else 0
        current = new
        if diff <= tol * max(size, TINY):
            converged = True
            break
        if above >= 3:
            result = PicardResult(np.linspace(0, T, n_steps + 1), current, diffs, ratios, False, grid)
            raise NoContraction(f"successive differences grew for 3 iterations (ratios {ratios[-3:]})", result)
    return PicardResult(np.linspace(0, T, n_steps + 1), current, diffs, ratios, converged, grid)


@dataclass(frozen=True)
class ExistencePoint:
    amplitude: float
    horizon: float
    first_ratio: float


def existence_time_scan(
    shape: PhysicalField,
    amplitudes: Sequence[float],
    horizons: Sequence[float],
    cfg: SolverConfig,
    n_steps: int = 16,
    max_iters: int = 60,
) -> list[ExistencePoint]:
    """Largest horizon in ``horizons`` on which the iteration contracts, per amplitude.

    ``first_ratio`` is the mean contraction ratio over the first iterations
    on the shortest horizon; a horizon of 0 means no tested horizon worked.
    """
    out = []
    for amp in amplitudes:
        theta0 = PhysicalField(shape.grid, amp * shape.values)
        best = 0.0
        first = float("nan")
        for T in sorted(horizons):
            try:
                res = picard_iterate(theta0, T, n_steps, max_iters, cfg)
            except NoContraction:
                break
            if np.isnan(first) and res.contraction_ratios:
                first = float(np.mean(res.contraction_ratios[:3]))
            if not res.converged or any(r >= 1 for r in res.contraction_ratios):
                break
            best = T
        out.append(ExistencePoint(float(amp), best, first))
    return out
