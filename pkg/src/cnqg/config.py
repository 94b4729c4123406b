"""Plain-text ``key=value`` run manifests.

Required keys: ``N, M, L, alpha, nu, t_end``.  ``M`` and ``L`` take one value
(used on every axis) or ``N`` comma-separated values.  Everything else has a
default listed in :data:`DEFAULTS`.  Unknown keys are rejected.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Mapping

import numpy as np

from .errors import ConfigError
from .initial import constant_field, gaussian_bump, multi_bump, negative_bump, random_smooth_field
from .solver import SolverConfig
from .spectral import Grid, PhysicalField

REQUIRED = ("N", "M", "L", "alpha", "nu", "t_end")

DEFAULTS: dict[str, str] = {
    "eps": "0",
    "scheme": "IF-Euler",
    "dealias_fraction": "0.6666666666666666",
    "cfl": "0.5",
    "dt_max": "0.01",
    "record_every": "10",
    "nonlinear": "true",
    "clip_negative": "false",
    "grad_growth_limit": "10000",
    "tail_limit": "0.001",
    "initial": "gaussian-bump",
    "amplitude": "1",
    "width": "",
    "seed": "0",
    "out": "cnqg-out",
    "checkpoint_every": "0",
    "hs_orders": "0.5,1",
    "lp_extra": "",
    "oracle_alphas": "0.25,0.5,1,1.5",
    "decay_window": "",
    "decay_p": "4",
}

INITIAL_SHAPES = ("gaussian-bump", "multi-bump", "negative-bump", "random-smooth", "constant")


def _parse_bool(key: str, text: str) -> bool:
    lowered = text.strip().lower()
    if lowered in ("1", "true", "yes", "on"):
        return True
    if lowered in ("0", "false", "no", "off"):
        return False
    raise ConfigError(key, f"expected a boolean, got {text!r}")


def _parse_float(key: str, text: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise ConfigError(key, f"expected a number, got {text!r}") from None
    if not np.isfinite(value):
        raise ConfigError(key, f"must be finite, got {text!r}")
    return value


def _parse_int(key: str, text: str) -> int:
    try:
        return int(text)
    except ValueError:
        raise ConfigError(key, f"expected an integer, got {text!r}") from None


def _parse_list(key: str, text: str) -> tuple[float, ...]:
    if not text.strip():
        return ()
    return tuple(_parse_float(key, part) for part in text.split(","))


def read_key_values(path: str | Path) -> dict[str, str]:
    values: dict[str, str] = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}", f"expected key=value, got {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        values[key] = value
    return values


@dataclass(frozen=True)
class RunManifest:
    """Everything needed to reproduce a run: grid, solver config, initial data, outputs."""

    grid: Grid
    config: SolverConfig
    initial: str
    amplitude: float
    width: float
    seed: int
    out: Path
    checkpoint_every: int
    hs_orders: tuple[float, ...]
    lp_extra: tuple[float, ...]
    oracle_alphas: tuple[float, ...]
    decay_window: tuple[float, ...]
    decay_p: float
    snapshot: dict[str, str] = field(default_factory=dict)

    def initial_field(self) -> PhysicalField:
        return build_initial(self.grid, self.initial, self.amplitude, self.width, self.seed)

    def snapshot_text(self) -> str:
        return "".join(f"{k}={v}\n" for k, v in self.snapshot.items())


def build_initial(grid: Grid, shape: str, amplitude: float, width: float, seed: int) -> PhysicalField:
    builders: dict[str, Callable[[], PhysicalField]] = {
        "gaussian-bump": lambda: gaussian_bump(grid, amplitude, width),
        "multi-bump": lambda: multi_bump(grid, amplitude, width),
        "negative-bump": lambda: negative_bump(grid, amplitude, width),
        "random-smooth": lambda: random_smooth_field(
            grid, np.random.default_rng(seed), amplitude, nonnegative=True
        ),
        "constant": lambda: constant_field(grid, amplitude),
    }
    return builders[shape]()


def build_manifest(values: Mapping[str, str], overrides: Mapping[str, Any] | None = None) -> RunManifest:
    """Validate raw ``key -> text`` pairs (after ``overrides``) into a manifest."""
    merged = dict(values)
    for key, value in (overrides or {}).items():
        if value is not None:
            merged[key] = str(value)
    known = set(REQUIRED) | set(DEFAULTS)
    for key in merged:
        if key not in known:
            raise ConfigError(key, "unknown key")
    for key in REQUIRED:
        if key not in merged or not merged[key].strip():
            raise ConfigError(key, "missing required key")
    resolved = {**DEFAULTS, **merged}

    dim = _parse_int("N", resolved["N"])
    if dim not in (1, 2, 3):
        raise ConfigError("N", f"must be 1, 2 or 3 (got {dim})")
    points = [_parse_int("M", part) for part in resolved["M"].split(",")]
    lengths = [_parse_float("L", part) for part in resolved["L"].split(",")]
    if len(points) == 1:
        points *= dim
    if len(lengths) == 1:
        lengths *= dim
    if len(points) != dim:
        raise ConfigError("M", f"expected 1 or {dim} values")
    if len(lengths) != dim:
        raise ConfigError("L", f"expected 1 or {dim} values")
    for m in points:
        if m < 8 or m % 2:
            raise ConfigError("M", f"points per axis must be even and >= 8 (got {m})")
    for length in lengths:
        if length <= 0:
            raise ConfigError("L", f"box lengths must be > 0 (got {length})")
    grid = Grid(tuple(points), tuple(lengths))

    config = SolverConfig(
        alpha=_parse_float("alpha", resolved["alpha"]),
        nu=_parse_float("nu", resolved["nu"]),
        t_end=_parse_float("t_end", resolved["t_end"]),
        dt_max=_parse_float("dt_max", resolved["dt_max"]),
        eps=_parse_float("eps", resolved["eps"]),
        scheme=resolved["scheme"],
        dealias_fraction=_parse_float("dealias_fraction", resolved["dealias_fraction"]),
        cfl=_parse_float("cfl", resolved["cfl"]),
        record_every=_parse_int("record_every", resolved["record_every"]),
        nonlinear=_parse_bool("nonlinear", resolved["nonlinear"]),
        clip_negative=_parse_bool("clip_negative", resolved["clip_negative"]),
        grad_growth_limit=_parse_float("grad_growth_limit", resolved["grad_growth_limit"]),
        tail_limit=_parse_float("tail_limit", resolved["tail_limit"]),
        store_fields=False,
    )

    initial = resolved["initial"]
    if initial not in INITIAL_SHAPES:
        raise ConfigError("initial", f"must be one of {INITIAL_SHAPES}")
    width = _parse_float("width", resolved["width"]) if resolved["width"].strip() else min(lengths) / 16
    if width <= 0:
        raise ConfigError("width", "must be > 0")
    checkpoint_every = _parse_int("checkpoint_every", resolved["checkpoint_every"])
    if checkpoint_every < 0:
        raise ConfigError("checkpoint_every", "must be >= 0")
    window = _parse_list("decay_window", resolved["decay_window"])
    if window and (len(window) != 2 or window[0] >= window[1]):
        raise ConfigError("decay_window", "expected 'start,end' with start < end")
    hs_orders = _parse_list("hs_orders", resolved["hs_orders"])
    lp_extra = _parse_list("lp_extra", resolved["lp_extra"])
    if any(p < 1 for p in lp_extra):
        raise ConfigError("lp_extra", "exponents must be >= 1")
    resolved["width"] = repr(width)
    return RunManifest(
        grid=grid,
        config=config,
        initial=initial,
        amplitude=_parse_float("amplitude", resolved["amplitude"]),
        width=width,
        seed=_parse_int("seed", resolved["seed"]),
        out=Path(resolved["out"]),
        checkpoint_every=checkpoint_every,
        hs_orders=hs_orders,
        lp_extra=lp_extra,
        oracle_alphas=_parse_list("oracle_alphas", resolved["oracle_alphas"]),
        decay_window=window,
        decay_p=_parse_float("decay_p", resolved["decay_p"]),
        snapshot=dict(sorted(resolved.items())),
    )


def parse_config(path: str | Path, overrides: Mapping[str, Any] | None = None) -> tuple[SolverConfig, RunManifest]:
    manifest = build_manifest(read_key_values(path), overrides)
    return manifest.config, manifest
