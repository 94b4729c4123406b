"""Command-line entry point: ``cnqg <subcommand> [flags]``.

Exit codes
----------
0  OK                 clean finish / every check passed
1  CHECK_FAILED       a property or oracle check missed its threshold
2  USAGE              bad command line (argparse)
3  CONFIG             invalid manifest or flag value
4  BLOWUP_SUSPECTED   run stopped by the gradient-growth or spectral-tail monitor
5  NUMERICAL_BLOWUP   non-finite values appeared
6  IO                 a file could not be read or written
7  TOO_EXPENSIVE      quadrature grid above the point budget
8  INSUFFICIENT_DATA  too few samples for a fit or probe
9  INVALID_INPUT      data violates an operation's precondition
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from dataclasses import replace
from enum import IntEnum
from pathlib import Path
from typing import Any, Sequence

import numpy as np

from .config import RunManifest, build_manifest, parse_config, read_key_values
from .diagnostics import DiagnosticsSeries, SeriesRecorder, decay_fit, virial_probe
from .errors import (
    CNQGError,
    ConfigError,
    InsufficientData,
    NumericalBlowup,
    TooExpensive,
)
from .io import Checkpoint, write_checkpoint
from .oracle import QuadratureSpec, interior_relative_error, lambda_alpha_quadrature, riesz_quadrature
from .solver import Trajectory, TrajectoryRecord, run
from .spectral import forward_transform, fractional_laplacian, inverse_transform, riesz_transform
from .suite import CHECKS, run_suite


class ExitCode(IntEnum):
    OK = 0
    CHECK_FAILED = 1
    USAGE = 2
    CONFIG = 3
    BLOWUP_SUSPECTED = 4
    NUMERICAL_BLOWUP = 5
    IO = 6
    TOO_EXPENSIVE = 7
    INSUFFICIENT_DATA = 8
    INVALID_INPUT = 9


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def _write_json(path: Path, payload: dict[str, Any]) -> None:
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")


def _write_table(path: Path, header: Sequence[str], rows: Sequence[Sequence[float]]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])


def _write_spectra(path: Path, series: DiagnosticsSeries) -> None:
    width = max((len(s) for s in series.spectra), default=0)
    rows = [[t, *np.pad(s, (0, width - len(s)))] for t, s in zip(series.times, series.spectra)]
    _write_table(path, ["t"] + [f"shell_{i}" for i in range(width)], rows)


class CheckpointWriter:
    """Hook writing ``checkpoint_<step>.bin`` whenever the record step is a multiple of ``every``."""

    name = "checkpoint"

    def __init__(self, manifest: RunManifest, directory: Path):
        self.every = manifest.checkpoint_every
        self.cfg = manifest.config
        self.directory = directory

    def __call__(self, rec: TrajectoryRecord) -> str | None:
        if self.every <= 0 or rec.step % self.every:
            return None
        path = self.directory / f"checkpoint_{rec.step:08d}.bin"
        write_checkpoint(path, Checkpoint(rec.theta, self.cfg.alpha, self.cfg.nu, self.cfg.eps, rec.t))
        return path.name


def _overrides(args: argparse.Namespace) -> dict[str, Any]:
    keys = ("seed", "out", "nu", "alpha", "eps", "scheme")
    return {k: getattr(args, k, None) for k in keys}


def _load(args: argparse.Namespace, **extra: Any) -> RunManifest:
    _, manifest = parse_config(args.config, {**_overrides(args), **extra})
    return manifest


def _prepare_out(manifest: RunManifest) -> Path:
    out = manifest.out
    out.mkdir(parents=True, exist_ok=True)
    (out / "manifest.txt").write_text(manifest.snapshot_text())
    return out


def _finish_run(manifest: RunManifest, out: Path, traj: Trajectory, recorder: SeriesRecorder, error: str = "") -> None:
    recorder.series.to_csv(out / "series.csv")
    _write_spectra(out / "spectra.csv", recorder.series)
    final = traj.records[-1]
    if final.theta is not None:
        cfg = manifest.config
        write_checkpoint(out / "final.bin", Checkpoint(final.theta, cfg.alpha, cfg.nu, cfg.eps, final.t))
    status = "numerical_blowup" if error else traj.status
    _write_json(
        out / "summary.json",
        {
            "status": status,
            "reason": error or traj.reason,
            "steps": traj.steps,
            "records": len(traj.records),
            "t_final": final.t,
            "seed": manifest.seed,
            "initial": manifest.initial,
            "final": dict(zip(recorder.series.names, recorder.series.rows[-1])) if recorder.series.rows else {},
        },
    )


def _status_code(status: str) -> ExitCode:
    return ExitCode.BLOWUP_SUSPECTED if status == "blowup_suspected" else ExitCode.OK


def cmd_run(args: argparse.Namespace) -> ExitCode:
    manifest = _load(args)
    out = _prepare_out(manifest)
    recorder = SeriesRecorder(manifest.grid, manifest.config, manifest.hs_orders, manifest.lp_extra)
    hooks = [recorder, CheckpointWriter(manifest, out)]
    try:
        traj = run(manifest.initial_field(), manifest.config, hooks)
    except NumericalBlowup as exc:
        if exc.trajectory is not None and exc.trajectory.records:
            _finish_run(manifest, out, exc.trajectory, recorder, str(exc))
        raise
    _finish_run(manifest, out, traj, recorder)
    print(f"{traj.status}: {traj.steps} steps to t={traj.records[-1].t:.6g} -> {out}")
    if traj.reason:
        print(f"  reason: {traj.reason}")
    return _status_code(traj.status)


def cmd_property_suite(args: argparse.Namespace) -> ExitCode:
    results = run_suite(seed=args.seed if args.seed is not None else 0, trials=args.trials, only=args.only)
    width = max(len(r.name) for r in results)
    print(f"{'check':<{width}}  {'cases':>5}  {'worst':>11}  {'tolerance':>9}  result")
    for r in results:
        verdict = "PASS" if r.passed else "FAIL"
        print(f"{r.name:<{width}}  {r.cases:>5}  {r.worst:>11.3e}  {r.tolerance:>9.1e}  {verdict}")
    failed = [r.name for r in results if not r.passed]
    print(f"{len(results) - len(failed)}/{len(results)} passed")
    return ExitCode.CHECK_FAILED if failed else ExitCode.OK


def oracle_budget(alpha: float) -> float:
    """Interior error budget: 5% below alpha = 0.5 (slow kernel decay), else 2%."""
    return 0.05 if alpha < 0.5 else 0.02


def cmd_oracle_compare(args: argparse.Namespace) -> ExitCode:
    manifest = _load(args)
    out = _prepare_out(manifest)
    f = manifest.initial_field()
    F = forward_transform(f)
    spec = QuadratureSpec()
    rows: list[tuple[str, float, float]] = []
    for alpha in manifest.oracle_alphas:
        spectral = inverse_transform(fractional_laplacian(F, alpha)).values
        quadrature = lambda_alpha_quadrature(f, alpha, spec).values
        err = interior_relative_error(spectral, quadrature, f.grid, spec.interior_margin)
        rows.append((f"lambda^{alpha:g}", err, oracle_budget(alpha)))
    spectral = inverse_transform(riesz_transform(F)).values
    quadrature = riesz_quadrature(f, spec).values
    rows.append(("riesz", interior_relative_error(spectral, quadrature, f.grid, spec.interior_margin), 0.02))
    failed = False
    with open(out / "oracle.csv", "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["operator", "interior_rel_err", "budget", "pass"])
        print(f"{'operator':<14}  {'rel err':>10}  {'budget':>7}  result")
        for name, err, budget in rows:
            ok = err <= budget
            failed |= not ok
            writer.writerow([name, _fmt(err), _fmt(budget), int(ok)])
            print(f"{name:<14}  {err:>10.3e}  {budget:>7.2f}  {'PASS' if ok else 'FAIL'}")
    return ExitCode.CHECK_FAILED if failed else ExitCode.OK


def cmd_blowup_probe(args: argparse.Namespace) -> ExitCode:
    manifest = _load(args, nu=0)
    theta0 = manifest.initial_field()
    if theta0.values.max() > 0:
        raise ConfigError("initial", "blowup-probe needs nonpositive initial data (e.g. negative-bump)")
    manifest = replace(manifest, config=replace(manifest.config, store_fields=True))
    out = _prepare_out(manifest)
    recorder = SeriesRecorder(manifest.grid, manifest.config, manifest.hs_orders, manifest.lp_extra)
    status, reason = "completed", ""
    try:
        traj = run(theta0, manifest.config, [recorder])
        status, reason = traj.status, traj.reason
    except NumericalBlowup as exc:
        if exc.trajectory is None:
            raise
        traj = exc.trajectory
        status, reason = "numerical_blowup", str(exc)
    _finish_run(manifest, out, traj, recorder, reason if status == "numerical_blowup" else "")
    probe = virial_probe(traj, QuadratureSpec(), difference="centered")
    header = ["t", "w", "J", "mass", "dwdt", "identity_residual", "relative_residual", "lower_bound", "outside_fraction"]
    columns = [probe.times, probe.w, probe.J, probe.mass, probe.dwdt, probe.identity_residual,
               probe.relative_residual, probe.lower_bound, probe.outside_fraction]
    _write_table(out / "virial.csv", header, list(zip(*columns)))
    _write_json(
        out / "virial_summary.json",
        {
            "status": status,
            "reason": reason,
            "constant": probe.constant,
            "lower_bound_holds": probe.lower_bound_ok,
            "max_relative_residual": float(np.nanmax(probe.relative_residual)),
            "w_initial": float(probe.w[0]),
            "w_final": float(probe.w[-1]),
        },
    )
    print(f"{status}: w {probe.w[0]:.6g} -> {probe.w[-1]:.6g} over t in [0, {probe.times[-1]:.6g}]")
    print(f"  max |dw/dt + c J| / |dw/dt| = {np.nanmax(probe.relative_residual):.3e}; lower bound holds: {probe.lower_bound_ok}")
    if status == "numerical_blowup":
        return ExitCode.NUMERICAL_BLOWUP
    return _status_code(status)


def _parse_window(text: str) -> tuple[float, float]:
    try:
        start, end = (float(x) for x in text.split(","))
    except ValueError:
        raise ConfigError("window", f"expected 'start,end', got {text!r}") from None
    if not start < end:
        raise ConfigError("window", "start must be below end")
    return start, end


def cmd_decay_fit(args: argparse.Namespace) -> ExitCode:
    run_dir = Path(args.run_dir)
    manifest = build_manifest(read_key_values(run_dir / "manifest.txt"))
    cfg = manifest.config
    series = DiagnosticsSeries.from_csv(
        run_dir / "series.csv", {"dim": manifest.grid.dim, "alpha": cfg.alpha, "eps": cfg.eps}
    )
    if args.window:
        window = _parse_window(args.window)
    elif manifest.decay_window:
        window = (manifest.decay_window[0], manifest.decay_window[1])
    else:
        window = (0.1 * float(series.times[-1]), float(series.times[-1]))
    fits = []
    for quantity in ("L2", "Lp", "gradL2"):
        p = manifest.decay_p if quantity == "Lp" else 2.0
        try:
            fits.append(decay_fit(series, window, quantity, p=p, eps=cfg.eps))
        except KeyError as exc:
            print(f"skipping {quantity}: {exc}")
    payload = {"window": list(window), "fits": [vars(fit) for fit in fits]}
    _write_json(run_dir / "decay.json", payload)
    print(f"{'quantity':<8}  {'fitted':>10}  {'expected':>10}  {'r2':>8}  flags")
    for fit in fits:
        flags = [n for n, on in (("exponential-like", fit.exponential_like), ("outside-hypotheses", fit.outside_hypotheses)) if on]
        print(f"{fit.quantity:<8}  {fit.exponent:>10.4f}  {fit.expected:>10.4f}  {fit.r2:>8.4f}  {','.join(flags)}")
    return ExitCode.OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cnqg", description="Periodic pseudo-spectral solver and verification harness.")
    sub = parser.add_subparsers(dest="command", required=True)

    def manifest_flags(p: argparse.ArgumentParser) -> None:
        p.add_argument("--config", required=True, help="key=value manifest file")
        p.add_argument("--seed", type=int)
        p.add_argument("--out", help="output directory")
        p.add_argument("--nu", type=float)
        p.add_argument("--alpha", type=float)
        p.add_argument("--eps", type=float)
        p.add_argument("--scheme", choices=("IF-Euler", "ETDRK2"))

    for name, func, text in (
        ("run", cmd_run, "integrate a manifest and write series.csv, spectra.csv, checkpoints and summary.json"),
        ("oracle-compare", cmd_oracle_compare, "spectral operators against singular-integral quadrature"),
        ("blowup-probe", cmd_blowup_probe, "inviscid run with the second-moment (virial) probe"),
    ):
        p = sub.add_parser(name, help=text)
        manifest_flags(p)
        p.set_defaults(func=func)

    p = sub.add_parser("property-suite", help="randomized invariant checks")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--trials", type=int, default=25)
    p.add_argument("--only", choices=sorted(CHECKS))
    p.set_defaults(func=cmd_property_suite)

    p = sub.add_parser("decay-fit", help="fit decay exponents in a finished run directory")
    p.add_argument("run_dir")
    p.add_argument("--window", help="'start,end' fitting window")
    p.set_defaults(func=cmd_decay_fit)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return int(args.func(args))
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return ExitCode.CONFIG
    except NumericalBlowup as exc:
        print(f"numerical blow-up: {exc}", file=sys.stderr)
        return ExitCode.NUMERICAL_BLOWUP
    except TooExpensive as exc:
        print(f"too expensive: {exc}", file=sys.stderr)
        return ExitCode.TOO_EXPENSIVE
    except InsufficientData as exc:
        print(f"insufficient data: {exc}", file=sys.stderr)
        return ExitCode.INSUFFICIENT_DATA
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return ExitCode.IO
    except (CNQGError, ValueError) as exc:
        print(f"invalid input: {exc}", file=sys.stderr)
        return ExitCode.INVALID_INPUT


if __name__ == "__main__":
    sys.exit(main())
