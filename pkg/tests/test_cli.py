import json

import numpy as np
import pytest

from cnqg.cli import ExitCode, main
from cnqg.io import read_checkpoint


def _write(path, **values):
    path.write_text("".join(f"{k}={v}\n" for k, v in values.items()))
    return path


SMALL = dict(N=2, M=32, L=12.8, alpha=1.5, nu=0.2, t_end=0.5, dt_max=0.01, record_every=5, checkpoint_every=25)


def test_exit_codes_are_distinct():
    values = [c.value for c in ExitCode]
    assert len(set(values)) == len(values)


def test_run_writes_outputs_and_is_deterministic(tmp_path):
    cfg = _write(tmp_path / "run.cfg", **SMALL)
    for name in ("a", "b"):
        assert main(["run", "--config", str(cfg), "--out", str(tmp_path / name)]) == ExitCode.OK
    a, b = tmp_path / "a", tmp_path / "b"
    for name in ("series.csv", "spectra.csv", "final.bin", "checkpoint_00000025.bin", "summary.json"):
        assert (a / name).read_bytes() == (b / name).read_bytes()
    header = (a / "series.csv").read_text().splitlines()[0].split(",")
    assert header[:9] == ["t", "l2", "l4", "linf", "mass", "grad_linf", "hs_0.5", "hs_1", "energy_residual"]
    summary = json.loads((a / "summary.json").read_text())
    assert summary["status"] == "completed" and summary["steps"] == 50
    assert read_checkpoint(a / "final.bin").t == pytest.approx(0.5)
    assert "nu=0.2" in (a / "manifest.txt").read_text()


def test_flag_overrides_file(tmp_path):
    cfg = _write(tmp_path / "run.cfg", **SMALL)
    assert main(["run", "--config", str(cfg), "--out", str(tmp_path / "o"), "--nu", "0.1", "--scheme", "ETDRK2"]) == 0
    text = (tmp_path / "o" / "manifest.txt").read_text()
    assert "nu=0.1\n" in text and "scheme=ETDRK2\n" in text


def test_constant_data_gives_flat_diagnostics(tmp_path):
    cfg = _write(tmp_path / "c.cfg", **{**SMALL, "initial": "constant", "amplitude": 2.5})
    assert main(["run", "--config", str(cfg), "--out", str(tmp_path / "c")]) == 0
    rows = np.loadtxt(tmp_path / "c" / "series.csv", delimiter=",", skiprows=1)
    assert np.ptp(rows[:, 1:6], axis=0).max() == 0.0


def test_negative_bump_inviscid_run_reports_blowup(tmp_path):
    cfg = _write(tmp_path / "n.cfg", N=2, M=64, L=16, alpha=1, nu=0, t_end=2, dt_max=0.005,
                 initial="negative-bump", amplitude=4, width=3, record_every=5)
    assert main(["run", "--config", str(cfg), "--out", str(tmp_path / "n")]) == ExitCode.BLOWUP_SUSPECTED
    summary = json.loads((tmp_path / "n" / "summary.json").read_text())
    assert summary["status"] == "blowup_suspected" and summary["t_final"] < 2


def test_config_and_io_errors(tmp_path, capsys):
    cfg = _write(tmp_path / "bad.cfg", **{**SMALL, "alpha": 2.5})
    assert main(["run", "--config", str(cfg)]) == ExitCode.CONFIG
    assert "alpha" in capsys.readouterr().err
    assert main(["run", "--config", str(tmp_path / "missing.cfg")]) == ExitCode.IO
    assert main(["decay-fit", str(tmp_path / "nothing")]) == ExitCode.IO
    with pytest.raises(SystemExit) as info:
        main(["no-such-command"])
    assert info.value.code == ExitCode.USAGE


def test_property_suite_single_check(capsys):
    assert main(["property-suite", "--only", "riesz-divergence", "--trials", "5"]) == 0
    out = capsys.readouterr().out
    assert "riesz-divergence" in out and "1/1 passed" in out


def test_oracle_compare_1d(tmp_path):
    cfg = _write(tmp_path / "o.cfg", N=1, M=256, L=40, alpha=1, nu=0, t_end=1, width=1.5)
    assert main(["oracle-compare", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 0
    lines = (tmp_path / "o" / "oracle.csv").read_text().splitlines()
    assert lines[0] == "operator,interior_rel_err,budget,pass"
    assert all(line.endswith(",1") for line in lines[1:])


def test_oracle_compare_too_expensive(tmp_path):
    cfg = _write(tmp_path / "o.cfg", N=2, M=256, L=40, alpha=1, nu=0, t_end=1)
    assert main(["oracle-compare", "--config", str(cfg), "--out", str(tmp_path / "o")]) == ExitCode.TOO_EXPENSIVE


def test_blowup_probe(tmp_path):
    cfg = _write(tmp_path / "b.cfg", N=2, M=64, L=16, alpha=1, nu=0.3, t_end=0.3, dt_max=0.005,
                 initial="negative-bump", amplitude=1, width=3, record_every=5)
    assert main(["blowup-probe", "--config", str(cfg), "--out", str(tmp_path / "b")]) == 0
    assert "nu=0\n" in (tmp_path / "b" / "manifest.txt").read_text()
    rows = np.loadtxt(tmp_path / "b" / "virial.csv", delimiter=",", skiprows=1)
    assert np.all(np.diff(rows[:, 1]) < 0)
    wrong = _write(tmp_path / "w.cfg", **SMALL)
    assert main(["blowup-probe", "--config", str(wrong), "--out", str(tmp_path / "w")]) == ExitCode.CONFIG


def test_decay_fit_on_linear_run(tmp_path):
    cfg = _write(tmp_path / "l.cfg", N=2, M=32, L=6.283185307179586, alpha=2, nu=0.5, t_end=4, dt_max=0.02,
                 record_every=2, nonlinear="false", initial="random-smooth", seed=3)
    run_dir = tmp_path / "l"
    assert main(["run", "--config", str(cfg), "--out", str(run_dir)]) == 0
    assert main(["decay-fit", str(run_dir), "--window", "0.5,4"]) == 0
    fits = {f["quantity"]: f for f in json.loads((run_dir / "decay.json").read_text())["fits"]}
    assert fits["L2"]["exponential_like"]
    assert main(["decay-fit", str(run_dir), "--window", "3.9,4"]) == ExitCode.INSUFFICIENT_DATA
