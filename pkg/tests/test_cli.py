import csv
import json
import os
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

from optoamp.cli import load_config, main

CONFIGS = Path(__file__).resolve().parents[1] / "configs"

RESOLVED = {"delta1": 1.0, "delta2": -1.0, "j": 1.0, "g": 0.2561, "kappa1": 0.1, "kappa2": 0.0, "gamma": 0.1}
PASSIVE = {**RESOLVED, "g": 0.0}
DECOUPLED = {**PASSIVE, "j": 0.0}


def run(tmp_path, command, cfg, *extra):
    path = tmp_path / f"{command}.json"
    if isinstance(cfg, str):
        path.write_text(cfg)
    else:
        path.write_text(json.dumps({"schema_version": 1, **cfg}))
    out = tmp_path / "out"
    return main([command, "--config", str(path), "--out", str(out), "--jobs", "2", *extra]), out


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def test_spectrum_peak_row(tmp_path, capsys):
    code, out = run(tmp_path, "spectrum", {"params": RESOLVED,
                                           "omega": {"start": -1.226, "stop": -1.2235, "num": 2501}})
    assert code == 0
    rows = read_csv(out / "spectrum.csv")
    best = max(rows, key=lambda r: float(r["gain"]))
    assert float(best["omega"]) == pytest.approx(-1.2247, abs=1e-4)
    assert float(best["gain"]) == pytest.approx(6.5e5, rel=0.05)
    assert "peak omega=" in capsys.readouterr().out


def test_spectrum_passive_flat(tmp_path):
    code, out = run(tmp_path, "spectrum", {"params": PASSIVE, "omega": [-2.0, -1.0, 0.0, 1.0]})
    assert code == 0
    assert [float(r["gain"]) for r in read_csv(out / "spectrum.csv")] == pytest.approx([1.0] * 4, abs=1e-12)


def test_csv_format(tmp_path):
    _, out = run(tmp_path, "spectrum", {"params": PASSIVE, "omega": [0.1]})
    raw = (out / "spectrum.csv").read_bytes()
    assert raw.startswith(b"omega,gain\n") and b"\r" not in raw
    assert raw.split(b"\n")[1].split(b",")[0] == b"0.10000000000000001"


def test_malformed_json(tmp_path):
    assert run(tmp_path, "spectrum", "{not json")[0] == 2


@pytest.mark.parametrize(
    "cfg",
    [
        {"params": RESOLVED, "omega": [0.0], "extra": 1},
        {"params": {**RESOLVED, "kappa0": 1.0}, "omega": [0.0]},
        {"params": RESOLVED},
        {"params": {**RESOLVED, "kappa1": 0.0}, "omega": [0.0]},
        {"params": RESOLVED, "omega": []},
    ],
)
def test_config_errors(tmp_path, cfg):
    assert run(tmp_path, "spectrum", cfg)[0] == 2


def test_schema_version_required(tmp_path):
    path = tmp_path / "c.json"
    path.write_text(json.dumps({"params": RESOLVED, "omega": [0.0]}))
    assert main(["spectrum", "--config", str(path), "--out", str(tmp_path)]) == 2


def test_unwritable_output_rejected_before_compute(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"schema_version": 1, "params": RESOLVED, "omega": [0.0]}))
    assert main(["spectrum", "--config", str(cfg), "--out", str(blocker / "sub")]) == 2


def test_bad_jobs(tmp_path):
    assert run(tmp_path, "spectrum", {"params": RESOLVED, "omega": [0.0]}, "--jobs", "0")[0] == 2


def test_ratios_at_peak(tmp_path):
    code, out = run(tmp_path, "ratios", {"params": RESOLVED,
                                         "omega": {"start": -1.2257, "stop": -1.2237, "num": 201}})
    assert code == 0
    rows = read_csv(out / "ratios.csv")
    peak = min(rows, key=lambda r: abs(float(r["omega"]) + 1.22474))
    assert float(peak["abs_F_over_A"]) == pytest.approx(1.0, abs=1e-3)
    for col in ("abs_B_over_A", "abs_C_over_A", "abs_D_over_A", "abs_E_over_A"):
        assert float(peak[col]) < 0.2


def test_ratios_decoupled_zero(tmp_path):
    _, out = run(tmp_path, "ratios", {"params": DECOUPLED, "omega": [-1.5, -1.0, 0.5]})
    for row in read_csv(out / "ratios.csv"):
        assert all(float(v) == 0 for k, v in row.items() if k != "omega")


def test_stability_outputs(tmp_path):
    params = {**RESOLVED, "j": 3.0}
    code, out = run(tmp_path, "stability", {"params": params, "gamma_grid": [0.1, 0.3],
                                            "g_grid": {"start": 2.2, "stop": 2.3, "num": 11}})
    assert code == 0
    rows = [r for r in read_csv(out / "stability_map.csv") if float(r["gamma"]) == 0.1]
    unstable = [float(r["g"]) for r in rows if r["verdict"] == "unstable"]
    stable = [float(r["g"]) for r in rows if r["verdict"] == "stable"]
    assert max(stable) == pytest.approx(2.25) and min(unstable) == pytest.approx(2.26)
    curves = read_csv(out / "stability_boundaries.csv")
    assert {r["branch"] for r in curves} == {"G1", "G2"} and len(curves) == 4


def test_stability_nonpositive_rate(tmp_path):
    cfg = {"params": {**RESOLVED, "kappa1": -0.1}, "gamma_grid": [0.1], "g_grid": [0.1]}
    assert run(tmp_path, "stability", cfg)[0] == 2


def test_fit_reports(tmp_path):
    code, out = run(tmp_path, "fit", {"params": RESOLVED})
    doc = json.loads((out / "fit.json").read_text())
    assert code == 0
    assert doc["numeric"]["gbw"] == pytest.approx(0.21, rel=0.05)
    assert doc["analytic"]["kappa_abs"] == pytest.approx(0.21, rel=0.05)
    assert doc["at_peak"]["added_noise"] == pytest.approx(0.5, abs=1e-3)


def test_fit_numeric_only_with_lossy_aux(tmp_path):
    cfg = json.loads((CONFIGS / "fit_lossy.json").read_text())
    code, out = run(tmp_path, "fit", {k: v for k, v in cfg.items() if k != "schema_version"})
    doc = json.loads((out / "fit.json").read_text())
    assert code == 0 and "analytic" not in doc
    assert doc["numeric"]["gbw"] == pytest.approx(0.21, rel=0.05)


def test_fit_unstable_exit_3(tmp_path, capsys):
    assert run(tmp_path, "fit", {"params": {**RESOLVED, "g": 0.3}})[0] == 3
    assert "NotStable" in capsys.readouterr().err


def test_sweep_contour_files(tmp_path):
    cfg = {"params": RESOLVED, "metric": "b_over_a_at_peak", "levels": [0.1, 0.2],
           "x": {"param": "kappa1", "grid": {"start": 0.05, "stop": 0.5, "num": 10}},
           "y": {"param": "j", "grid": {"start": 0.5, "stop": 3.0, "num": 6}}}
    code, out = run(tmp_path, "sweep", cfg)
    assert code == 0
    assert sorted(p.name for p in out.iterdir()) == [
        "contour_0.1.csv", "contour_0.2.csv", "sweep_grid.csv", "sweep_grid.json"]
    grid = json.loads((out / "sweep_grid.json").read_text())
    assert len(grid["values"]) == 6 and len(grid["values"][0]) == 10


def test_sweep_single_cell(tmp_path):
    cfg = {"params": RESOLVED, "metric": "gbw_analytic",
           "x": {"param": "kappa1", "grid": [0.1]}, "y": {"param": "j", "grid": [1.0]}}
    code, out = run(tmp_path, "sweep", cfg)
    assert code == 0 and len(read_csv(out / "sweep_grid.csv")) == 1


def test_sweep_unknown_metric(tmp_path):
    cfg = {"params": RESOLVED, "metric": "power",
           "x": {"param": "kappa1", "grid": [0.1]}, "y": {"param": "j", "grid": [1.0]}}
    assert run(tmp_path, "sweep", cfg)[0] == 2


def test_tune(tmp_path):
    code, out = run(tmp_path, "tune", {"params": RESOLVED, "j_grid": [0.0, 1.0, 3.0]})
    rows = read_csv(out / "tune.csv")
    assert code == 0
    assert [float(r["center_frequency"]) for r in rows] == pytest.approx([-1.0, -1.2247, -2.3452], abs=1e-4)


def test_tune_empty(tmp_path):
    assert run(tmp_path, "tune", {"params": RESOLVED, "j_grid": []})[0] == 2


@pytest.mark.slow
def test_verify_pass(tmp_path):
    code, out = run(tmp_path, "verify", {"params": RESOLVED, "omegas": [-2.0, -1.5, -1.0, -0.5, 0.0]})
    assert code == 0
    assert json.loads((out / "verify.json").read_text())["passed"] is True


@pytest.mark.slow
def test_verify_passive(tmp_path):
    code, out = run(tmp_path, "verify", {"params": PASSIVE, "omegas": [-1.0, 0.5]})
    assert code == 0
    assert json.loads((out / "verify.json").read_text())["summary"]["max_defect"] < 1e-6


def test_verify_unstable(tmp_path, capsys):
    assert run(tmp_path, "verify", {"params": {**RESOLVED, "g": 0.3}, "omegas": [-1.0]})[0] == 3
    assert "NotStable" in capsys.readouterr().err


def test_byte_determinism(tmp_path):
    cfg = {"params": RESOLVED, "metric": "gbw_numeric",
           "x": {"param": "kappa1", "grid": [0.05, 0.1, 0.2]}, "y": {"param": "j", "grid": [1.0, 2.0]}}
    _, out = run(tmp_path, "sweep", cfg)
    first = {p.name: p.read_bytes() for p in out.iterdir()}
    path = tmp_path / "sweep.json"
    main(["sweep", "--config", str(path), "--out", str(tmp_path / "again"), "--jobs", "1"])
    second = {p.name: p.read_bytes() for p in (tmp_path / "again").iterdir()}
    assert first == second


def test_usage_error_exit_2():
    assert main(["nope"]) == 2


def test_module_entry_point(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"schema_version": 1, "params": PASSIVE, "omega": [0.0]}))
    proc = subprocess.run([sys.executable, "-m", "optoamp", "spectrum", "--config", str(cfg),
                           "--out", str(tmp_path)], capture_output=True, text=True,
                          env={**os.environ, "PYTHONHASHSEED": "0"})
    assert proc.returncode == 0, proc.stderr
    assert np.isclose(float(read_csv(tmp_path / "spectrum.csv")[0]["gain"]), 1.0)


@pytest.mark.parametrize("name", sorted(p.stem for p in CONFIGS.glob("*.json")))
def test_shipped_configs_validate(name):
    load_config(CONFIGS / f"{name}.json", name.split("_")[0])


@pytest.mark.slow
def test_verify_exceedance_exit_1(tmp_path, monkeypatch):
    monkeypatch.setattr("optoamp.cli.VERIFY_LIMIT", 1e-30)
    code, out = run(tmp_path, "verify", {"params": RESOLVED, "omegas": [-1.0]})
    assert code == 1
    assert json.loads((out / "verify.json").read_text())["passed"] is False
