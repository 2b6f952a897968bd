import json
import math
from pathlib import Path

import pytest

from muckenhoupt.cli import ConfigError, load_config, main

CONFIGS = Path(__file__).resolve().parent.parent / "configs"


def _write(tmp_path, obj, name="cfg.json"):
    p = tmp_path / name
    p.write_text(json.dumps(obj, indent=2) if not isinstance(obj, str) else obj)
    return str(p)


def _report(out, prefix):
    return json.loads((out / f"{prefix}_report.json").read_text())


def test_constant_homogeneity(tmp_path):
    cfg = {
        "experiment": "homogeneity",
        "seed": 0,
        "density": {"kind": "constant", "dim": 2, "value": 1.0},
        "parameters": {"x1": [0, 0], "x2": [3, 0]},
    }
    out = tmp_path / "out"
    assert main(["run", _write(tmp_path, cfg), "--out", str(out)]) == 0
    rep = _report(out, "homogeneity")
    assert rep["verdict"] == "Homogeneous"
    assert all(pt["ratio"] == 1.0 for pt in rep["result"]["curve"]["points"])
    rows = (out / "homogeneity_homogeneity.csv").read_text().splitlines()
    assert rows[0] == "R,ratio,std_error,envelope,abs_ratio_minus_1"
    assert len(rows) == 9


def test_exponential_homogeneity(tmp_path):
    out = tmp_path / "out"
    assert main(["run", str(CONFIGS / "homogeneity_exponential.json"), "--out", str(out)]) == 0
    rep = _report(out, "homogeneity_exponential")
    assert rep["verdict"] == "NotHomogeneous"
    assert all(abs(pt["ratio"] - math.e) <= 1e-12 for pt in rep["result"]["curve"]["points"])
    assert rep["ap_membership"]["2.0"] == "NonMember"


def test_ap_scan_non_member(tmp_path):
    out = tmp_path / "out"
    assert main(["run", str(CONFIGS / "ap_scan_nonmember.json"), "--out", str(out)]) == 0
    rep = _report(out, "ap_scan_nonmember")
    assert rep["verdict"] == "A_p violated (empirical)"
    assert rep["result"]["scans"][0]["membership"] == "NonMember" and rep["result"]["scans"][0]["consistent"]


def test_seed_override_is_echoed(tmp_path):
    out = tmp_path / "out"
    assert main(["run", str(CONFIGS / "mass_hyperplane.json"), "--seed", "99", "--samples", "5000", "--out", str(out)]) == 0
    rep = _report(out, "mass_hyperplane")
    assert rep["config"]["seed"] == 99 and rep["config"]["budget"]["samples"] == 5000


def test_invalid_json_reports_line(tmp_path, capsys):
    text = '{\n  "experiment": "mass",\n  "seed": 1,\n  "density": {,\n}\n'
    assert main(["run", _write(tmp_path, text)]) == 1
    assert "line 4" in capsys.readouterr().err


def test_bad_key_reports_line(tmp_path, capsys):
    text = json.dumps(
        {"experiment": "nonsense", "seed": 1, "density": {"kind": "constant", "dim": 1}}, indent=2
    )
    assert main(["run", _write(tmp_path, text)]) == 1
    err = capsys.readouterr().err
    assert "line 2" in err and "experiment" in err


def test_missing_seed(tmp_path):
    cfg = {"experiment": "mass", "density": {"kind": "constant", "dim": 1}, "parameters": {"region": {"radius": 1}}}
    with pytest.raises(ConfigError, match="seed"):
        load_config(_write(tmp_path, cfg))


def test_missing_parameter(tmp_path, capsys):
    cfg = {"experiment": "homogeneity", "seed": 1, "density": {"kind": "constant", "dim": 2}, "parameters": {"x1": [0, 0]}}
    assert main(["run", _write(tmp_path, cfg)]) == 1
    assert "x2" in capsys.readouterr().err


def test_non_integrable_density(tmp_path, capsys):
    cfg = {
        "experiment": "mass",
        "seed": 1,
        "density": {"kind": "radial_power", "dim": 2, "beta": -2.5},
        "parameters": {"region": {"radius": 1}},
    }
    assert main(["run", _write(tmp_path, cfg)]) == 1
    err = capsys.readouterr().err
    assert "integrab" in err and "-2" in err


def test_isotropy_run(tmp_path):
    out = tmp_path / "out"
    assert main(["run", str(CONFIGS / "isotropy_radial.json"), "--out", str(out)]) == 0
    rep = _report(out, "isotropy_radial")
    assert rep["verdict"] == "Isotropic"
    last = rep["result"]["curve"]["points"][-1]
    assert last["bracket_low"] <= last["ratio"] <= last["bracket_high"]


def test_subset_and_doubling_runs(tmp_path):
    cfg = {
        "experiment": "subset-scan",
        "seed": 2,
        "density": {"kind": "radial_power", "dim": 2, "beta": -1.0},
        "parameters": {"ball": {"center": [0, 0], "radius": 1}, "thetas": [0.1, 0.25, 0.5]},
    }
    out = tmp_path / "out"
    assert main(["run", _write(tmp_path, cfg), "--out", str(out)]) == 0
    rep = _report(out, "subset-scan")
    assert rep["result"]["scan"]["gamma"] > 0
    assert main(["run", str(CONFIGS / "doubling_offcenter.json"), "--samples", "20000", "--out", str(out)]) == 0
    rows = (out / "doubling_offcenter_doubling.csv").read_text().splitlines()
    assert len(rows) == 3


def test_workers_do_not_change_output(tmp_path):
    cfg = {
        "experiment": "homogeneity",
        "seed": 5,
        "density": {"kind": "radial_power", "dim": 2, "beta": -0.5},
        "parameters": {"x1": [1, 0], "x2": [-1, 0], "schedule": [8, 16]},
        "budget": {"samples": 100000},
    }
    path = _write(tmp_path, cfg)
    a, b = tmp_path / "a", tmp_path / "b"
    assert main(["run", path, "--workers", "1", "--out", str(a)]) == 0
    assert main(["run", path, "--workers", "3", "--out", str(b)]) == 0
    for f in a.iterdir():
        assert f.read_bytes() == (b / f.name).read_bytes()
