import csv
import json
from datetime import datetime

import pytest

from tcm_echo import __version__
from tcm_echo.cli import main
from tcm_echo.errors import UsageError
from tcm_echo.figures import FIGURES, figure_config
from tcm_echo.io import config_hash
from tcm_echo.runner import RunConfig

BASE = {"model": {"N": 9}, "distribution": {"kind": "coherent", "mean": 3.0}, "branch": "down",
        "solver": "exact", "grid": {"tau_min": 0.0, "tau_max": 2.0, "steps": 201}}


def _write(tmp_path, cfg, name="cfg.json"):
    p = tmp_path / name
    p.write_text(cfg if isinstance(cfg, str) else json.dumps(cfg))
    return str(p)


def test_run_writes_csv_and_manifest(tmp_path):
    out = tmp_path / "s.csv"
    cfg = {**BASE, "outputs": {"csv": str(out)}}
    assert main(["--quiet", "run", "--config", _write(tmp_path, cfg)]) == 0
    rows = list(csv.reader(out.open()))
    assert len(rows) > 201
    man = json.loads((tmp_path / "s.csv.json").read_text())
    assert man["solver"] == "exact" and man["version"] == __version__
    assert man["config_sha256"] == config_hash(RunConfig.from_dict(cfg).to_dict())
    assert man["tolerances"] and "compute" in man["runtimes_s"]
    datetime.fromisoformat(man["created"])


def test_manifest_hash_is_stable(tmp_path):
    a = RunConfig.from_dict(BASE).to_dict()
    b = RunConfig.from_dict(json.loads(json.dumps(BASE))).to_dict()
    assert config_hash(a) == config_hash(b)
    assert config_hash(a) != config_hash({**a, "solver": "alternate"})


def test_thermal_up_branch_run(tmp_path):
    cfg = {"model": {"N": 1, "Delta": 100.0}, "distribution": {"kind": "thermal", "mean": 24.0}, "branch": "up",
           "solver": "exact", "grid": {"tau_min": 0.0, "tau_max": 1.0, "steps": 101},
           "outputs": {"csv": str(tmp_path / "t.csv")}}
    assert main(["--quiet", "--threads", "2", "run", "--config", _write(tmp_path, cfg)]) == 0
    assert (tmp_path / "t.csv").exists()


@pytest.mark.parametrize("text", ["{not json", json.dumps({**BASE, "solver": "magic"}),
                                  json.dumps({**BASE, "branch": "sideways"}), json.dumps({**BASE, "colour": 1}),
                                  json.dumps({**BASE, "deterministic": False}), json.dumps([1, 2])])
def test_usage_errors_exit_2(tmp_path, text, capsys):
    assert main(["run", "--config", _write(tmp_path, text)]) == 2
    assert "tcm-echo:" in capsys.readouterr().err


def test_missing_config_and_bad_arguments():
    assert main(["run", "--config", "/nonexistent/cfg.json"]) == 2
    assert main(["frobnicate"]) == 2
    assert main(["reproduce", "fig99", "--out", "x"]) == 2


def test_numerical_failure_exits_1_with_json(tmp_path, capsys):
    cfg = {**BASE, "model": {"N": 5}, "solver": "closed", "outputs": {"csv": str(tmp_path / "c.csv")}}
    assert main(["run", "--config", _write(tmp_path, cfg)]) == 1
    err = json.loads(capsys.readouterr().err)
    assert "error" in err or "message" in err


def test_config_rejections():
    with pytest.raises(UsageError):
        RunConfig.from_dict({**BASE, "unknown": True})
    with pytest.raises(UsageError):
        RunConfig.from_dict({**BASE, "deterministic": False})
    with pytest.raises(UsageError):
        RunConfig.from_dict({**BASE, "observable": "entropy", "solver": "mta"})
    with pytest.raises(UsageError):
        RunConfig.from_dict({**BASE, "observable": "q", "solver": "exact", "alpha_grid": {}})
    with pytest.raises(UsageError):
        RunConfig.from_dict({**BASE, "grid": {"tau_min": 1.0, "tau_max": 0.0, "steps": 10}})
    assert RunConfig.from_dict({**BASE, "deterministic": True}).to_dict()["deterministic"] is True


def test_reproduce_writes_panel(tmp_path):
    assert main(["--quiet", "reproduce", "fig1a", "--out", str(tmp_path)]) == 0
    d = tmp_path / "fig1a"
    assert (d / "fig1a.csv").exists() and (d / "fig1a.csv.json").exists()
    top = json.loads((d / "manifest.json").read_text())
    assert top["figure"] == "fig1a" and "fig1a.csv" in top["files"]
    rep = json.loads((d / "fig1a.report.json").read_text())
    assert len(rep["centers"]) >= 5


def test_reproduce_writes_svg(tmp_path):
    pytest.importorskip("matplotlib")
    assert main(["--quiet", "reproduce", "table6a", "--out", str(tmp_path), "--svg"]) == 0
    assert (tmp_path / "table6a" / "table6a.svg").read_text().lstrip().startswith("<?xml")


def test_figure_configs():
    assert figure_config("table6b", 1).alpha_grid["tau"] == 1.0
    f8 = figure_config("fig8", 1)
    assert f8.solver == "exact" and (f8.grid["tau_min"], f8.grid["tau_max"]) == (665.0, 765.0)
    assert figure_config("fig10", 1).observable == "entropy"
    assert figure_config("fig1a", 8).threads == 8
    for fid in FIGURES:
        figure_config(fid, 1)
    with pytest.raises(UsageError):
        figure_config("nope", 1)


def test_selftest_passes(capsys):
    assert main(["selftest"]) == 0
    out = capsys.readouterr().out
    for suite in ("spectrum-oracle", "closed-forms", "s4-alternate", "q-coherent", "entropy-parity"):
        line = next(l for l in out.splitlines() if suite in l)
        assert "PASS" in line and "s" in line


def test_selftest_detects_injected_fault(capsys):
    assert main(["selftest", "--inject-fault"]) == 1
    line = next(l for l in capsys.readouterr().out.splitlines() if "spectrum-oracle" in l)
    assert "FAIL" in line
