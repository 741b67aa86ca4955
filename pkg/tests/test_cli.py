import csv
import io
import json

import pytest

from hardylab.cli import main, resolve_config, run
from hardylab.errors import ConfigError
from hardylab.presets import list_presets, preset_config, preset_names


def _invoke(capsys, argv):
    code = main(argv)
    return code, json.loads(capsys.readouterr().out)


def test_factor_command(capsys):
    code, rep = _invoke(capsys, ["factor", "--poly", "1,-2.5,1"])
    assert code == 0 and rep["pass"]
    assert rep["schema"] == 1 and rep["config"]["command"] == "factor"
    names = [c["name"] for c in rep["checks"]]
    assert names == sorted(names)
    assert set(rep["checks"][0]) >= {"name", "value", "tol", "pass"}


def test_theta_worked_example_preset_passes(capsys):
    code, rep = _invoke(capsys, ["theta", "--preset", "paper-example", "--N", "64", "--ladder", "64", "--checks", "all"])
    assert code == 0, [c for c in rep["checks"] if not c["pass"]]


def test_failing_check_exits_one(capsys):
    cfg = {"schema": 1, "command": "theta", "preset": "paper-example",
           "parameters": {"N": 64, "ladder": [64], "tolerances": {"inner": 1e-30}}}
    status, payload, _ = run(cfg)
    assert status == 1 and not payload["pass"]
    failed = [c["name"] for c in payload["checks"] if not c["pass"]]
    assert failed == ["inner_column.deviation"]


def test_closability_probe(capsys):
    code, rep = _invoke(capsys, ["probe", "closability", "--scenario", "poly-vs-outer", "--eps", "1e-2", "--g", "one"])
    assert code == 0
    assert rep["details"]["degrees"]["n"] <= 40


@pytest.mark.parametrize(
    "argv",
    [
        ["factor", "--poly", "1", "--M", "1000"],
        ["factor"],
        ["theta", "--preset", "shift", "--N", "16"],
        ["probe", "closability"],
        ["model", "--zeros", "1.5"],
        ["theta", "--preset", "no-such-thing"],
    ],
)
def test_configuration_errors_exit_two(capsys, argv):
    code, rep = _invoke(capsys, argv)
    assert code == 2
    assert set(rep["error"]) == {"type", "message", "details"}


def test_unknown_key_rejected(tmp_path, capsys):
    p = tmp_path / "cfg.json"
    p.write_text(json.dumps({"schema": 1, "command": "factor", "parameters": {"poly": [1], "bogus": 1}}))
    code, rep = _invoke(capsys, ["factor", "--config", str(p)])
    assert code == 2 and rep["error"]["details"][0]["path"] == ["parameters"]
    with pytest.raises(ConfigError):
        resolve_config({"schema": 2, "command": "factor", "parameters": {"poly": [1]}})


def test_reports_are_byte_identical(tmp_path, capsys):
    outs = []
    for i in range(2):
        out = tmp_path / f"r{i}" / "report.json"
        assert main(["model", "--zeros", "0.5,-0.3", "--N", "64", "--out", str(out)]) == 0
        capsys.readouterr()
        outs.append(out)
    a, b = (o.read_text() for o in outs)
    assert a.replace("r0", "r1") == b
    rows = list(csv.reader(io.StringIO(outs[0].with_suffix(".csv").read_text())))
    assert rows[0] == ["name", "N", "value", "tolerance", "pass"]
    assert len(rows) == len(json.loads(a)["checks"]) + 1
    prov = json.loads((outs[0].parent / "report.json.provenance.json").read_text())
    assert prov["tool"] == "hardylab" and "created" in prov
    assert "created" not in a


def test_presets_catalog(capsys):
    code, rep = _invoke(capsys, ["presets"])
    names = [p["name"] for p in rep["presets"]]
    assert code == 0 and names == sorted(names)
    assert {"paper-example", "shift", "common-factor-z", "poly-vs-outer-exp"} <= set(names)
    assert [p["name"] for p in list_presets()] == names


@pytest.mark.parametrize("name", preset_names())
def test_every_preset_validates(name):
    cfg = resolve_config(preset_config(name))
    assert cfg["preset"] == name


def test_thread_env_does_not_change_report(monkeypatch):
    cfg = {"schema": 1, "command": "theta", "preset": "shift", "parameters": {"N": 64, "ladder": [32, 64]}}
    monkeypatch.setenv("HARDYLAB_THREADS", "1")
    _, serial, _ = run(cfg)
    monkeypatch.setenv("HARDYLAB_THREADS", "3")
    _, threaded, _ = run(cfg)
    assert serial == threaded
