import csv
import io

import yaml

from adrlite.cli import main

TINY = {
    "scenario": {"name": "cli"},
    "network": {"num_eds": 5},
    "strategy": {"names": ["adr-lite", "no-adr"]},
    "run": {"horizon_s": 3600.0, "replicates": 2},
}


def test_dump_space(capsys):
    assert main(["dump-space", "--dims", "config-1"]) == 0
    rows = list(csv.DictReader(io.StringIO(capsys.readouterr().out)))
    assert len(rows) == 30
    assert (rows[0]["sf"], rows[0]["tp"]) == ("7", "2")
    assert (rows[-1]["sf"], rows[-1]["tp"]) == ("12", "14")


def test_dump_space_modes_differ(capsys):
    main(["dump-space", "--dims", "sf=7;tp=14"])
    literal = capsys.readouterr().out
    main(["dump-space", "--dims", "sf=7;tp=14", "--airtime-mode", "semtech"])
    assert capsys.readouterr().out != literal


def test_bad_dims_exit_code(capsys):
    assert main(["dump-space", "--dims", "tp=3"]) == 2
    assert "tp_values" in capsys.readouterr().err


def test_validate_echoes_defaults(tmp_path, capsys):
    path = tmp_path / "s.yaml"
    path.write_text(yaml.safe_dump(TINY))
    assert main(["validate", "--scenario", str(path)]) == 0
    echoed = yaml.safe_load(capsys.readouterr().out)
    assert echoed["channel"]["sigma_db"] == 7.08
    assert echoed["network"]["num_eds"] == 5


def test_validate_reports_field(tmp_path, capsys):
    path = tmp_path / "s.yaml"
    path.write_text(yaml.safe_dump({"config_spaces": {"a": {"tp": [3]}}}))
    assert main(["validate", "--scenario", str(path)]) == 2
    assert "config_spaces.a.tp" in capsys.readouterr().err


def test_run_writes_outputs(tmp_path, capsys):
    path = tmp_path / "s.yaml"
    path.write_text(yaml.safe_dump(TINY))
    out = tmp_path / "out"
    assert main(["run", "--scenario", str(path), "--out", str(out), "--seed", "3", "--ideal-downlink"]) == 0
    assert "pdr_mean" in capsys.readouterr().out
    echoed = yaml.safe_load((out / "scenario.yaml").read_text())
    assert echoed["run"]["seed"] == 3
    assert echoed["channel"]["ideal_downlink"] is True


def test_constants_override(tmp_path, capsys):
    consts = tmp_path / "c.yaml"
    consts.write_text(yaml.safe_dump({"p_on_mcu_w": 1.0}))
    main(["dump-space", "--dims", "sf=7;tp=2"])
    base = list(csv.DictReader(io.StringIO(capsys.readouterr().out)))[0]
    main(["dump-space", "--dims", "sf=7;tp=2", "--constants", str(consts)])
    heavy = list(csv.DictReader(io.StringIO(capsys.readouterr().out)))[0]
    assert float(heavy["energy_j"]) > float(base["energy_j"])
    assert heavy["toa_s"] == base["toa_s"]
