import csv
import io
import json

import pytest
import yaml

from adrlite import scenario as sc
from adrlite.scenario import (
    ED_SWEEP,
    SIGMA_SWEEP,
    ScenarioError,
    derive_seed,
    load_scenario,
    plot_data_text,
    preset,
    run_scenario,
    scenario_from_dict,
)

SMALL = {
    "scenario": {"name": "tiny"},
    "network": {"num_eds": 15},
    "strategy": {"names": ["adr-lite", "adr-max"]},
    "sweep": {"variable": "sigma_db", "values": [0.0, 7.08]},
    "run": {"horizon_s": 7200.0, "replicates": 3, "seed": 4},
}


def test_presets():
    s3 = preset("scenario3")
    assert s3.sweep.values == SIGMA_SWEEP and len(SIGMA_SWEEP) == 9
    assert s3.network.num_eds == 100 and s3.mobility.mode == "static"
    s2 = preset("scenario2")
    assert s2.mobility.mode == "random_waypoint" and s2.sweep.values == ED_SWEEP
    s4 = preset("scenario4")
    assert [d.size for _, d in s4.config_spaces] == [30, 90, 120, 360]
    assert s4.strategy.names == ("adr-lite",)
    desk = preset("scenario1", desk_scale=True)
    assert desk.run.horizon_s == 86_400.0 and desk.run.replicates == 5
    with pytest.raises(ScenarioError):
        preset("scenario9")


@pytest.mark.parametrize("name", sc.PRESETS)
def test_echo_round_trip(name):
    spec = preset(name)
    assert scenario_from_dict(yaml.safe_load(spec.to_yaml())) == spec


def test_defaults_filled_in():
    spec = scenario_from_dict({})
    assert spec.channel.sigma_db == 7.08
    assert spec.radio.payload_len == 20
    assert spec.traffic.mean_interval_s == 1000.0


@pytest.mark.parametrize(
    "doc, field",
    [
        ({"config_spaces": {"x": {"tp": [2, 3]}}}, "config_spaces.x.tp"),
        ({"network": {"num_eds": "many"}}, "network.num_eds"),
        ({"channel": {"sigmaa": 1.0}}, "channel.sigmaa"),
        ({"strategy": {"names": []}}, "strategy.names"),
        ({"strategy": {"names": ["adr-owa"]}}, "strategy.names[0]"),
        ({"mobility": {"speed_max_mps": 9}}, "mobility.speed_max_mps"),
        ({"radio": {"payload_len": 30}}, "radio.payload_len"),
        ({"sweep": {"variable": "num_eds", "values": []}}, "sweep.values"),
        ({"run": {"replicates": 0}}, "run.replicates"),
        ({"run": {"airtime_mode": "fast"}}, "run.airtime_mode"),
        ({"bogus": {}}, "bogus"),
    ],
)
def test_validation_names_the_field(doc, field):
    with pytest.raises(ScenarioError) as err:
        scenario_from_dict(doc)
    assert str(err.value).startswith(field)


def test_tp_error_lists_legal_values():
    with pytest.raises(ScenarioError) as err:
        scenario_from_dict({"config_spaces": {"x": {"tp": [3]}}})
    assert "[2, 5, 8, 11, 14]" in str(err.value)


def test_empty_strategy_list_rejected_at_run():
    import dataclasses

    spec = dataclasses.replace(preset("scenario1"), strategy=sc.StrategySection(names=()))
    with pytest.raises(ScenarioError):
        run_scenario(spec)


def test_load_file_and_missing_file(tmp_path):
    path = tmp_path / "s.yaml"
    path.write_text(yaml.safe_dump(SMALL))
    assert load_scenario(path).network.num_eds == 15
    assert load_scenario(path, desk_scale=True).run.replicates == 5
    with pytest.raises(ScenarioError):
        load_scenario(tmp_path / "nope.yaml")


def test_seed_derivation_is_label_based():
    assert derive_seed(1, "run", "a") == derive_seed(1, "run", "a")
    assert derive_seed(1, "run", "a") != derive_seed(1, "run", "b")
    assert derive_seed(1, "run", "a") != derive_seed(2, "run", "a")


def test_sweep_order_does_not_change_cells():
    a = run_scenario(scenario_from_dict(SMALL))
    flipped = dict(SMALL, sweep={"variable": "sigma_db", "values": [7.08, 0.0]})
    b = run_scenario(scenario_from_dict(flipped))
    key = lambda r: (r["strategy"], r["sweep_value"], r["replicate"])
    assert sorted(map(str, sorted(a.replicate_rows, key=key))) == sorted(map(str, sorted(b.replicate_rows, key=key)))


def test_outputs_and_summary(tmp_path):
    spec = scenario_from_dict(SMALL)
    table = run_scenario(spec, tmp_path, trace=True)
    for name in ("scenario.yaml", "results.csv", "summary.csv", "plot_tiny.dat"):
        assert (tmp_path / name).exists()
    assert not (tmp_path / "failures.json").exists()
    assert len(list((tmp_path / "traces").glob("*_attempts.csv"))) == 12
    rows = list(csv.DictReader(io.StringIO((tmp_path / "results.csv").read_text())))
    assert len(rows) == 2 * 2 * 3
    assert {r["airtime_mode"] for r in rows} == {"literal"}
    for r in table.rows:
        reps = table.replicates_for(r["strategy"], r["sweep_value"])
        pdrs = [x["pdr"] for x in reps]
        assert min(pdrs) <= r["pdr_mean"] <= max(pdrs)
        assert r["pdr_ci95_normal"] >= 0
    # rerun into a fresh directory gives identical bytes
    run_scenario(spec, tmp_path / "again")
    assert (tmp_path / "again" / "results.csv").read_bytes() == (tmp_path / "results.csv").read_bytes()
    assert scenario_from_dict(yaml.safe_load((tmp_path / "scenario.yaml").read_text())) == spec


def test_failed_cell_is_marked_not_fatal(tmp_path, monkeypatch):
    real = sc.run

    def flaky(params, **kw):
        if params.strategy == "adr-max" and params.channel.sigma_db > 0:
            raise RuntimeError("boom")
        return real(params, **kw)

    monkeypatch.setattr(sc, "run", flaky)
    table = run_scenario(scenario_from_dict(SMALL), tmp_path)
    assert len(table.failures) == 3
    assert all(f["status"].startswith("failed: RuntimeError") for f in table.failures)
    manifest = json.loads((tmp_path / "failures.json").read_text())
    assert len(manifest) == 3
    row = table.lookup("adr-max", 7.08)
    assert row["failed"] == 3 and row["pdr_mean"] is None
    assert table.lookup("adr-lite", 7.08)["replicates"] == 3


def test_parallel_matches_serial():
    spec = scenario_from_dict(SMALL)
    assert run_scenario(spec, jobs=2).results_csv() == run_scenario(spec).results_csv()


def test_plot_data_layout():
    table = run_scenario(scenario_from_dict(SMALL))
    lines = plot_data_text(table).splitlines()
    header = [l for l in lines if not l.startswith("#")]
    assert header[0] == "x pdr_adr-lite ec_adr-lite pdr_adr-max ec_adr-max"
    assert len(header) == 3
    assert header[1].split()[0] == "0.0"
    assert any("shadowing sigma [dB]" in l for l in lines)


def test_plot_data_single_row_and_empty():
    doc = dict(SMALL, strategy={"names": ["adr-lite"]}, sweep={"variable": "none"}, run={"horizon_s": 3600.0, "replicates": 1})
    table = run_scenario(scenario_from_dict(doc))
    data = [l for l in plot_data_text(table).splitlines() if not l.startswith("#")]
    assert len(data) == 2
    table.rows = []
    with pytest.raises(ValueError):
        plot_data_text(table)


def test_multi_space_series_labels():
    doc = {
        "network": {"num_eds": 5},
        "strategy": {"names": ["adr-lite"]},
        "config_spaces": {"config-1": "config-1", "config-3": "config-3"},
        "run": {"horizon_s": 3600.0, "replicates": 1},
    }
    table = run_scenario(scenario_from_dict(doc))
    header = [l for l in plot_data_text(table).splitlines() if not l.startswith("#")][0]
    assert "pdr_adr-lite@config-3" in header
    assert {r["k_size"] for r in table.replicate_rows} == {30, 120}
