"""Scenario files, built-in presets and the replicate runner."""

from __future__ import annotations

import csv
import dataclasses
import hashlib
import io
import json
import math
import statistics
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterable, Mapping

import yaml

from .adr import STRATEGIES
from .channel import ChannelParams
from .configspace import NAMED_DIMENSIONS, ConfigDimensions, ConfigSpaceError
from .mobility import MOBILITY_MODES
from .phy import AIRTIME_MODES, PhyError, RadioConstants
from .sim import (
    BASELINE_INITIAL_MODES,
    LITE_FEEDBACK_MODES,
    SimParams,
    attempts_csv,
    decisions_csv,
    run,
)

PRESETS = ("scenario1", "scenario2", "scenario3", "scenario4")
SWEEP_VARIABLES = ("num_eds", "sigma_db", "none")
DAY_S = 86_400.0

SIGMA_SWEEP = (0.0, 0.89, 1.78, 2.67, 3.56, 4.46, 5.36, 6.24, 7.08)
ED_SWEEP = (100, 200, 300, 400, 500, 600, 700)
DESK_ED_SWEEP = (100, 300)


class ScenarioError(ValueError):
    """Invalid scenario; the message starts with the offending field path."""


@dataclass(frozen=True)
class NetworkSection:
    cell_side_m: float = 9800.0
    num_eds: int = 100
    gateway_position: tuple[float, float] | None = None


@dataclass(frozen=True)
class TrafficSection:
    payload_bytes: int = 20
    mean_interval_s: float = 1000.0
    downlink_payload_bytes: int = 13
    rx_delay_s: float = 1.0
    duty_cycle: float | None = None


@dataclass(frozen=True)
class MobilitySection:
    mode: str = "static"
    speed_mean_mps: float = 2.5
    speed_max_mps: float = 5.0


@dataclass(frozen=True)
class StrategySection:
    names: tuple[str, ...] = STRATEGIES
    device_margin_db: float = 10.0
    history_window: int = 20
    baseline_initial: str = "random"
    lite_feedback: str = "frame-counter"


@dataclass(frozen=True)
class SweepSection:
    variable: str = "none"
    values: tuple[float, ...] = ()


@dataclass(frozen=True)
class RunSection:
    horizon_s: float = 12 * DAY_S
    replicates: int = 25
    seed: int = 1
    airtime_mode: str = "literal"


@dataclass(frozen=True)
class ScenarioSpec:
    name: str = "custom"
    preset: str = "custom"
    network: NetworkSection = field(default_factory=NetworkSection)
    channel: ChannelParams = field(default_factory=ChannelParams)
    traffic: TrafficSection = field(default_factory=TrafficSection)
    mobility: MobilitySection = field(default_factory=MobilitySection)
    strategy: StrategySection = field(default_factory=StrategySection)
    radio: RadioConstants = field(default_factory=RadioConstants)
    config_spaces: tuple[tuple[str, ConfigDimensions], ...] = (("config-1", NAMED_DIMENSIONS["config-1"]),)
    sweep: SweepSection = field(default_factory=SweepSection)
    run: RunSection = field(default_factory=RunSection)

    def sweep_values(self) -> tuple:
        if self.sweep.variable == "none":
            return (None,)
        return self.sweep.values

    def sim_params(self, strategy: str, space_name: str, sweep_value: Any) -> SimParams:
        dims = dict(self.config_spaces)[space_name]
        num_eds = self.network.num_eds
        channel = self.channel
        if self.sweep.variable == "num_eds":
            num_eds = int(sweep_value)
        elif self.sweep.variable == "sigma_db":
            channel = dataclasses.replace(channel, sigma_db=float(sweep_value))
        return SimParams(
            num_eds=num_eds,
            horizon_s=self.run.horizon_s,
            cell_side_m=self.network.cell_side_m,
            gateway_position=self.network.gateway_position,
            strategy=strategy,
            dims=dims,
            channel=channel,
            radio=self.radio,
            airtime_mode=self.run.airtime_mode,
            mean_interval_s=self.traffic.mean_interval_s,
            mobility=self.mobility.mode,
            speed_mean_mps=self.mobility.speed_mean_mps,
            speed_max_mps=self.mobility.speed_max_mps,
            device_margin_db=self.strategy.device_margin_db,
            history_window=self.strategy.history_window,
            baseline_initial=self.strategy.baseline_initial,
            lite_feedback=self.strategy.lite_feedback,
            rx_delay_s=self.traffic.rx_delay_s,
            downlink_payload_len=self.traffic.downlink_payload_bytes,
            duty_cycle=self.traffic.duty_cycle,
        )

    def to_dict(self) -> dict:
        def plain(section) -> dict:
            out = {}
            for f in dataclasses.fields(section):
                v = getattr(section, f.name)
                out[f.name] = list(v) if isinstance(v, tuple) else v
            return out

        return {
            "scenario": {"name": self.name, "preset": self.preset},
            "network": plain(self.network),
            "channel": plain(self.channel),
            "traffic": plain(self.traffic),
            "mobility": plain(self.mobility),
            "strategy": plain(self.strategy),
            "radio": {k: v for k, v in self.radio.to_dict().items() if k != "payload_len"},
            "config_spaces": {name: dims.to_dict() for name, dims in self.config_spaces},
            "sweep": plain(self.sweep),
            "run": plain(self.run),
        }

    def to_yaml(self) -> str:
        return yaml.safe_dump(self.to_dict(), sort_keys=False)


# -- loading -------------------------------------------------------------


def _coerce(value: Any, default: Any, path: str) -> Any:
    try:
        if isinstance(default, bool):
            if not isinstance(value, bool):
                raise TypeError
            return value
        if isinstance(default, int) and not isinstance(default, bool):
            if isinstance(value, bool) or float(value) != int(value):
                raise TypeError
            return int(value)
        if isinstance(default, float):
            if isinstance(value, bool):
                raise TypeError
            return float(value)
        if isinstance(default, str):
            if not isinstance(value, str):
                raise TypeError
            return value
        if isinstance(default, tuple):
            if not isinstance(value, (list, tuple)):
                raise TypeError
            return tuple(value)
    except (TypeError, ValueError):
        raise ScenarioError(f"{path}: expected {type(default).__name__}, got {value!r}") from None
    return value


def _section(cls, data: Any, path: str, **overrides):
    if data is None:
        data = {}
    if not isinstance(data, Mapping):
        raise ScenarioError(f"{path}: expected a mapping")
    defaults = cls()
    names = {f.name for f in dataclasses.fields(cls)}
    unknown = sorted(set(data) - names)
    if unknown:
        raise ScenarioError(f"{path}.{unknown[0]}: unknown key (allowed: {', '.join(sorted(names))})")
    kwargs = {}
    for key, value in data.items():
        default = getattr(defaults, key)
        if value is None or default is None:
            kwargs[key] = value
        else:
            kwargs[key] = _coerce(value, default, f"{path}.{key}")
    kwargs.update(overrides)
    try:
        return cls(**kwargs)
    except (ValueError, TypeError) as exc:
        raise ScenarioError(f"{path}: {exc}") from None


def _check_choice(value: Any, legal: Iterable, path: str) -> None:
    legal = tuple(legal)
    if value not in legal:
        raise ScenarioError(f"{path}: {value!r} not in {list(legal)}")


def scenario_from_dict(data: Mapping) -> ScenarioSpec:
    if not isinstance(data, Mapping):
        raise ScenarioError("<root>: expected a mapping")
    allowed = {"scenario", "network", "channel", "traffic", "mobility", "strategy", "radio", "config_spaces", "sweep", "run"}
    unknown = sorted(set(data) - allowed)
    if unknown:
        raise ScenarioError(f"{unknown[0]}: unknown section (allowed: {', '.join(sorted(allowed))})")

    head = data.get("scenario") or {}
    extra = sorted(set(head) - {"name", "preset"})
    if extra:
        raise ScenarioError(f"scenario.{extra[0]}: unknown key")
    preset = str(head.get("preset", "custom"))
    _check_choice(preset, PRESETS + ("custom",), "scenario.preset")

    net_raw = dict(data.get("network") or {})
    gw = net_raw.pop("gateway_position", None)
    network = _section(NetworkSection, net_raw, "network")
    if gw is not None:
        if not isinstance(gw, (list, tuple)) or len(gw) != 2:
            raise ScenarioError("network.gateway_position: expected [x, y]")
        network = dataclasses.replace(network, gateway_position=(float(gw[0]), float(gw[1])))
    if network.num_eds < 0:
        raise ScenarioError("network.num_eds: must be >= 0")
    if network.cell_side_m <= 0:
        raise ScenarioError("network.cell_side_m: must be > 0")

    channel = _section(ChannelParams, data.get("channel"), "channel")
    traffic = _section(TrafficSection, data.get("traffic"), "traffic")
    if traffic.mean_interval_s <= 0:
        raise ScenarioError("traffic.mean_interval_s: must be > 0")
    if traffic.duty_cycle is not None:
        traffic = dataclasses.replace(traffic, duty_cycle=float(traffic.duty_cycle))
        if not 0 < traffic.duty_cycle <= 1:
            raise ScenarioError("traffic.duty_cycle: must be in (0, 1]")

    mobility = _section(MobilitySection, data.get("mobility"), "mobility")
    _check_choice(mobility.mode, MOBILITY_MODES, "mobility.mode")
    if not 0 < mobility.speed_max_mps <= 5.0:
        raise ScenarioError("mobility.speed_max_mps: must be in (0, 5]")

    strategy = _section(StrategySection, data.get("strategy"), "strategy")
    if not strategy.names:
        raise ScenarioError("strategy.names: at least one strategy is required")
    for i, name in enumerate(strategy.names):
        _check_choice(name, STRATEGIES, f"strategy.names[{i}]")
    _check_choice(strategy.baseline_initial, BASELINE_INITIAL_MODES, "strategy.baseline_initial")
    _check_choice(strategy.lite_feedback, LITE_FEEDBACK_MODES, "strategy.lite_feedback")
    if strategy.history_window < 1:
        raise ScenarioError("strategy.history_window: must be >= 1")

    radio_raw = dict(data.get("radio") or {})
    if "payload_len" in radio_raw:
        raise ScenarioError("radio.payload_len: set the frame size with traffic.payload_bytes")
    if traffic.payload_bytes < 1:
        raise ScenarioError("traffic.payload_bytes: must be >= 1")
    try:
        radio = RadioConstants.from_dict({**radio_raw, "payload_len": traffic.payload_bytes})
    except (PhyError, TypeError) as exc:
        raise ScenarioError(f"radio: {exc}") from None

    spaces_raw = data.get("config_spaces")
    if spaces_raw is None:
        spaces = (("config-1", NAMED_DIMENSIONS["config-1"]),)
    else:
        if not isinstance(spaces_raw, Mapping) or not spaces_raw:
            raise ScenarioError("config_spaces: expected a non-empty mapping of name -> dimensions")
        spaces = []
        for name, dims in spaces_raw.items():
            if isinstance(dims, str):
                if dims not in NAMED_DIMENSIONS:
                    raise ScenarioError(f"config_spaces.{name}: unknown named space {dims!r}")
                spaces.append((str(name), NAMED_DIMENSIONS[dims]))
                continue
            if not isinstance(dims, Mapping):
                raise ScenarioError(f"config_spaces.{name}: expected a mapping")
            for key in dims:
                try:
                    ConfigDimensions.from_dict({key: dims[key]})
                except ConfigSpaceError as exc:
                    raise ScenarioError(f"config_spaces.{name}.{key}: {exc}") from None
                except (TypeError, ValueError) as exc:
                    raise ScenarioError(f"config_spaces.{name}.{key}: {exc}") from None
            spaces.append((str(name), ConfigDimensions.from_dict(dims)))
        spaces = tuple(spaces)

    sweep = _section(SweepSection, data.get("sweep"), "sweep")
    _check_choice(sweep.variable, SWEEP_VARIABLES, "sweep.variable")
    if sweep.variable == "num_eds":
        vals = tuple(int(_coerce(v, 0, "sweep.values")) for v in sweep.values)
        if any(v < 0 for v in vals):
            raise ScenarioError("sweep.values: ED counts must be >= 0")
        sweep = dataclasses.replace(sweep, values=vals)
    elif sweep.variable == "sigma_db":
        vals = tuple(float(_coerce(v, 0.0, "sweep.values")) for v in sweep.values)
        if any(v < 0 for v in vals):
            raise ScenarioError("sweep.values: sigma must be >= 0")
        sweep = dataclasses.replace(sweep, values=vals)
    if sweep.variable != "none" and not sweep.values:
        raise ScenarioError("sweep.values: must not be empty")

    run_sec = _section(RunSection, data.get("run"), "run")
    _check_choice(run_sec.airtime_mode, AIRTIME_MODES, "run.airtime_mode")
    if run_sec.horizon_s <= 0:
        raise ScenarioError("run.horizon_s: must be > 0")
    if run_sec.replicates < 1:
        raise ScenarioError("run.replicates: must be >= 1")

    return ScenarioSpec(
        name=str(head.get("name", preset)),
        preset=preset,
        network=network,
        channel=channel,
        traffic=traffic,
        mobility=mobility,
        strategy=strategy,
        radio=radio,
        config_spaces=spaces,
        sweep=sweep,
        run=run_sec,
    )


def preset(name: str, desk_scale: bool = False) -> ScenarioSpec:
    """Built-in scenario; ``desk_scale`` shortens horizon and replicate count."""
    if name not in PRESETS:
        raise ScenarioError(f"scenario.preset: {name!r} not in {list(PRESETS)}")
    base = ScenarioSpec(name=name, preset=name)
    if name in ("scenario1", "scenario2"):
        spec = dataclasses.replace(base, sweep=SweepSection("num_eds", ED_SWEEP))
        if name == "scenario2":
            spec = dataclasses.replace(spec, mobility=MobilitySection(mode="random_waypoint"))
    elif name == "scenario3":
        spec = dataclasses.replace(base, sweep=SweepSection("sigma_db", SIGMA_SWEEP))
    else:
        spec = dataclasses.replace(
            base,
            strategy=StrategySection(names=("adr-lite",)),
            config_spaces=tuple(NAMED_DIMENSIONS.items()),
            sweep=SweepSection("num_eds", ED_SWEEP),
            run=RunSection(horizon_s=120 * DAY_S),
        )
    if desk_scale:
        spec = to_desk_scale(spec)
    return spec


def to_desk_scale(spec: ScenarioSpec) -> ScenarioSpec:
    run_sec = dataclasses.replace(spec.run, horizon_s=DAY_S, replicates=5)
    sweep = spec.sweep
    if sweep.variable == "num_eds":
        sweep = SweepSection("num_eds", DESK_ED_SWEEP)
    return dataclasses.replace(spec, run=run_sec, sweep=sweep)


def load_scenario(source: str | Path, desk_scale: bool = False) -> ScenarioSpec:
    """Load a preset by name or a YAML scenario file."""
    if str(source) in PRESETS:
        return preset(str(source), desk_scale)
    path = Path(source)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ScenarioError(f"{path}: cannot read scenario ({exc.strerror})") from None
    spec = scenario_from_dict(yaml.safe_load(text) or {})
    return to_desk_scale(spec) if desk_scale else spec


# -- running -------------------------------------------------------------


def derive_seed(master: int, *labels: Any) -> list[int]:
    """Entropy words for a stream identified by ``labels`` under ``master``."""
    digest = hashlib.sha256(repr((int(master),) + tuple(labels)).encode()).digest()
    return [int(master) & 0xFFFFFFFF] + [int.from_bytes(digest[i : i + 4], "little") for i in range(0, 16, 4)]


def _sweep_key(variable: str, value: Any) -> str:
    return f"{variable}={value!r}"


RESULT_COLUMNS = (
    "scenario", "strategy", "config_space", "k_size", "sweep_variable", "sweep_value",
    "replicate", "num_eds", "sigma", "mobility", "airtime_mode", "lite_feedback",
    "packets_sent", "packets_received", "pdr", "total_energy_j", "ec_j", "status",
)

SUMMARY_COLUMNS = (
    "strategy", "config_space", "sweep_variable", "sweep_value", "replicates",
    "pdr_mean", "pdr_ci95_normal", "ec_mean_j", "ec_ci95_normal_j", "failed",
)


@dataclass(frozen=True)
class _Cell:
    spec: ScenarioSpec
    strategy: str
    space_name: str
    sweep_value: Any
    replicate: int
    trace_dir: str | None = None


def _fmt(v: Any) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _run_cell(cell: _Cell) -> dict:
    spec = cell.spec
    params = spec.sim_params(cell.strategy, cell.space_name, cell.sweep_value)
    key = _sweep_key(spec.sweep.variable, cell.sweep_value)
    row = {
        "scenario": spec.name,
        "strategy": cell.strategy,
        "config_space": cell.space_name,
        "k_size": params.dims.size,
        "sweep_variable": spec.sweep.variable,
        "sweep_value": cell.sweep_value,
        "replicate": cell.replicate,
        "num_eds": params.num_eds,
        "sigma": params.channel.sigma_db,
        "mobility": params.mobility,
        "airtime_mode": params.airtime_mode,
        "lite_feedback": params.lite_feedback if cell.strategy == "adr-lite" else "",
        "packets_sent": None,
        "packets_received": None,
        "pdr": None,
        "total_energy_j": None,
        "ec_j": None,
        "status": "ok",
    }
    try:
        placement = derive_seed(spec.run.seed, "placement", key, cell.replicate)
        seed = derive_seed(spec.run.seed, "run", cell.strategy, cell.space_name, key, cell.replicate)
        result = run(params, seed=seed, placement_seed=placement, keep_log=cell.trace_dir is not None)
    except Exception as exc:  # one bad cell must not abort the sweep
        row["status"] = f"failed: {type(exc).__name__}: {exc}"
        return row
    m = result.metrics
    row.update(
        packets_sent=m.packets_sent,
        packets_received=m.packets_received,
        pdr=m.pdr,
        total_energy_j=m.total_energy_j,
        ec_j=m.ec,
    )
    if cell.trace_dir is not None:
        stem = f"{cell.strategy}_{cell.space_name}_{spec.sweep.variable}-{cell.sweep_value}_r{cell.replicate}"
        out = Path(cell.trace_dir)
        (out / f"{stem}_attempts.csv").write_text(
            attempts_csv(result.attempts, params.channel.noise_figure_db), encoding="utf-8"
        )
        (out / f"{stem}_decisions.csv").write_text(decisions_csv(result.decisions), encoding="utf-8")
    return row


def _ci95(values: list[float]) -> float | None:
    if len(values) < 2:
        return None
    return 1.96 * statistics.stdev(values) / math.sqrt(len(values))


@dataclass
class ResultTable:
    scenario: str
    sweep_variable: str
    rows: list[dict]
    replicate_rows: list[dict]

    @property
    def failures(self) -> list[dict]:
        return [r for r in self.replicate_rows if r["status"] != "ok"]

    def series(self) -> list[tuple[str, str]]:
        seen: list[tuple[str, str]] = []
        for r in self.rows:
            k = (r["strategy"], r["config_space"])
            if k not in seen:
                seen.append(k)
        return seen

    def lookup(self, strategy: str, sweep_value: Any = None, config_space: str | None = None) -> dict:
        for r in self.rows:
            if r["strategy"] == strategy and r["sweep_value"] == sweep_value and (
                config_space is None or r["config_space"] == config_space
            ):
                return r
        raise KeyError((strategy, sweep_value, config_space))

    def replicates_for(self, strategy: str, sweep_value: Any = None) -> list[dict]:
        return [
            r for r in self.replicate_rows
            if r["strategy"] == strategy and r["sweep_value"] == sweep_value and r["status"] == "ok"
        ]

    def results_csv(self) -> str:
        return _to_csv(RESULT_COLUMNS, self.replicate_rows)

    def summary_csv(self) -> str:
        return _to_csv(SUMMARY_COLUMNS, self.rows)


def _to_csv(columns: Iterable[str], rows: Iterable[dict]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for r in rows:
        writer.writerow([_fmt(r[c]) for c in columns])
    return buf.getvalue()


def aggregate(spec: ScenarioSpec, replicate_rows: list[dict]) -> ResultTable:
    order = {v: i for i, v in enumerate(spec.sweep_values())}
    space_order = {name: i for i, (name, _) in enumerate(spec.config_spaces)}
    groups: dict[tuple, list[dict]] = {}
    for r in replicate_rows:
        groups.setdefault((r["strategy"], r["config_space"], r["sweep_value"]), []).append(r)
    rows = []
    for (strategy, space, value), members in groups.items():
        ok = [m for m in members if m["status"] == "ok"]
        pdrs = [m["pdr"] for m in ok if m["pdr"] is not None]
        ecs = [m["ec_j"] for m in ok if m["ec_j"] is not None]
        rows.append({
            "strategy": strategy,
            "config_space": space,
            "sweep_variable": spec.sweep.variable,
            "sweep_value": value,
            "replicates": len(ok),
            "pdr_mean": statistics.fmean(pdrs) if pdrs else None,
            "pdr_ci95_normal": _ci95(pdrs),
            "ec_mean_j": statistics.fmean(ecs) if ecs else None,
            "ec_ci95_normal_j": _ci95(ecs),
            "failed": len(members) - len(ok),
        })
    rows.sort(key=lambda r: (r["strategy"], space_order[r["config_space"]], order[r["sweep_value"]]))
    replicate_rows = sorted(
        replicate_rows,
        key=lambda r: (r["strategy"], space_order[r["config_space"]], order[r["sweep_value"]], r["replicate"]),
    )
    return ResultTable(spec.name, spec.sweep.variable, rows, replicate_rows)


def run_scenario(
    spec: ScenarioSpec,
    out_dir: str | Path | None = None,
    jobs: int = 1,
    trace: bool = False,
) -> ResultTable:
    """Run every (strategy, space, sweep value, replicate) cell and aggregate."""
    if not spec.strategy.names:
        raise ScenarioError("strategy.names: at least one strategy is required")
    trace_dir = None
    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        if trace:
            (out / "traces").mkdir(exist_ok=True)
            trace_dir = str(out / "traces")
    cells = [
        _Cell(spec, strategy, space_name, value, rep, trace_dir)
        for strategy in spec.strategy.names
        for space_name, _ in spec.config_spaces
        for value in spec.sweep_values()
        for rep in range(spec.run.replicates)
    ]
    if jobs > 1 and len(cells) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(_run_cell, cells, chunksize=1))
    else:
        rows = [_run_cell(c) for c in cells]
    table = aggregate(spec, rows)
    if out_dir is not None:
        write_outputs(spec, table, Path(out_dir))
    return table


def write_outputs(spec: ScenarioSpec, table: ResultTable, out: Path) -> None:
    out.mkdir(parents=True, exist_ok=True)
    (out / "scenario.yaml").write_text(spec.to_yaml(), encoding="utf-8")
    (out / "results.csv").write_text(table.results_csv(), encoding="utf-8")
    (out / "summary.csv").write_text(table.summary_csv(), encoding="utf-8")
    emit_plot_data(table, out)
    manifest = out / "failures.json"
    if table.failures:
        manifest.write_text(json.dumps(table.failures, indent=2, default=str), encoding="utf-8")
    elif manifest.exists():
        manifest.unlink()


AXIS_LABELS = {
    "num_eds": "number of EDs [count]",
    "sigma_db": "shadowing sigma [dB]",
    "none": "run [-]",
}


def plot_data_text(table: ResultTable) -> str:
    if not table.rows:
        raise ValueError("cannot emit plot data for an empty table")
    series = table.series()
    xs: list = []
    for r in table.rows:
        if r["sweep_value"] not in xs:
            xs.append(r["sweep_value"])
    multi_space = len({space for _, space in series}) > 1
    labels = [f"{s}@{sp}" if multi_space else s for s, sp in series]
    lines = [
        f"# scenario: {table.scenario}",
        f"# x: {AXIS_LABELS[table.sweep_variable]}",
        "# pdr_<series>: mean packet delivery ratio [-]",
        "# ec_<series>: mean total transmit energy divided by PDR [J]",
        "# means over replicates; confidence intervals are in summary.csv",
        " ".join(["x"] + [f"pdr_{l} ec_{l}" for l in labels]),
    ]
    for x in xs:
        cols = ["0" if x is None else _fmt(x)]
        for strategy, space in series:
            try:
                r = table.lookup(strategy, x, space)
            except KeyError:
                cols += ["nan", "nan"]
                continue
            cols.append("nan" if r["pdr_mean"] is None else f"{r['pdr_mean']:.6f}")
            cols.append("nan" if r["ec_mean_j"] is None else f"{r['ec_mean_j']:.6f}")
        lines.append(" ".join(cols))
    return "\n".join(lines) + "\n"


def emit_plot_data(table: ResultTable, out_dir: str | Path) -> Path:
    path = Path(out_dir) / f"plot_{table.scenario}.dat"
    try:
        path.write_text(plot_data_text(table), encoding="utf-8")
    except OSError as exc:
        raise OSError(f"{path}: {exc.strerror}") from exc
    return path

