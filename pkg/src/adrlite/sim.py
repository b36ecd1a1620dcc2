"""Discrete-event simulation of one LoRa cell with a single gateway.

One call to :func:`run` is a single replicate.  Everything random inside a
run comes from numpy streams spawned off the run seed, so a given
``(params, seed)`` pair always yields the same metrics and traces.

Timeline of one uplink::

    NEXT_TRANSMISSION  ED picks its config, pays E_ToA, frame goes on air
    UPLINK_END         gateway resolves the frame, NS runs its strategy
    DOWNLINK_START     receive window opens 1 s after the uplink ends
    DOWNLINK_END       ED applies (or misses) the assignment, then waits an
                       exponential interval before the next transmission
"""

from __future__ import annotations

import csv
import heapq
import io
import math
from dataclasses import dataclass, field, replace
from enum import IntEnum
from typing import Sequence

import numpy as np

from .adr import (
    STRATEGIES,
    AdrLiteState,
    SnrHistory,
    adr_avg_update,
    adr_lite_step,
    adr_max_update,
    no_adr_pick,
)
from .channel import (
    OK,
    ChannelParams,
    TransmissionAttempt,
    path_loss_db,
    received_power_dbm,
    reception_outcome,
    sample_shadowing,
    snr_db,
)
from .configspace import ConfigDimensions, ConfigSpace, build_space
from .mobility import (
    MOBILITY_MODES,
    RANDOM_WAYPOINT,
    MobilityState,
    uniform_point,
    waypoint_step,
)
from .phy import (
    AIRTIME_MODES,
    LoRaConfig,
    RadioConstants,
    energy_per_packet,
    format_cr,
    sensitivity,
    time_on_air,
)

# How ADR-Lite learns that an iteration produced no packet.
LITE_FEEDBACK_MODES = ("frame-counter", "reception")
BASELINE_INITIAL_MODES = ("random", "max")


class EventKind(IntEnum):
    UPLINK_END = 0
    DOWNLINK_START = 1
    DOWNLINK_END = 2
    NEXT_TRANSMISSION = 3
    WAYPOINT_ARRIVAL = 4


class SimulationError(RuntimeError):
    pass


@dataclass(frozen=True)
class SimParams:
    num_eds: int = 100
    horizon_s: float = 86_400.0
    cell_side_m: float = 9800.0
    gateway_position: tuple[float, float] | None = None
    strategy: str = "adr-lite"
    dims: ConfigDimensions = field(default_factory=ConfigDimensions)
    channel: ChannelParams = field(default_factory=ChannelParams)
    radio: RadioConstants = field(default_factory=RadioConstants)
    airtime_mode: str = "literal"
    mean_interval_s: float = 1000.0
    mobility: str = "static"
    speed_mean_mps: float = 2.5
    speed_max_mps: float = 5.0
    device_margin_db: float = 10.0
    history_window: int = 20
    baseline_initial: str = "random"
    lite_feedback: str = "frame-counter"
    rx_delay_s: float = 1.0
    downlink_payload_len: int = 13
    duty_cycle: float | None = None
    # Fixed ED positions override the uniform placement (tests, small studies).
    positions: tuple[tuple[float, float], ...] | None = None

    def validate(self) -> None:
        if self.num_eds < 0:
            raise ValueError("num_eds must be >= 0")
        if self.horizon_s <= 0:
            raise ValueError("horizon_s must be > 0")
        if self.cell_side_m <= 0:
            raise ValueError("cell_side_m must be > 0")
        if self.strategy not in STRATEGIES:
            raise ValueError(f"strategy {self.strategy!r} not in {STRATEGIES}")
        if self.airtime_mode not in AIRTIME_MODES:
            raise ValueError(f"airtime_mode {self.airtime_mode!r} not in {AIRTIME_MODES}")
        if self.mobility not in MOBILITY_MODES:
            raise ValueError(f"mobility {self.mobility!r} not in {MOBILITY_MODES}")
        if self.mean_interval_s <= 0:
            raise ValueError("mean_interval_s must be > 0")
        if not 0 < self.speed_max_mps <= 5.0 or self.speed_mean_mps <= 0:
            raise ValueError("speeds must lie in (0, 5] m/s")
        if self.history_window < 1:
            raise ValueError("history_window must be >= 1")
        if self.baseline_initial not in BASELINE_INITIAL_MODES:
            raise ValueError(f"baseline_initial must be one of {BASELINE_INITIAL_MODES}")
        if self.lite_feedback not in LITE_FEEDBACK_MODES:
            raise ValueError(f"lite_feedback must be one of {LITE_FEEDBACK_MODES}")
        if self.duty_cycle is not None and not 0 < self.duty_cycle <= 1:
            raise ValueError("duty_cycle must be in (0, 1]")
        if self.positions is not None:
            if len(self.positions) != self.num_eds:
                raise ValueError("positions must list one point per ED")
            for x, y in self.positions:
                if not (0 <= x <= self.cell_side_m and 0 <= y <= self.cell_side_m):
                    raise ValueError(f"position ({x}, {y}) outside the cell")


def next_transmission_delay(rng: np.random.Generator, mean_s: float = 1000.0) -> float:
    return float(rng.exponential(mean_s))


@dataclass
class Metrics:
    packets_sent: int = 0
    packets_received: int = 0
    total_energy_j: float = 0.0
    sent_by_ed: list[int] = field(default_factory=list)
    received_by_ed: list[int] = field(default_factory=list)
    energy_by_ed: list[float] = field(default_factory=list)

    @property
    def pdr(self) -> float | None:
        return compute_metrics(self.packets_sent, self.packets_received, self.total_energy_j)[0]

    @property
    def ec(self) -> float | None:
        return compute_metrics(self.packets_sent, self.packets_received, self.total_energy_j)[1]


def compute_metrics(sent: int, received: int, energy_j: float) -> tuple[float | None, float | None]:
    """PDR and energy per unit PDR; ``None`` where undefined."""
    if received > sent:
        raise ValueError("received cannot exceed sent")
    if sent == 0:
        return None, None
    pdr = received / sent
    if pdr == 0:
        return 0.0, None
    return pdr, energy_j / pdr


@dataclass(slots=True)
class EndDevice:
    ed_id: int
    mobility: MobilityState
    config: LoRaConfig
    index: int | None = None
    fcnt: int = 0
    energy_spent_j: float = 0.0
    sent: int = 0
    received: int = 0
    pending: object = None
    downlink_ok: bool = False
    last_end_s: float = 0.0
    last_toa_s: float = 0.0


@dataclass(slots=True)
class _ServerEntry:
    lite: AdrLiteState | None = None
    history: SnrHistory | None = None
    last_fcnt: int = -1


@dataclass
class RunResult:
    metrics: Metrics
    strategy: str
    airtime_mode: str
    space_size: int
    attempts: list[TransmissionAttempt] | None = None
    decisions: list[tuple] | None = None


class Simulation:
    def __init__(
        self,
        params: SimParams,
        seed: int | Sequence[int] = 0,
        placement_seed: int | Sequence[int] | None = None,
        space: ConfigSpace | None = None,
        keep_log: bool = False,
    ) -> None:
        params.validate()
        self.p = params
        self.space = space or build_space(params.dims, params.radio, params.airtime_mode)
        if self.space.airtime_mode != params.airtime_mode:
            raise ValueError("configuration space built with a different airtime mode")
        self.keep_log = keep_log
        self._dl_radio = replace(params.radio, payload_len=params.downlink_payload_len)
        # config -> (uplink airtime, uplink energy, downlink airtime)
        self._costs: dict[LoRaConfig, tuple[float, float, float]] = {}

        streams = np.random.SeedSequence(seed).spawn(5)
        self.rng_traffic = np.random.default_rng(streams[0])
        self.rng_shadow = np.random.default_rng(streams[1])
        self.rng_downlink = np.random.default_rng(streams[2])
        self.rng_mobility = np.random.default_rng(streams[3])
        self.rng_strategy = np.random.default_rng(streams[4])
        self.rng_place = np.random.default_rng(
            np.random.SeedSequence(seed if placement_seed is None else placement_seed)
        )

        side = params.cell_side_m
        self.gw = params.gateway_position or (side / 2.0, side / 2.0)
        self.now = 0.0
        self._queue: list[tuple[float, int, int, int]] = []
        self._seq = 0
        self._on_air: dict[tuple[float, int], list[TransmissionAttempt]] = {}
        self._in_flight: dict[int, TransmissionAttempt] = {}
        self.metrics = Metrics(
            sent_by_ed=[0] * params.num_eds,
            received_by_ed=[0] * params.num_eds,
            energy_by_ed=[0.0] * params.num_eds,
        )
        self.attempts: list[TransmissionAttempt] | None = [] if keep_log else None
        self.decisions: list[tuple] | None = [] if keep_log else None

        self.eds = [self._make_ed(i) for i in range(params.num_eds)]
        self.server = [self._make_server_entry() for _ in self.eds]

    # -- setup -----------------------------------------------------------

    def _make_ed(self, ed_id: int) -> EndDevice:
        p = self.p
        if p.positions is not None:
            pos = tuple(p.positions[ed_id])
        else:
            pos = uniform_point(self.rng_place, p.cell_side_m)
        mob = MobilityState.static(pos)
        if p.mobility == RANDOM_WAYPOINT:
            parked = MobilityState(mode=RANDOM_WAYPOINT, origin=pos, target=pos, arrival_s=0.0)
            mob = waypoint_step(parked, self.rng_mobility, p.cell_side_m, 0.0, p.speed_mean_mps, p.speed_max_mps)
            self._schedule(mob.arrival_s, EventKind.WAYPOINT_ARRIVAL, ed_id)

        index = None
        if p.strategy in ("adr-lite", "no-adr"):
            # No-ADR redraws before every frame; this start value is never sent.
            index = len(self.space)
            config = self.space.config_at(index)
        else:
            config = self._initial_baseline_config()
        ed = EndDevice(ed_id=ed_id, mobility=mob, config=config, index=index)
        self._schedule(next_transmission_delay(self.rng_traffic, p.mean_interval_s), EventKind.NEXT_TRANSMISSION, ed_id)
        return ed

    def _initial_baseline_config(self) -> LoRaConfig:
        dims = self.p.dims
        if self.p.baseline_initial == "max":
            sf, tp = max(dims.sf_values), max(dims.tp_values)
        else:
            sf = int(self.rng_strategy.choice(dims.sf_values))
            tp = int(self.rng_strategy.choice(dims.tp_values))
        return LoRaConfig(sf=sf, tp=tp, cf=dims.cf_values[0], cr=dims.cr_values[0], bw=dims.bw)

    def _make_server_entry(self) -> _ServerEntry:
        if self.p.strategy == "adr-lite":
            return _ServerEntry(lite=AdrLiteState.initial(len(self.space)))
        if self.p.strategy in ("adr-max", "adr-avg"):
            return _ServerEntry(history=SnrHistory(self.p.history_window))
        return _ServerEntry()

    # -- event loop ------------------------------------------------------

    def _schedule(self, time_s: float, kind: EventKind, ed_id: int) -> None:
        if time_s < self.now:
            raise SimulationError(f"event {kind.name} scheduled in the past ({time_s} < {self.now})")
        heapq.heappush(self._queue, (time_s, self._seq, int(kind), ed_id))
        self._seq += 1

    def run(self) -> RunResult:
        handlers = {
            EventKind.NEXT_TRANSMISSION: self._on_next_transmission,
            EventKind.UPLINK_END: self._on_uplink_end,
            EventKind.DOWNLINK_START: self._on_downlink_start,
            EventKind.DOWNLINK_END: self._on_downlink_end,
            EventKind.WAYPOINT_ARRIVAL: self._on_waypoint,
        }
        horizon = self.p.horizon_s
        droppable = (int(EventKind.NEXT_TRANSMISSION), int(EventKind.WAYPOINT_ARRIVAL))
        while self._queue:
            time_s, _, kind, ed_id = heapq.heappop(self._queue)
            if time_s < self.now:
                raise SimulationError("event queue went back in time")
            # Frames already on the air are allowed to finish past the horizon.
            if time_s >= horizon and kind in droppable:
                continue
            self.now = time_s
            handlers[kind](self.eds[ed_id])
        return RunResult(
            metrics=self.metrics,
            strategy=self.p.strategy,
            airtime_mode=self.p.airtime_mode,
            space_size=len(self.space),
            attempts=self.attempts,
            decisions=self.decisions,
        )

    def _cost(self, cfg: LoRaConfig) -> tuple[float, float, float]:
        cost = self._costs.get(cfg)
        if cost is None:
            p = self.p
            cost = (
                time_on_air(cfg, p.radio, p.airtime_mode),
                energy_per_packet(cfg, p.radio, p.airtime_mode),
                time_on_air(cfg, self._dl_radio, p.airtime_mode),
            )
            self._costs[cfg] = cost
        return cost

    def _distance(self, ed: EndDevice) -> float:
        return math.dist(ed.mobility.position(self.now), self.gw)

    def _on_waypoint(self, ed: EndDevice) -> None:
        p = self.p
        ed.mobility = waypoint_step(ed.mobility, self.rng_mobility, p.cell_side_m, self.now, p.speed_mean_mps, p.speed_max_mps)
        self._schedule(ed.mobility.arrival_s, EventKind.WAYPOINT_ARRIVAL, ed.ed_id)

    def _on_next_transmission(self, ed: EndDevice) -> None:
        p = self.p
        if p.strategy == "no-adr":
            ed.index = no_adr_pick(self.rng_strategy, len(self.space))
            ed.config = self.space.config_at(ed.index)
        cfg = ed.config
        toa, energy, _ = self._cost(cfg)
        shadow = sample_shadowing(self.rng_shadow, p.channel.sigma_db)
        rx = received_power_dbm(cfg.tp, self._distance(ed), shadow, p.channel)
        attempt = TransmissionAttempt(
            ed_id=ed.ed_id,
            config=cfg,
            start_s=self.now,
            end_s=self.now + toa,
            rx_power_dbm=rx,
            fcnt=ed.fcnt,
            config_index=ed.index,
            energy_j=energy,
        )
        ed.fcnt += 1
        ed.sent += 1
        ed.energy_spent_j += energy
        ed.last_toa_s = toa
        m = self.metrics
        m.packets_sent += 1
        m.total_energy_j += energy
        m.sent_by_ed[ed.ed_id] += 1
        m.energy_by_ed[ed.ed_id] += energy
        if self.attempts is not None:
            self.attempts.append(attempt)
        self._on_air.setdefault((cfg.cf, cfg.sf), []).append(attempt)
        self._in_flight[ed.ed_id] = attempt
        self._schedule(attempt.end_s, EventKind.UPLINK_END, ed.ed_id)

    def _on_uplink_end(self, ed: EndDevice) -> None:
        attempt = self._in_flight.pop(ed.ed_id)
        bucket = self._on_air[(attempt.config.cf, attempt.config.sf)]
        attempt.outcome = reception_outcome(attempt, bucket, self.p.channel.capture_threshold_db)
        self._prune(bucket)
        ed.pending = None
        if attempt.outcome == OK:
            ed.received += 1
            self.metrics.packets_received += 1
            self.metrics.received_by_ed[ed.ed_id] += 1
            ed.pending = self._server_decide(ed, attempt)
        ed.last_end_s = self.now
        self._schedule(self.now + self.p.rx_delay_s, EventKind.DOWNLINK_START, ed.ed_id)

    def _prune(self, bucket: list[TransmissionAttempt]) -> None:
        # Frames ending exactly now may not have been resolved yet.
        live = [a.start_s for a in bucket if a.end_s >= self.now]
        earliest = min(live) if live else math.inf
        bucket[:] = [a for a in bucket if a.end_s >= self.now or a.end_s > earliest]

    def _server_decide(self, ed: EndDevice, attempt: TransmissionAttempt) -> object:
        """Strategy step at the NS for a received frame; returns the downlink payload."""
        p = self.p
        entry = self.server[ed.ed_id]
        if p.strategy == "adr-lite":
            state = entry.lite
            branches = []
            if p.lite_feedback == "frame-counter":
                for _ in range(attempt.fcnt - entry.last_fcnt - 1):
                    state.k_prev, branch = adr_lite_step(state.k_prev, None, state.space_size)
                    branches.append(branch)
            entry.last_fcnt = attempt.fcnt
            state.k_prev, branch = adr_lite_step(state.k_prev, attempt.config_index, state.space_size)
            branches.append(branch)
            if self.decisions is not None:
                self.decisions.append(
                    (self.now, ed.ed_id, attempt.config_index, "+".join(branches), state.k_prev, None, None)
                )
            return ("index", state.k_prev)
        if p.strategy in ("adr-max", "adr-avg"):
            hist = entry.history
            hist.append(snr_db(attempt.rx_power_dbm, attempt.config.bw, p.channel.noise_figure_db))
            update = adr_max_update if p.strategy == "adr-max" else adr_avg_update
            decision = update(hist, attempt.config.sf, attempt.config.tp, p.device_margin_db)
            if decision.no_change:
                return None
            if self.decisions is not None:
                self.decisions.append(
                    (self.now, ed.ed_id, None, p.strategy, None, decision.sf, decision.tp)
                )
            return ("sftp", decision.sf, decision.tp)
        return None

    def _downlink_received(self, ed: EndDevice) -> bool:
        ch = self.p.channel
        if ch.ideal_downlink:
            return True
        shadow = sample_shadowing(self.rng_downlink, ch.sigma_db)
        rx = ch.gateway_tp_dbm + ch.antenna_gains_db - path_loss_db(self._distance(ed), ch) - shadow
        return rx >= sensitivity(ed.config.sf, ed.config.bw)

    def _on_downlink_start(self, ed: EndDevice) -> None:
        if ed.pending is None:
            ed.downlink_ok = False
            self._on_downlink_end(ed)
            return
        ed.downlink_ok = self._downlink_received(ed)
        toa = self._cost(ed.config)[2]
        self._schedule(self.now + toa, EventKind.DOWNLINK_END, ed.ed_id)

    def _on_downlink_end(self, ed: EndDevice) -> None:
        p = self.p
        payload, ed.pending = ed.pending, None
        if payload is not None and ed.downlink_ok:
            if payload[0] == "index":
                ed.index = payload[1]
                ed.config = self.space.config_at(ed.index)
            else:
                ed.config = LoRaConfig(sf=payload[1], tp=payload[2], cf=ed.config.cf, cr=ed.config.cr, bw=ed.config.bw)
        elif p.strategy == "adr-lite" and p.lite_feedback == "frame-counter":
            # Empty receive window: take the same escalation the NS takes for a missed frame.
            ed.index, _ = adr_lite_step(ed.index, None, len(self.space))
            ed.config = self.space.config_at(ed.index)
        ed.downlink_ok = False
        start = self.now + next_transmission_delay(self.rng_traffic, p.mean_interval_s)
        if p.duty_cycle is not None:
            start = max(start, ed.last_end_s + ed.last_toa_s * (1.0 / p.duty_cycle - 1.0))
        self._schedule(start, EventKind.NEXT_TRANSMISSION, ed.ed_id)


def run(
    params: SimParams,
    seed: int | Sequence[int] = 0,
    placement_seed: int | Sequence[int] | None = None,
    space: ConfigSpace | None = None,
    keep_log: bool = False,
) -> RunResult:
    return Simulation(params, seed, placement_seed, space, keep_log).run()


TRACE_COLUMNS = (
    "start_s", "end_s", "ed_id", "fcnt", "index", "sf", "tp", "cf_mhz", "cr",
    "rx_dbm", "snr_db", "outcome", "energy_j",
)


def attempts_csv(attempts: Sequence[TransmissionAttempt], noise_figure_db: float = 6.0) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(TRACE_COLUMNS)
    for a in attempts:
        c = a.config
        writer.writerow([
            repr(a.start_s), repr(a.end_s), a.ed_id, a.fcnt,
            "" if a.config_index is None else a.config_index,
            c.sf, c.tp, c.cf, format_cr(c.cr),
            f"{a.rx_power_dbm:.4f}", f"{snr_db(a.rx_power_dbm, c.bw, noise_figure_db):.4f}",
            a.outcome, repr(a.energy_j),
        ])
    return buf.getvalue()


DECISION_COLUMNS = ("time_s", "ed_id", "r_index", "branch", "new_index", "new_sf", "new_tp")


def decisions_csv(decisions: Sequence[tuple]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(DECISION_COLUMNS)
    for row in decisions:
        writer.writerow(["" if v is None else v for v in row])
    return buf.getvalue()
