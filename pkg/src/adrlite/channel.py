"""Link budget and gateway reception.

Path loss follows the log-distance form fitted to the Oulu LoRa
measurements (``B = 128.95 dB``, ``n = 2.32``, ``d0 = 1000 m``) with
log-normal shadowing redrawn for every frame.  Frames on different SFs or
different carrier frequencies never interfere; co-SF, co-channel overlaps
are resolved with a power-capture threshold.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .phy import LoRaConfig, sensitivity

logger = logging.getLogger(__name__)

MIN_DISTANCE_M = 1.0

OK = "ok"
BELOW_SENSITIVITY = "below_sensitivity"
COLLISION = "collision"


@dataclass(frozen=True)
class ChannelParams:
    pl0_db: float = 128.95
    exponent_n: float = 2.32
    d0_m: float = 1000.0
    sigma_db: float = 7.08
    noise_figure_db: float = 6.0
    antenna_gains_db: float = 0.0
    capture_threshold_db: float = 6.0
    gateway_tp_dbm: float = 14.0
    ideal_downlink: bool = False

    def __post_init__(self) -> None:
        if self.sigma_db < 0:
            raise ValueError("sigma_db must be >= 0")
        if self.d0_m <= 0:
            raise ValueError("d0_m must be > 0")
        if self.exponent_n <= 0:
            raise ValueError("exponent_n must be > 0")


def path_loss_db(distance_m: float, params: ChannelParams) -> float:
    if distance_m < MIN_DISTANCE_M:
        logger.warning("distance %.3g m clamped to %.0f m", distance_m, MIN_DISTANCE_M)
        distance_m = MIN_DISTANCE_M
    return params.pl0_db + 10.0 * params.exponent_n * math.log10(distance_m / params.d0_m)


def sample_shadowing(rng: np.random.Generator, sigma_db: float) -> float:
    if sigma_db < 0:
        raise ValueError("sigma_db must be >= 0")
    if sigma_db == 0:
        return 0.0
    return float(rng.normal(0.0, sigma_db))


def received_power_dbm(
    tp_dbm: float, distance_m: float, shadow_db: float, params: ChannelParams
) -> float:
    return tp_dbm + params.antenna_gains_db - path_loss_db(distance_m, params) - shadow_db


def noise_floor_dbm(bw: float, noise_figure_db: float) -> float:
    return -174.0 + 10.0 * math.log10(bw) + noise_figure_db


def snr_db(rx_power_dbm: float, bw: float, noise_figure_db: float = 6.0) -> float:
    if bw <= 0:
        raise ValueError("bandwidth must be positive")
    return rx_power_dbm - noise_floor_dbm(bw, noise_figure_db)


@dataclass(slots=True)
class TransmissionAttempt:
    """One uplink frame on the air."""

    ed_id: int
    config: LoRaConfig
    start_s: float
    end_s: float
    rx_power_dbm: float
    fcnt: int = 0
    config_index: int | None = None
    energy_j: float = 0.0
    outcome: str | None = None

    def overlaps(self, other: "TransmissionAttempt") -> bool:
        return self.start_s < other.end_s and other.start_s < self.end_s

    def interferes_with(self, other: "TransmissionAttempt") -> bool:
        return (
            other is not self
            and self.config.sf == other.config.sf
            and self.config.cf == other.config.cf
            and self.overlaps(other)
        )


def reception_outcome(
    attempt: TransmissionAttempt,
    others: Sequence[TransmissionAttempt],
    capture_threshold_db: float = 6.0,
) -> str:
    """Outcome of ``attempt`` given every other frame that was on the air."""
    if attempt.rx_power_dbm < sensitivity(attempt.config.sf, attempt.config.bw):
        return BELOW_SENSITIVITY
    for other in others:
        if attempt.interferes_with(other):
            if attempt.rx_power_dbm - other.rx_power_dbm < capture_threshold_db:
                return COLLISION
    return OK


def resolve_receptions(
    attempts: Sequence[TransmissionAttempt], capture_threshold_db: float = 6.0
) -> list[str]:
    """Outcome for each attempt when all of them are resolved together."""
    return [reception_outcome(a, attempts, capture_threshold_db) for a in attempts]
