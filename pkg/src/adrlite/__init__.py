"""Single-gateway LoRa network simulator with ADR-Lite and baseline ADR schemes."""

from .adr import AdrLiteState, adr_lite_step, adr_lite_update
from .configspace import NAMED_DIMENSIONS, ConfigDimensions, ConfigSpace, build_space
from .phy import LoRaConfig, RadioConstants, energy_per_packet, time_on_air
from .sim import SimParams, compute_metrics, run

__all__ = [
    "AdrLiteState",
    "ConfigDimensions",
    "ConfigSpace",
    "LoRaConfig",
    "NAMED_DIMENSIONS",
    "RadioConstants",
    "SimParams",
    "adr_lite_step",
    "adr_lite_update",
    "build_space",
    "compute_metrics",
    "energy_per_packet",
    "run",
    "time_on_air",
]
