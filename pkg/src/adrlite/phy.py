"""LoRa physical-layer model: symbol time, airtime and per-packet energy.

Two airtime modes are supported:

``literal``
    ``N_payload = 8 + max(ceil(theta / gamma) / CR, 0)`` which may be
    fractional.  This is the default.
``semtech``
    The conventional calculator form
    ``N_payload = 8 + max(ceil(theta / (4 * gamma)) * (4 + k), 0)`` with
    ``CR = 4 / (4 + k)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Mapping

import yaml

SF_VALUES = (7, 8, 9, 10, 11, 12)
TP_VALUES = (2, 5, 8, 11, 14)
CF_VALUES = (868.1, 868.4, 868.7)
CR_VALUES = (Fraction(4, 5), Fraction(4, 6), Fraction(4, 7), Fraction(4, 8))
BW_VALUES = (125_000, 250_000, 500_000)

AIRTIME_MODES = ("literal", "semtech")

# Sensitivity (dBm) at 125 kHz, SX127x datasheet class values.
SENSITIVITY_DBM_125KHZ = {
    7: -124.0,
    8: -127.0,
    9: -130.0,
    10: -133.0,
    11: -135.0,
    12: -137.0,
}

# Demodulation floor (dB) used by the max/avg ADR margin computation.
REQUIRED_SNR_DB = {7: -7.5, 8: -10.0, 9: -12.5, 10: -15.0, 11: -17.5, 12: -20.0}

SUPPLY_VOLTAGE_V = 3.3
# SX1276 PA_BOOST transmit supply current (mA) per TP step.
TX_CURRENT_MA = {2: 24.0, 5: 25.0, 8: 25.0, 11: 32.0, 14: 44.0}
# Microcontroller active current (mA); implementation-chosen, not from a datasheet.
MCU_CURRENT_MA = 2.0


class PhyError(ValueError):
    """Raised for parameters outside the legal LoRa sets."""


def parse_cr(value: object) -> Fraction:
    """Parse a coding rate given as ``"4/5"``, a Fraction or a float."""
    if isinstance(value, Fraction):
        cr = value
    elif isinstance(value, str):
        cr = Fraction(value.strip())
    elif isinstance(value, (int, float)):
        cr = Fraction(value).limit_denominator(8)
    else:
        raise PhyError(f"cannot interpret coding rate {value!r}")
    if cr not in CR_VALUES:
        raise PhyError(f"coding rate {cr} not in {{4/5, 4/6, 4/7, 4/8}}")
    return cr


def format_cr(cr: Fraction) -> str:
    # Fraction normalises 4/6 to 2/3; keep the conventional 4/x spelling.
    return f"4/{int(4 / cr)}"


@dataclass(frozen=True, order=True)
class LoRaConfig:
    """One transmission-parameter tuple plus the (fixed) bandwidth."""

    sf: int
    tp: int
    cf: float
    cr: Fraction
    bw: int = 125_000

    def __post_init__(self) -> None:
        if self.sf not in SF_VALUES:
            raise PhyError(f"sf={self.sf} not in {SF_VALUES}")
        if self.tp not in TP_VALUES:
            raise PhyError(f"tp={self.tp} dBm not in {TP_VALUES}")
        if self.cf not in CF_VALUES:
            raise PhyError(f"cf={self.cf} MHz not in {CF_VALUES}")
        if self.cr not in CR_VALUES:
            raise PhyError(f"cr={self.cr} not in {{4/5, 4/6, 4/7, 4/8}}")
        if self.bw not in BW_VALUES:
            raise PhyError(f"bw={self.bw} Hz not in {BW_VALUES}")

    def __hash__(self) -> int:
        # Hashing the Fraction is slow and configs are dict keys on the hot path.
        h = self.__dict__.get("_hash")
        if h is None:
            h = hash((self.sf, self.tp, self.cf, self.cr, self.bw))
            object.__setattr__(self, "_hash", h)
        return h

    def label(self) -> str:
        return f"SF{self.sf}/{self.tp}dBm/{self.cf}MHz/CR{format_cr(self.cr)}"


@dataclass(frozen=True)
class RadioConstants:
    """Energy and frame constants feeding the airtime and energy formulas."""

    p_on_mcu: float = SUPPLY_VOLTAGE_V * MCU_CURRENT_MA * 1e-3
    p_toa_by_tp: Mapping[int, float] = field(
        default_factory=lambda: {
            tp: SUPPLY_VOLTAGE_V * ma * 1e-3 for tp, ma in TX_CURRENT_MA.items()
        }
    )
    n_preamble: int = 8
    header_disabled: int = 0
    ldro: int = 0
    ldro_auto: bool = False
    payload_len: int = 20

    def __post_init__(self) -> None:
        # Freeze the mapping into a sorted tuple-backed dict for stable hashing.
        object.__setattr__(
            self, "p_toa_by_tp", dict(sorted((int(k), float(v)) for k, v in self.p_toa_by_tp.items()))
        )
        missing = [tp for tp in TP_VALUES if tp not in self.p_toa_by_tp]
        if missing:
            raise PhyError(f"p_toa_by_tp missing entries for tp {missing}")
        if self.p_on_mcu <= 0 or any(p <= 0 for p in self.p_toa_by_tp.values()):
            raise PhyError("all power draws must be > 0 W")
        if self.header_disabled not in (0, 1):
            raise PhyError("header_disabled must be 0 or 1")
        if self.ldro not in (0, 1):
            raise PhyError("ldro must be 0 or 1")
        if self.payload_len < 1:
            raise PhyError("payload_len must be >= 1")
        if self.n_preamble < 0:
            raise PhyError("n_preamble must be >= 0")

    def __hash__(self) -> int:
        return hash(
            (
                self.p_on_mcu,
                tuple(self.p_toa_by_tp.items()),
                self.n_preamble,
                self.header_disabled,
                self.ldro,
                self.ldro_auto,
                self.payload_len,
            )
        )

    def de_for(self, sf: int, bw: int) -> int:
        if self.ldro_auto and sf >= 11 and bw == 125_000:
            return 1
        return self.ldro

    def to_dict(self) -> dict:
        return {
            "p_on_mcu_w": self.p_on_mcu,
            "p_toa_w": dict(self.p_toa_by_tp),
            "n_preamble": self.n_preamble,
            "header_disabled": self.header_disabled,
            "ldro": self.ldro,
            "ldro_auto": self.ldro_auto,
            "payload_len": self.payload_len,
        }

    @classmethod
    def from_dict(cls, data: Mapping) -> "RadioConstants":
        known = {
            "p_on_mcu_w": "p_on_mcu",
            "p_toa_w": "p_toa_by_tp",
            "n_preamble": "n_preamble",
            "header_disabled": "header_disabled",
            "ldro": "ldro",
            "ldro_auto": "ldro_auto",
            "payload_len": "payload_len",
        }
        unknown = sorted(set(data) - set(known))
        if unknown:
            raise PhyError(f"unknown radio constant(s): {', '.join(unknown)}")
        return cls(**{known[k]: v for k, v in data.items()})


def load_constants(path: str | Path) -> RadioConstants:
    """Read a YAML constants file (keys as in :meth:`RadioConstants.to_dict`)."""
    with open(path, encoding="utf-8") as fh:
        data = yaml.safe_load(fh) or {}
    if not isinstance(data, dict):
        raise PhyError(f"{path}: expected a mapping at top level")
    return RadioConstants.from_dict(data)


def symbol_time(sf: int, bw: int) -> float:
    if sf not in SF_VALUES:
        raise PhyError(f"sf={sf} not in {SF_VALUES}")
    if bw <= 0:
        raise PhyError("bandwidth must be positive")
    return 2**sf / bw


def theta(payload_len: int, sf: int, header_disabled: int) -> int:
    return 8 * payload_len - 4 * sf + 16 + 28 - 20 * header_disabled


def payload_symbols(
    payload_len: int,
    sf: int,
    cr: Fraction,
    header_disabled: int = 0,
    ldro: int = 0,
    mode: str = "literal",
) -> float:
    """Number of payload symbols, including the 8 mandatory ones."""
    if cr not in CR_VALUES:
        raise PhyError(f"coding rate {cr} not in {{4/5, 4/6, 4/7, 4/8}}")
    gamma = sf - 2 * ldro
    if gamma <= 0:
        raise PhyError(f"non-positive symbol divisor for sf={sf}, DE={ldro}")
    th = theta(payload_len, sf, header_disabled)
    if mode == "literal":
        blocks = math.ceil(Fraction(th, gamma)) * (1 / Fraction(cr))
    elif mode == "semtech":
        k = int(4 / cr) - 4
        blocks = math.ceil(Fraction(th, 4 * gamma)) * (4 + k)
    else:
        raise PhyError(f"unknown airtime mode {mode!r}; expected one of {AIRTIME_MODES}")
    return float(8 + max(blocks, 0))


def time_on_air(config: LoRaConfig, radio: RadioConstants, mode: str = "literal") -> float:
    ts = symbol_time(config.sf, config.bw)
    n_payload = payload_symbols(
        radio.payload_len,
        config.sf,
        config.cr,
        radio.header_disabled,
        radio.de_for(config.sf, config.bw),
        mode,
    )
    return (4.25 + radio.n_preamble) * ts + n_payload * ts


def energy_per_packet(config: LoRaConfig, radio: RadioConstants, mode: str = "literal") -> float:
    """Transmit-mode energy (J) of one frame."""
    try:
        p_toa = radio.p_toa_by_tp[config.tp]
    except KeyError:
        raise PhyError(f"no transmit power draw for tp={config.tp} dBm") from None
    return (radio.p_on_mcu + p_toa) * time_on_air(config, radio, mode)


def sensitivity(sf: int, bw: int = 125_000) -> float:
    """Reception floor (dBm); wider bandwidths scale with the noise bandwidth."""
    if sf not in SENSITIVITY_DBM_125KHZ or bw not in BW_VALUES:
        raise PhyError(f"no sensitivity for sf={sf}, bw={bw}")
    return SENSITIVITY_DBM_125KHZ[sf] + 10 * math.log10(bw / 125_000)


def required_snr(sf: int) -> float:
    if sf not in REQUIRED_SNR_DB:
        raise PhyError(f"no required SNR for sf={sf}")
    return REQUIRED_SNR_DB[sf]
