"""The energy-ordered configuration array searched by ADR-Lite.

Indices are 1-based throughout: index 1 is the cheapest configuration and
index ``len(space)`` the most expensive one.
"""

from __future__ import annotations

import csv
import io
import itertools
from dataclasses import dataclass
from fractions import Fraction

from .phy import (
    CF_VALUES,
    CR_VALUES,
    SF_VALUES,
    TP_VALUES,
    LoRaConfig,
    PhyError,
    RadioConstants,
    energy_per_packet,
    format_cr,
    parse_cr,
    time_on_air,
)


class ConfigSpaceError(ValueError):
    pass


@dataclass(frozen=True)
class ConfigDimensions:
    sf_values: tuple[int, ...] = SF_VALUES
    tp_values: tuple[int, ...] = TP_VALUES
    cf_values: tuple[float, ...] = (868.1,)
    cr_values: tuple[Fraction, ...] = (Fraction(4, 5),)
    bw: int = 125_000

    def __post_init__(self) -> None:
        for name, legal in (
            ("sf_values", SF_VALUES),
            ("tp_values", TP_VALUES),
            ("cf_values", CF_VALUES),
            ("cr_values", CR_VALUES),
        ):
            values = tuple(getattr(self, name))
            if not values:
                raise ConfigSpaceError(f"{name} must not be empty")
            bad = [v for v in values if v not in legal]
            if bad:
                raise ConfigSpaceError(f"{name}: {bad} not in legal set {list(legal)}")
            if len(set(values)) != len(values):
                raise ConfigSpaceError(f"{name}: duplicate values")
            object.__setattr__(self, name, tuple(sorted(values)))

    @property
    def size(self) -> int:
        return len(self.sf_values) * len(self.tp_values) * len(self.cf_values) * len(self.cr_values)

    def to_dict(self) -> dict:
        return {
            "sf": list(self.sf_values),
            "tp": list(self.tp_values),
            "cf": list(self.cf_values),
            "cr": [format_cr(c) for c in self.cr_values],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ConfigDimensions":
        unknown = sorted(set(data) - {"sf", "tp", "cf", "cr"})
        if unknown:
            raise ConfigSpaceError(f"unknown dimension(s): {', '.join(unknown)}")
        kwargs = {}
        if "sf" in data:
            kwargs["sf_values"] = tuple(int(v) for v in data["sf"])
        if "tp" in data:
            kwargs["tp_values"] = tuple(int(v) for v in data["tp"])
        if "cf" in data:
            kwargs["cf_values"] = tuple(float(v) for v in data["cf"])
        if "cr" in data:
            try:
                kwargs["cr_values"] = tuple(parse_cr(v) for v in data["cr"])
            except PhyError as exc:
                raise ConfigSpaceError(f"cr: {exc}") from None
        return cls(**kwargs)


# The four dimension sets compared in the configuration-freedom study.
NAMED_DIMENSIONS = {
    "config-1": ConfigDimensions(),
    "config-2": ConfigDimensions(cf_values=CF_VALUES),
    "config-3": ConfigDimensions(cr_values=CR_VALUES),
    "config-4": ConfigDimensions(cf_values=CF_VALUES, cr_values=CR_VALUES),
}


def parse_dims(text: str) -> ConfigDimensions:
    """Parse ``config-N`` or ``sf=7,8;tp=2,14;cf=868.1;cr=4/5``."""
    text = text.strip()
    if text in NAMED_DIMENSIONS:
        return NAMED_DIMENSIONS[text]
    data: dict[str, list[str]] = {}
    for part in filter(None, (p.strip() for p in text.split(";"))):
        key, sep, values = part.partition("=")
        if not sep:
            raise ConfigSpaceError(f"malformed dimension clause {part!r}")
        data[key.strip()] = [v.strip() for v in values.split(",") if v.strip()]
    return ConfigDimensions.from_dict(data)


def _tie_key(cfg: LoRaConfig) -> tuple:
    return (cfg.sf, cfg.tp, cfg.cr, cfg.cf)


@dataclass(frozen=True)
class ConfigSpace:
    configs: tuple[LoRaConfig, ...]
    energies: tuple[float, ...]
    airtimes: tuple[float, ...]
    airtime_mode: str = "literal"

    def __len__(self) -> int:
        return len(self.configs)

    def config_at(self, index: int) -> LoRaConfig:
        if not 1 <= index <= len(self.configs):
            raise IndexError(f"config index {index} outside 1..{len(self.configs)}")
        return self.configs[index - 1]

    def energy_at(self, index: int) -> float:
        self.config_at(index)
        return self.energies[index - 1]

    def index_of(self, config: LoRaConfig) -> int:
        try:
            return self._positions[config]
        except KeyError:
            raise ConfigSpaceError(f"{config} is not part of this space") from None

    @property
    def _positions(self) -> dict[LoRaConfig, int]:
        cache = self.__dict__.get("_pos_cache")
        if cache is None:
            cache = {c: i + 1 for i, c in enumerate(self.configs)}
            object.__setattr__(self, "_pos_cache", cache)
        return cache

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["index", "sf", "tp", "cf_mhz", "cr", "toa_s", "energy_j"])
        for i, (cfg, toa, e) in enumerate(zip(self.configs, self.airtimes, self.energies), 1):
            writer.writerow([i, cfg.sf, cfg.tp, cfg.cf, format_cr(cfg.cr), repr(toa), repr(e)])
        return buf.getvalue()


def build_space(
    dims: ConfigDimensions,
    radio: RadioConstants | None = None,
    airtime_mode: str = "literal",
) -> ConfigSpace:
    radio = radio or RadioConstants()
    scored = []
    for sf, tp, cf, cr in itertools.product(
        dims.sf_values, dims.tp_values, dims.cf_values, dims.cr_values
    ):
        cfg = LoRaConfig(sf=sf, tp=tp, cf=cf, cr=cr, bw=dims.bw)
        scored.append(
            (energy_per_packet(cfg, radio, airtime_mode), _tie_key(cfg), cfg, time_on_air(cfg, radio, airtime_mode))
        )
    if not scored:
        raise ConfigSpaceError("empty configuration space")
    scored.sort(key=lambda item: (item[0], item[1]))
    return ConfigSpace(
        configs=tuple(s[2] for s in scored),
        energies=tuple(s[0] for s in scored),
        airtimes=tuple(s[3] for s in scored),
        airtime_mode=airtime_mode,
    )

