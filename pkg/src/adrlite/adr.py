"""Network-server ADR strategies.

``adr-lite``
    Binary search over the energy-ordered configuration array.  The only
    per-device memory is the last assigned index.
``adr-max`` / ``adr-avg``
    Classic SNR-margin rule over the last ``W`` received packets, using the
    maximum or the mean SNR respectively.  Adjusts SF and TP only.
``no-adr``
    A uniformly random configuration index per transmission.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass
from statistics import fmean
from typing import Callable, Iterable

import numpy as np

from .phy import SF_VALUES, TP_VALUES, required_snr

STRATEGIES = ("adr-lite", "adr-max", "adr-avg", "no-adr")

MATCH = "match"
MISMATCH = "mismatch"
MISSED = "missed"


@dataclass(slots=True)
class AdrLiteState:
    """Per-device ADR-Lite state: the index assigned last time."""

    k_prev: int
    space_size: int

    def __post_init__(self) -> None:
        if self.space_size < 1:
            raise ValueError("space_size must be >= 1")
        if not 1 <= self.k_prev <= self.space_size:
            raise ValueError(f"k_prev={self.k_prev} outside 1..{self.space_size}")

    @classmethod
    def initial(cls, space_size: int) -> "AdrLiteState":
        return cls(k_prev=space_size, space_size=space_size)


def adr_lite_step(k_prev: int, r_index: int | None, space_size: int) -> tuple[int, str]:
    """One binary-search step; returns the new index and the branch taken.

    ``r_index`` is the configuration index carried by the received packet.
    ``None`` means no packet was received for this iteration, which takes
    the escalation branch.
    """
    if r_index is not None and r_index == k_prev:
        lo, hi, branch = 1, k_prev, MATCH
    else:
        lo, hi = k_prev, space_size
        branch = MISMATCH if r_index is not None else MISSED
    return (hi + lo) // 2, branch


def adr_lite_update(state: AdrLiteState, r_index: int | None) -> int:
    if r_index is not None and not 1 <= r_index <= state.space_size:
        raise ValueError(f"r_index={r_index} outside 1..{state.space_size}")
    state.k_prev, _ = adr_lite_step(state.k_prev, r_index, state.space_size)
    return state.k_prev


class SnrHistory:
    """Ring buffer of the most recent SNR samples."""

    __slots__ = ("window", "_values")

    def __init__(self, window: int = 20) -> None:
        if window < 1:
            raise ValueError("window must be >= 1")
        self.window = window
        self._values: deque[float] = deque(maxlen=window)

    def append(self, snr_db: float) -> None:
        self._values.append(snr_db)

    def clear(self) -> None:
        self._values.clear()

    @property
    def full(self) -> bool:
        return len(self._values) == self.window

    def values(self) -> list[float]:
        return list(self._values)

    def __len__(self) -> int:
        return len(self._values)


@dataclass(frozen=True)
class AdrDecision:
    """Outcome of one strategy evaluation; all-``None`` means no change."""

    index: int | None = None
    sf: int | None = None
    tp: int | None = None

    @property
    def no_change(self) -> bool:
        return self.index is None and self.sf is None


NO_CHANGE = AdrDecision()


def _margin_step(
    snr_metric: float,
    current_sf: int,
    current_tp: int,
    device_margin_db: float,
    tp_values: tuple[int, ...] = TP_VALUES,
) -> AdrDecision:
    margin = snr_metric - required_snr(current_sf) - device_margin_db
    n_step = math.floor(margin / 3)
    sf, tp = current_sf, current_tp
    min_sf = min(SF_VALUES)
    tp_lo, tp_hi = min(tp_values), max(tp_values)
    while n_step > 0 and sf > min_sf:
        sf -= 1
        n_step -= 1
    while n_step > 0 and tp > tp_lo:
        tp = max(tp - 3, tp_lo)
        n_step -= 1
    while n_step < 0 and tp < tp_hi:
        tp = min(tp + 3, tp_hi)
        n_step += 1
    if (sf, tp) == (current_sf, current_tp):
        return NO_CHANGE
    return AdrDecision(sf=sf, tp=tp)


def _windowed_update(
    reduce: Callable[[Iterable[float]], float],
    history: SnrHistory,
    current_sf: int,
    current_tp: int,
    device_margin_db: float,
) -> AdrDecision:
    if not history.full:
        return NO_CHANGE
    metric = reduce(history.values())
    history.clear()
    return _margin_step(metric, current_sf, current_tp, device_margin_db)


def adr_max_update(
    history: SnrHistory, current_sf: int, current_tp: int, device_margin_db: float = 10.0
) -> AdrDecision:
    return _windowed_update(max, history, current_sf, current_tp, device_margin_db)


def adr_avg_update(
    history: SnrHistory, current_sf: int, current_tp: int, device_margin_db: float = 10.0
) -> AdrDecision:
    return _windowed_update(fmean, history, current_sf, current_tp, device_margin_db)


def no_adr_pick(rng: np.random.Generator, space_size: int) -> int:
    return int(rng.integers(1, space_size + 1))

