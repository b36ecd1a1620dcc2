"""Random-waypoint mobility with zero pause time."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

STATIC = "static"
RANDOM_WAYPOINT = "random_waypoint"
MOBILITY_MODES = (STATIC, RANDOM_WAYPOINT)


def sample_speed(rng: np.random.Generator, mean_mps: float = 2.5, max_mps: float = 5.0) -> float:
    """Exponential speed, resampled until it falls in ``(0, max_mps]``."""
    while True:
        v = float(rng.exponential(mean_mps))
        if 0.0 < v <= max_mps:
            return v


def uniform_point(rng: np.random.Generator, side_m: float) -> tuple[float, float]:
    x, y = rng.uniform(0.0, side_m, size=2)
    return float(x), float(y)


@dataclass(slots=True)
class MobilityState:
    mode: str
    origin: tuple[float, float]
    target: tuple[float, float]
    depart_s: float = 0.0
    arrival_s: float = math.inf
    speed_mps: float = 0.0

    @classmethod
    def static(cls, position: tuple[float, float]) -> "MobilityState":
        return cls(mode=STATIC, origin=position, target=position)

    def position(self, t: float) -> tuple[float, float]:
        if self.mode == STATIC or t <= self.depart_s:
            return self.origin
        if t >= self.arrival_s:
            return self.target
        frac = (t - self.depart_s) / (self.arrival_s - self.depart_s)
        (x0, y0), (x1, y1) = self.origin, self.target
        return x0 + (x1 - x0) * frac, y0 + (y1 - y0) * frac


def waypoint_step(
    mobility: MobilityState,
    rng: np.random.Generator,
    side_m: float,
    now_s: float,
    speed_mean_mps: float = 2.5,
    speed_max_mps: float = 5.0,
) -> MobilityState:
    """Start the next leg from the current position at ``now_s``."""
    if mobility.mode == STATIC:
        return mobility
    here = mobility.position(now_s)
    target = uniform_point(rng, side_m)
    speed = sample_speed(rng, speed_mean_mps, speed_max_mps)
    dist = math.dist(here, target)
    return MobilityState(
        mode=RANDOM_WAYPOINT,
        origin=here,
        target=target,
        depart_s=now_s,
        arrival_s=now_s + dist / speed,
        speed_mps=speed,
    )
