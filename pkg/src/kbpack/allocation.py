"""Turning packings into time allocations and scoring them.

Durations stay exact rationals until the welfare boundary. The three utility
models: connection time, delivered watts, and comfort-weighted time.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .core import Instance, Packing, WelfareReport, welfare

HOURS_PER_WEEK = 24 * 7
COMFORT_WINDOW_WEEKS = 4


@dataclass(frozen=True)
class TimeAllocation:
    """Bins plus the fraction of the hour each bin is connected (summing to 1)."""

    bins: tuple[tuple[int, ...], ...]
    durations: tuple[Fraction, ...]

    def __post_init__(self):
        if len(self.bins) != len(self.durations):
            raise ValueError("one duration per bin required")
        if any(d <= 0 for d in self.durations):
            raise ValueError("durations must be positive")
        if sum(self.durations) != 1:
            raise ValueError("durations must sum to 1")


def uniform_allocation(packing: Packing) -> TimeAllocation:
    """Connect each of the q bins for 1/q of the hour."""
    q = len(packing.bins)
    if q == 0:
        raise ValueError("cannot allocate time over an empty packing")
    share = Fraction(1, q)
    return TimeAllocation(packing.bins, tuple(share for _ in range(q)))


def utility_time(alloc: TimeAllocation, agent: int) -> Fraction:
    """Total connected time of the agent (fraction of the hour)."""
    total = Fraction(0)
    for bin_agents, duration in zip(alloc.bins, alloc.durations):
        if agent in bin_agents:
            total += duration
    return total


def utility_watts(alloc: TimeAllocation, instance: Instance, agent: int) -> float:
    """kWh delivered to the agent over the hour: demand times connected time."""
    if not 0 <= agent < instance.n:
        raise ValueError(f"unknown agent {agent}")
    return instance.demands[agent].kw * float(utility_time(alloc, agent))


def comfort(history: np.ndarray, agent: int, hour: int) -> float:
    """Comfort of an agent at an hour within [0, 1].

    The raw score averages the agent's demand at the same hour-of-week over
    the up to four most recent prior weeks (the current demand when there is
    no prior week yet); normalization divides by the agent's maximum raw
    score across all hours of the series.
    """
    history = np.asarray(history, dtype=float)
    if history.size == 0:
        raise ValueError("empty demand history")
    if not 0 <= hour < history.shape[0]:
        raise ValueError(f"hour {hour} outside the history")
    raws = comfort_matrix_raw(history[:, agent : agent + 1])[:, 0]
    peak = raws.max()
    if peak <= 0:
        return 0.0
    return float(raws[hour] / peak)


def comfort_matrix_raw(history: np.ndarray) -> np.ndarray:
    """Unnormalized comfort scores for every (hour, agent)."""
    hours, n = history.shape
    raw = np.empty_like(history, dtype=float)
    for t in range(hours):
        prior = [t - w * HOURS_PER_WEEK for w in range(1, COMFORT_WINDOW_WEEKS + 1)]
        prior = [p for p in prior if p >= 0]
        if prior:
            raw[t] = history[prior].mean(axis=0)
        else:
            raw[t] = history[t]
    return raw


def comfort_matrix(history: np.ndarray) -> np.ndarray:
    """Per-agent normalized comfort for every hour of the series."""
    raw = comfort_matrix_raw(np.asarray(history, dtype=float))
    peaks = raw.max(axis=0)
    peaks[peaks <= 0] = 1.0
    return raw / peaks


def hour_report(
    alloc: TimeAllocation, instance: Instance, comfort_vector: Sequence[float]
) -> dict[str, WelfareReport]:
    """Welfare under the three utility models for a single hour."""
    times = [float(utility_time(alloc, a)) for a in range(instance.n)]
    watts = [instance.demands[a].kw * times[a] for a in range(instance.n)]
    comforts = [comfort_vector[a] * times[a] for a in range(instance.n)]
    return {
        "time": welfare(times),
        "watts": welfare(watts),
        "comfort": welfare(comforts),
    }
