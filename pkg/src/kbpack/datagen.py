"""Synthetic data: known-optimum packing instances and demand time series.

Randomness comes from numpy's counter-based Philox generator so that a
recorded 64-bit seed reproduces every artifact bit-for-bit; parallel or
batch generation derives child seeds through SeedSequence spawning.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .core import Instance, Size

DEMAND_FLOOR_KW = 1e-3


def make_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(seed))


def spawn_rngs(seed: int, count: int) -> list[np.random.Generator]:
    """Independent child generators derived from one recorded seed."""
    return [np.random.Generator(np.random.Philox(s)) for s in np.random.SeedSequence(seed).spawn(count)]


def generate_items(capacity: Size | int, rng: np.random.Generator) -> list[Size]:
    """Random item sizes summing exactly to the capacity.

    Draws integers uniformly from the open interval (1, S) in micro-kW; the
    first draw that would overshoot is replaced by the exact remainder.
    """
    cap = int(capacity)
    if cap <= 2:
        return [Size(cap)]
    items: list[Size] = []
    total = 0
    while True:
        r = int(rng.integers(2, cap))
        if total + r > cap:
            items.append(Size(cap - total))
            break
        items.append(Size(r))
        total += r
        if total == cap:
            break
    return items


@dataclass(frozen=True)
class GeneratedInstance:
    """A known-optimum instance: OPT full bins certified by construction."""

    instance: Instance
    opt: int
    certificate: tuple[tuple[int, ...], ...]  # agent ids of each full bin

    def certificate_valid(self) -> bool:
        cap = int(self.instance.capacity)
        return all(
            sum(int(self.instance.demands[a]) for a in b) == cap for b in self.certificate
        ) and sorted(a for b in self.certificate for a in b) == list(range(self.instance.n))


def generate_instance(capacity: Size | int, opt: int, rng: np.random.Generator) -> GeneratedInstance:
    """Concatenate full-bin batches until the volume is opt * capacity, then
    shuffle. The optimum is opt bins exactly (and k*opt for every k)."""
    if opt < 1:
        raise ValueError("opt must be positive")
    batches = [generate_items(capacity, rng) for _ in range(opt)]
    flat = [d for batch in batches for d in batch]
    perm = rng.permutation(len(flat))
    demands = tuple(flat[i] for i in perm)
    position = {int(old): new for new, old in enumerate(perm)}
    certificate = []
    idx = 0
    for batch in batches:
        certificate.append(tuple(position[idx + j] for j in range(len(batch))))
        idx += len(batch)
    return GeneratedInstance(Instance(demands, Size(int(capacity))), opt, tuple(certificate))


@dataclass(frozen=True)
class DemandSeries:
    """Hourly demand matrix (kW) plus the per-hour supply derived from the
    daily mean of aggregate demand."""

    demands: np.ndarray  # (hours, agents)
    supply: np.ndarray  # (hours,)

    @property
    def hours(self) -> int:
        return int(self.demands.shape[0])

    @property
    def n_agents(self) -> int:
        return int(self.demands.shape[1])

    def shedding_hours(self) -> np.ndarray:
        """Hours whose aggregate demand exceeds the supply."""
        return np.flatnonzero(self.demands.sum(axis=1) > self.supply)


def daily_supply(demands: np.ndarray) -> np.ndarray:
    """Supply for each hour: the mean aggregate demand of that hour's day."""
    hours = demands.shape[0]
    aggregate = demands.sum(axis=1)
    per_day = aggregate.reshape(hours // 24, 24).mean(axis=1)
    return np.repeat(per_day, 24)


def generate_timeseries(
    n_agents: int,
    hours: int,
    rng: np.random.Generator,
    base_range: tuple[float, float] = (0.1, 1.2),
    evening_peak: float = 1.8,
    morning_peak: float = 0.8,
    weekend_lift: float = 0.15,
    jitter: float = 0.05,
) -> DemandSeries:
    """Diurnal demand profiles with morning and evening peaks.

    The peaks push some hours well above the daily mean, so the derived
    supply leaves genuine shedding hours.
    """
    if hours % 24 != 0:
        raise ValueError("hours must be a multiple of 24")
    base = rng.uniform(*base_range, size=n_agents)
    phase = rng.uniform(-1.5, 1.5, size=n_agents)
    hour_of_day = np.arange(hours) % 24
    day_of_week = (np.arange(hours) // 24) % 7
    weekend = (day_of_week >= 5).astype(float)
    t = hour_of_day[:, None] + phase[None, :]
    evening = np.exp(-0.5 * ((t - 19.0) / 2.5) ** 2)
    morning = np.exp(-0.5 * ((t - 7.5) / 2.0) ** 2)
    shape = 0.35 + evening_peak * evening + morning_peak * morning
    shape *= 1.0 + weekend_lift * weekend[:, None]
    demands = base[None, :] * shape
    if jitter > 0:
        demands = demands * (1.0 + rng.normal(0.0, jitter, size=demands.shape))
    demands = np.maximum(demands, DEMAND_FLOOR_KW)
    return DemandSeries(demands, daily_supply(demands))


def perturb_demands(series: DemandSeries, sigma: float, rng: np.random.Generator) -> DemandSeries:
    """Draw each hourly demand from a normal around the recorded value,
    clamped below at a positive floor. The supply stays as estimated."""
    if sigma < 0:
        raise ValueError("sigma must be non-negative")
    if sigma == 0:
        return series
    noisy = rng.normal(series.demands, sigma)
    return DemandSeries(np.maximum(noisy, DEMAND_FLOOR_KW), series.supply.copy())


def hour_instance(series: DemandSeries, hour: int) -> Instance:
    """The packing instance of one hour: that hour's demands and supply.

    Demands above the supply are capped at it, since no more than the supply
    can be delivered to a single agent.
    """
    cap = Size.from_kw(float(series.supply[hour]))
    demands = tuple(min(Size.from_kw(float(d)), cap) for d in series.demands[hour])
    return Instance(tuple(Size(d) for d in demands), cap)


# --- serialization -----------------------------------------------------------


def series_to_csv(series: DemandSeries) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf)
    writer.writerow(["hour"] + [f"agent_{i}" for i in range(series.n_agents)] + ["supply"])
    for h in range(series.hours):
        writer.writerow(
            [h] + [f"{v:.6f}" for v in series.demands[h]] + [f"{series.supply[h]:.6f}"]
        )
    return buf.getvalue()


def series_from_csv(text: str) -> DemandSeries:
    reader = csv.reader(io.StringIO(text))
    header = next(reader)
    if header[0] != "hour" or header[-1] != "supply":
        raise ValueError("series CSV must have columns hour,agent_*,supply")
    demands: list[list[float]] = []
    supply: list[float] = []
    for row in reader:
        if not row:
            continue
        demands.append([float(v) for v in row[1:-1]])
        supply.append(float(row[-1]))
    return DemandSeries(np.asarray(demands, dtype=float), np.asarray(supply, dtype=float))


def instances_to_jsonl(generated: Iterable[GeneratedInstance]) -> str:
    import json

    lines = []
    for gen in generated:
        lines.append(
            json.dumps(
                {
                    "capacity": str(gen.instance.capacity),
                    "demands": [str(d) for d in gen.instance.demands],
                    "opt": gen.opt,
                    "certificate": [list(b) for b in gen.certificate],
                }
            )
        )
    return "\n".join(lines) + "\n"
