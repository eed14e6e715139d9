"""Domain types for k-times bin packing: exact sizes, instances, packings, welfare.

All electricity quantities are stored as integer micro-kW (scale 10^6), so
capacity checks and volume sums are exact. Floats only appear in welfare
reports and watts vectors, at the output boundary.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from decimal import Decimal, InvalidOperation
from typing import Iterable, Sequence

MICRO = 10**6
MAX_DECIMAL_PLACES = 6


class Size(int):
    """A non-negative demand or capacity in integer micro-kW."""

    def __new__(cls, value: int) -> "Size":
        if value < 0:
            raise ValueError(f"size must be non-negative, got {value}")
        return super().__new__(cls, value)

    @classmethod
    def from_str(cls, text: str) -> "Size":
        """Parse a decimal kW string exactly; more than 6 decimal places is an error."""
        try:
            dec = Decimal(text)
        except InvalidOperation as exc:
            raise ValueError(f"not a decimal number: {text!r}") from exc
        scaled = dec * MICRO
        if scaled != scaled.to_integral_value():
            raise ValueError(f"more than {MAX_DECIMAL_PLACES} decimal places: {text!r}")
        return cls(int(scaled))

    @classmethod
    def from_kw(cls, kw: float | int | str | Decimal) -> "Size":
        """Convert a kW quantity, rounding floats to the nearest micro-kW."""
        if isinstance(kw, str):
            return cls.from_str(kw)
        if isinstance(kw, Decimal):
            return cls.from_str(str(kw))
        if isinstance(kw, int):
            return cls(kw * MICRO)
        return cls(round(kw * MICRO))

    @property
    def kw(self) -> float:
        return int(self) / MICRO

    def __str__(self) -> str:
        whole, frac = divmod(int(self), MICRO)
        if frac == 0:
            return str(whole)
        return f"{whole}.{frac:06d}".rstrip("0")

    def __repr__(self) -> str:
        return f"Size({int(self)})"


@dataclass(frozen=True)
class Instance:
    """A multiset of agent demands plus the bin capacity (hourly supply)."""

    demands: tuple[Size, ...]
    capacity: Size

    def __post_init__(self):
        if len(self.demands) < 1:
            raise ValueError("instance needs at least one agent")
        for i, d in enumerate(self.demands):
            if not 0 < d <= self.capacity:
                raise ValueError(
                    f"demand of agent {i} is {d} but must be in (0, {self.capacity}]"
                )

    @classmethod
    def from_kw(cls, demands: Iterable[float | int | str], capacity: float | int | str) -> "Instance":
        return cls(tuple(Size.from_kw(d) for d in demands), Size.from_kw(capacity))

    @property
    def n(self) -> int:
        return len(self.demands)

    def volume(self) -> int:
        """Total demand V(D) in micro-kW."""
        return sum(self.demands)

    def size_classes(self) -> tuple[tuple[int, ...], tuple[int, ...], tuple[tuple[int, ...], ...]]:
        """Distinct sizes ascending, their counts, and the member agent ids per class."""
        members: dict[int, list[int]] = {}
        for agent, d in enumerate(self.demands):
            members.setdefault(int(d), []).append(agent)
        sizes = tuple(sorted(members))
        counts = tuple(len(members[s]) for s in sizes)
        return sizes, counts, tuple(tuple(members[s]) for s in sizes)

    def to_json(self) -> str:
        return json.dumps(
            {"capacity": str(self.capacity), "demands": [str(d) for d in self.demands]}
        )

    @classmethod
    def from_json(cls, text: str) -> "Instance":
        data = json.loads(text)
        return cls(
            tuple(Size.from_str(d) for d in data["demands"]),
            Size.from_str(data["capacity"]),
        )


@dataclass(frozen=True)
class Packing:
    """An ordered list of bins; each bin is a duplicate-free list of agent ids."""

    k: int
    bins: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("multiplicity k must be positive")

    def to_json(self) -> str:
        return json.dumps({"k": self.k, "bins": [list(b) for b in self.bins]})

    @classmethod
    def from_json(cls, text: str) -> "Packing":
        data = json.loads(text)
        return cls(int(data["k"]), tuple(tuple(int(a) for a in b) for b in data["bins"]))


@dataclass(frozen=True)
class Verdict:
    """Outcome of a validity check: ok, or the first violated constraint."""

    ok: bool
    reason: str | None = None
    bin_index: int | None = None

    def __bool__(self) -> bool:
        return self.ok


def bin_load(instance: Instance, bin_agents: Sequence[int]) -> Size:
    """Exact total demand of the agents in one bin."""
    return Size(sum(int(instance.demands[a]) for a in bin_agents))


def validate_copies(
    instance: Instance,
    bins: Sequence[Sequence[int]],
    expected: Sequence[int],
    capacity: int | None = None,
) -> Verdict:
    """Check bins against per-agent expected multiplicities and a capacity.

    Scans bins in order reporting the first duplicate-agent or overflow, then
    checks every agent appears the expected number of times overall.
    """
    cap = instance.capacity if capacity is None else capacity
    seen = [0] * instance.n
    for idx, bin_agents in enumerate(bins):
        in_bin: set[int] = set()
        load = 0
        for a in bin_agents:
            if not 0 <= a < instance.n:
                return Verdict(False, f"unknown agent {a}", idx)
            if a in in_bin:
                return Verdict(False, f"duplicate agent {a} in bin {idx}", idx)
            in_bin.add(a)
            seen[a] += 1
            load += int(instance.demands[a])
        if load > cap:
            return Verdict(False, f"bin {idx} load {load} exceeds capacity {int(cap)}", idx)
    for a, (got, want) in enumerate(zip(seen, expected)):
        if got != want:
            return Verdict(False, f"agent {a} appears {got} times, expected {want}")
    return Verdict(True)


def validate_packing(instance: Instance, packing: Packing) -> Verdict:
    """Verdict on the three packing constraints: no duplicate agent in a bin,
    exactly k occurrences of every agent, and no bin over capacity."""
    return validate_copies(instance, packing.bins, [packing.k] * instance.n)


@dataclass(frozen=True)
class WelfareReport:
    utilitarian: float
    egalitarian: float
    max_utility_difference: float


def welfare(utilities: Sequence[float]) -> WelfareReport:
    """Sum, minimum, and largest pairwise absolute difference of utilities."""
    if not utilities:
        raise ValueError("welfare of an empty utility vector is undefined")
    lo = min(utilities)
    hi = max(utilities)
    return WelfareReport(float(sum(utilities)), float(lo), float(hi - lo))
