"""Egalitarian watts allocation heuristics.

All four heuristics share the two-step shape: connect a set G of
smallest-demand agents the whole hour, pack the rest under the leftover
supply, and keep the leximin-best watts vector over the probed choices of G.
They differ in how the remaining agents are multiplied and grouped.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Sequence

from .core import MICRO, Instance, Size
from .greedy import first_fit_labeled

LEXIMIN_TOL = 1e-9


def leximin_key(watts: Sequence[float]) -> tuple[float, ...]:
    """Sorted-ascending copy of a watts vector."""
    return tuple(sorted(watts))


def leximin_compare(a: Sequence[float], b: Sequence[float], tol: float = LEXIMIN_TOL) -> int:
    """Lexicographic comparison of sorted-ascending vectors: positive when a
    is preferred, negative when b is, 0 when equal within tolerance."""
    if len(a) != len(b):
        raise ValueError("leximin keys must have equal length")
    for x, y in zip(a, b):
        if abs(x - y) > tol:
            return 1 if x > y else -1
    return 0


@dataclass(frozen=True)
class WattsSolution:
    """An always-on set plus a packing of the rest with per-bin durations.

    ``bins`` cover only the agents outside ``always_on``; completing a bin
    means appending every always-on agent to it. ``watts`` covers all agents:
    the full demand for always-on agents, demand times connected time for the
    rest.
    """

    g: int
    always_on: tuple[int, ...]
    bins: tuple[tuple[int, ...], ...]
    durations: tuple[Fraction, ...]
    watts: tuple[float, ...]

    def key(self) -> tuple[float, ...]:
        return leximin_key(self.watts)

    def egalitarian(self) -> float:
        """Minimum watts among the agents that are not connected all the time."""
        on = set(self.always_on)
        rest = [w for a, w in enumerate(self.watts) if a not in on]
        return min(rest) if rest else min(self.watts)

    def copies(self, n: int) -> list[int]:
        out = [0] * n
        for b in self.bins:
            for a in b:
                out[a] += 1
        return out

    def to_json(self) -> str:
        return json.dumps(
            {
                "g": self.g,
                "always_on": list(self.always_on),
                "bins": [list(b) for b in self.bins],
                "durations": [str(d) for d in self.durations],
                "watts": list(self.watts),
            }
        )


def _prefer(candidate: WattsSolution, incumbent: WattsSolution | None) -> bool:
    if incumbent is None:
        return True
    cmp = leximin_compare(candidate.key(), incumbent.key())
    if cmp != 0:
        return cmp > 0
    return candidate.g < incumbent.g


def ternary_search(
    evaluate: Callable[[int], WattsSolution], g_begin: int = 0, g_end: int = 0
) -> WattsSolution:
    """Leximin peak search over an integer range, keeping the global best of
    every evaluated point; narrows by thirds while the gap exceeds 3, then
    scans the remaining range linearly."""
    if g_end < g_begin:
        raise ValueError("empty search range")
    cache: dict[int, WattsSolution] = {}

    def ev(g: int) -> WattsSolution:
        if g not in cache:
            cache[g] = evaluate(g)
        return cache[g]

    best: WattsSolution | None = None
    while g_end - g_begin > 3:
        for g in (g_begin, g_end):
            sol = ev(g)
            if _prefer(sol, best):
                best = sol
        g_begin = round((2 * g_begin + g_end) / 3)
        g_end = round((g_begin + 2 * g_end) / 3)
    for g in range(g_begin, g_end + 1):
        sol = ev(g)
        if _prefer(sol, best):
            best = sol
    assert best is not None
    return best


def cutoff(instance: Instance) -> tuple[Size | None, int]:
    """Largest ascending prefix of demands whose sum fits beside the biggest
    demand: returns (boundary size, prefix length).

    Only defined when the total demand exceeds the supply; otherwise every
    agent can stay connected and the caller should short-circuit.
    """
    cap = int(instance.capacity)
    if instance.volume() <= cap:
        raise ValueError("total demand does not exceed the supply")
    room = cap - max(int(d) for d in instance.demands)
    order = sorted(range(instance.n), key=lambda a: (int(instance.demands[a]), a))
    total = 0
    g_max = 0
    boundary: Size | None = None
    for a in order:
        d = int(instance.demands[a])
        if total + d > room:
            break
        total += d
        g_max += 1
        boundary = instance.demands[a]
    return boundary, g_max


def _ascending_order(instance: Instance) -> list[int]:
    return sorted(range(instance.n), key=lambda a: (int(instance.demands[a]), a))


def round_half_up(x: float) -> int:
    return math.floor(x + 0.5)


def derive_copies_instance(
    remaining: Sequence[tuple[int, int]], k: int, d_max: int
) -> tuple[list[tuple[int, int]], dict[int, int]]:
    """Per-agent copy counts k*d_max/d rounded half-up (computed on kW floats,
    matching the published tables), interleaved round-robin: one copy of each
    agent with copies left, repeated until all are exhausted.

    Agents whose copy count rounds to zero are omitted.
    """
    d_max_kw = d_max / MICRO
    counts: dict[int, int] = {}
    for agent, d in remaining:
        counts[agent] = round_half_up(k * d_max_kw / (d / MICRO))
    left = {a: c for a, c in counts.items() if c > 0}
    sequence: list[tuple[int, int]] = []
    while left:
        for agent, d in remaining:
            if left.get(agent, 0) > 0:
                sequence.append((agent, d))
                left[agent] -= 1
                if left[agent] == 0:
                    del left[agent]
    return sequence, counts


def _backend_order(pairs: list[tuple[int, int]], backend: str) -> list[tuple[int, int]]:
    if backend == "ffk":
        return pairs
    if backend == "ffdk":
        return sorted(pairs, key=lambda p: -p[1])
    raise ValueError(f"unknown backend {backend!r}")


def _uniform_watts_solution(
    instance: Instance,
    g: int,
    always_on: Sequence[int],
    bins: list[list[int]],
    copies: dict[int, int],
) -> WattsSolution:
    q = len(bins)
    on = set(always_on)
    watts = []
    for a in range(instance.n):
        if a in on:
            watts.append(instance.demands[a].kw)
        else:
            watts.append(instance.demands[a].kw * copies.get(a, 0) / q)
    share = Fraction(1, q)
    return WattsSolution(
        g,
        tuple(sorted(always_on)),
        tuple(tuple(b) for b in bins),
        tuple(share for _ in range(q)),
        tuple(watts),
    )


def ha1(instance: Instance, k: int, backend: str = "ffk") -> WattsSolution:
    """Derived-copy heuristic: each remaining agent gets ~k*d_max/d copies so
    connected watts come out nearly equal, packed under the leftover supply."""
    _, g_max = cutoff(instance)
    order = _ascending_order(instance)
    cap = int(instance.capacity)

    def evaluate(g: int) -> WattsSolution:
        on = order[:g]
        on_set = set(on)
        remaining = [(a, int(d)) for a, d in enumerate(instance.demands) if a not in on_set]
        s_prime = cap - sum(int(instance.demands[a]) for a in on)
        d_max = max(d for _, d in remaining)
        sequence, counts = derive_copies_instance(remaining, k, d_max)
        bins = first_fit_labeled(_backend_order(sequence, backend), s_prime)
        return _uniform_watts_solution(instance, g, on, bins, counts)

    return ternary_search(evaluate, 0, g_max)


def ha4(instance: Instance, k: int, backend: str = "ffk") -> WattsSolution:
    """Plain-kBP heuristic: every remaining agent keeps exactly k copies."""
    _, g_max = cutoff(instance)
    order = _ascending_order(instance)
    cap = int(instance.capacity)

    def evaluate(g: int) -> WattsSolution:
        on = order[:g]
        on_set = set(on)
        remaining = [(a, int(d)) for a, d in enumerate(instance.demands) if a not in on_set]
        s_prime = cap - sum(int(instance.demands[a]) for a in on)
        stream = [p for _ in range(k) for p in remaining]
        bins = first_fit_labeled(_backend_order(stream, backend), s_prime)
        counts = {a: k for a, _ in remaining}
        return _uniform_watts_solution(instance, g, on, bins, counts)

    return ternary_search(evaluate, 0, g_max)


# --- HA2: dyadic grouping with doubling durations ----------------------------


def geometric_grouping(demands: Sequence[int]) -> list[list[int]]:
    """Dyadic buckets: index i holds the items with size in
    (d_max 2^-(i+1), d_max 2^-i]. Returns lists of item indices for
    i = 0..floor(log2(d_max/d_min)); intermediate buckets may be empty."""
    if not demands:
        raise ValueError("grouping of an empty demand list")
    d_max = max(int(d) for d in demands)
    levels: list[list[int]] = []
    top = 0
    for idx, d in enumerate(demands):
        d = int(d)
        i = 0
        while d << (i + 1) <= d_max:
            i += 1
        top = max(top, i)
        while len(levels) <= i:
            levels.append([])
        levels[i].append(idx)
    return levels[: top + 1]


def ha2(
    instance: Instance, k: int, k_per_level: dict[int, int] | None = None
) -> WattsSolution:
    """Dyadic-group heuristic: each group packed by plain kBP, bins of level i
    connected 2^i times as long as level 0, leftover smallest groups always on.

    Scans every always-on suffix length and keeps the one whose watts vector
    over the not-always-on agents is leximin-best.
    """
    cap = int(instance.capacity)
    if instance.volume() <= cap:
        raise ValueError("total demand does not exceed the supply")
    d_max = max(int(d) for d in instance.demands)
    levels = geometric_grouping(instance.demands)
    nonempty = [(lvl, agents) for lvl, agents in enumerate(levels) if agents]
    room = cap - d_max
    # longest suffix of smallest-bucket groups that fits beside d_max
    s_max = 0
    total = 0
    for lvl, agents in reversed(nonempty):
        total += sum(int(instance.demands[a]) for a in agents)
        if total > room:
            break
        s_max += 1

    def evaluate(s: int) -> WattsSolution:
        keep = nonempty[: len(nonempty) - s]
        on = [a for _, agents in nonempty[len(nonempty) - s :] for a in agents] if s else []
        s_prime = cap - sum(int(instance.demands[a]) for a in on)
        packed: list[tuple[int, list[int], list[list[int]]]] = []
        denom = Fraction(0)
        for lvl, agents in keep:
            k_lvl = (k_per_level or {}).get(lvl, k)
            stream = [(a, int(instance.demands[a])) for _ in range(k_lvl) for a in agents]
            bins = first_fit_labeled(stream, s_prime)
            packed.append((lvl, agents, bins))
            denom += Fraction(len(bins) * 2**lvl, k_lvl)
        tau0 = 1 / denom  # connected time of a level-0 agent
        bins_all: list[list[int]] = []
        durations: list[Fraction] = []
        watts = [0.0] * instance.n
        for lvl, agents, bins in packed:
            k_lvl = (k_per_level or {}).get(lvl, k)
            t_bin = tau0 * 2**lvl / k_lvl
            for b in bins:
                bins_all.append(b)
                durations.append(t_bin)
            agent_time = tau0 * 2**lvl
            for a in agents:
                watts[a] = instance.demands[a].kw * float(agent_time)
        for a in on:
            watts[a] = instance.demands[a].kw
        return WattsSolution(
            s, tuple(sorted(on)), tuple(tuple(b) for b in bins_all), tuple(durations), tuple(watts)
        )

    best: WattsSolution | None = None
    for s in range(s_max + 1):
        sol = evaluate(s)
        if best is None:
            best = sol
            continue
        on_best = set(best.always_on)
        on_sol = set(sol.always_on)
        key_best = leximin_key([w for a, w in enumerate(best.watts) if a not in on_best])
        key_sol = leximin_key([w for a, w in enumerate(sol.watts) if a not in on_sol])
        n_common = min(len(key_best), len(key_sol))
        cmp = leximin_compare(key_sol[:n_common], key_best[:n_common])
        if cmp > 0:
            best = sol
    assert best is not None
    return best


# --- HA3: super-agent grouping ------------------------------------------------


def ha3(instance: Instance, k: int, u, backend: str = "ffk") -> WattsSolution:
    """Super-agent heuristic: greedy groups of total size at least u*d_max are
    packed as single agents with derived copy counts, then expanded back."""
    cap = int(instance.capacity)
    if instance.volume() <= cap:
        raise ValueError("total demand does not exceed the supply")
    u = Fraction(str(u))
    if u <= 0:
        raise ValueError("u must be positive")
    d_max = max(int(d) for d in instance.demands)
    target = u * d_max
    order = sorted(range(instance.n), key=lambda a: (-int(instance.demands[a]), a))
    groups: list[list[int]] = []
    current: list[int] = []
    total = 0
    for a in order:
        current.append(a)
        total += int(instance.demands[a])
        if total >= target:
            groups.append(current)
            current = []
            total = 0
    if current:
        groups.append(current)

    if len(groups) == 1:
        stream = [(a, int(instance.demands[a])) for _ in range(k) for a in range(instance.n)]
        bins = first_fit_labeled(_backend_order(stream, backend), cap)
        counts = {a: k for a in range(instance.n)}
        return _uniform_watts_solution(instance, 0, [], bins, counts)

    real = [sum(int(instance.demands[a]) for a in grp) for grp in groups]
    pseudo = [
        r if Fraction(r) >= target else math.ceil(target) for r in real
    ]
    v_max = max(pseudo)
    asc = sorted(range(len(groups)), key=lambda gi: (pseudo[gi], gi))
    room = cap - v_max
    g_max = 0
    total = 0
    for gi in asc:
        if total + pseudo[gi] > room:
            break
        total += pseudo[gi]
        g_max += 1

    def evaluate(g: int) -> WattsSolution:
        on_groups = set(asc[:g])
        on = [a for gi in on_groups for a in groups[gi]]
        s_prime = cap - sum(pseudo[gi] for gi in on_groups)
        rest = sorted((gi for gi in range(len(groups)) if gi not in on_groups),
                      key=lambda gi: (-pseudo[gi], gi))
        super_pairs = [(gi, pseudo[gi]) for gi in rest]
        sequence, group_counts = derive_copies_instance(super_pairs, k, v_max)
        super_bins = first_fit_labeled(_backend_order(sequence, backend), s_prime)
        bins = [[a for gi in b for a in groups[gi]] for b in super_bins]
        counts = {a: group_counts.get(gi, 0) for gi in rest for a in groups[gi]}
        return _uniform_watts_solution(instance, g, on, bins, counts)

    return ternary_search(evaluate, 0, g_max)
