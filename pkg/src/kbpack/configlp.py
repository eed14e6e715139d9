"""Configuration systems and LP machinery for k-times bin packing.

Covers exhaustive configuration enumeration, the fractional program F_k
(min 1.x s.t. A x = k n, x >= 0) in exact rationals, integral solving by
branch-and-bound on the LP relaxation, rounding of basic solutions, queue
realization of configuration counts into duplicate-free bins, grouping
transforms, and the derived packers (de-la-Vega/Lueker style and both
Karmarkar-Karp style extensions).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .core import Instance, Packing
from .greedy import ffd_order, first_fit_labeled
from .rational import Infeasible, solve_lp

DEFAULT_CONFIG_CAP = 200_000
DEFAULT_NODE_BUDGET = 50_000


class ConfigurationExplosion(Exception):
    """Raised when configuration enumeration would exceed the cap."""


class BudgetExceeded(Exception):
    """Raised when branch-and-bound runs out of its node budget."""


@dataclass(frozen=True)
class ConfigurationSystem:
    """Distinct sizes, their counts, and all feasible configurations.

    Columns are count vectors over the size classes, each feasible (load at
    most the capacity, per-class count at most the class cardinality), listed
    in lexicographic order.
    """

    sizes: tuple[int, ...]
    counts: tuple[int, ...]
    columns: tuple[tuple[int, ...], ...]
    capacity: int

    @property
    def m(self) -> int:
        return len(self.sizes)

    @property
    def t(self) -> int:
        return len(self.columns)

    def matrix_a(self) -> list[list[int]]:
        """The m x t feasibility matrix (rows = size classes)."""
        return [[col[i] for col in self.columns] for i in range(self.m)]

    def column_load(self, j: int) -> int:
        return sum(a * c for a, c in zip(self.columns[j], self.sizes))

    def column_index(self) -> dict[tuple[int, ...], int]:
        return {col: j for j, col in enumerate(self.columns)}

    def singleton_basis(self) -> list[int] | None:
        """Indices of the one-item-per-class columns (an identity sub-basis),
        or None if some class lacks its singleton."""
        index = self.column_index()
        basis = []
        for i in range(self.m):
            unit = tuple(1 if j == i else 0 for j in range(self.m))
            if unit not in index:
                return None
            basis.append(index[unit])
        return basis

    def to_json(self) -> str:
        return json.dumps(
            {
                "capacity": int(self.capacity),
                "sizes": list(self.sizes),
                "counts": list(self.counts),
                "columns": [list(c) for c in self.columns],
            }
        )


def enumerate_class_configurations(
    sizes: Sequence[int],
    counts: Sequence[int],
    capacity: int,
    cap: int = DEFAULT_CONFIG_CAP,
) -> ConfigurationSystem:
    """All feasible non-empty configurations over explicit size classes."""
    m = len(sizes)
    columns: list[tuple[int, ...]] = []
    vec = [0] * m

    def rec(i: int, remaining: int) -> None:
        if i == m:
            if any(vec):
                columns.append(tuple(vec))
                if len(columns) > cap:
                    raise ConfigurationExplosion(
                        f"more than {cap} configurations; raise the cap to proceed"
                    )
            return
        limit = min(counts[i], remaining // sizes[i]) if sizes[i] > 0 else counts[i]
        for a in range(limit + 1):
            vec[i] = a
            rec(i + 1, remaining - a * sizes[i])
        vec[i] = 0

    rec(0, capacity)
    return ConfigurationSystem(tuple(sizes), tuple(counts), tuple(columns), int(capacity))


def enumerate_configurations(instance: Instance, cap: int = DEFAULT_CONFIG_CAP) -> ConfigurationSystem:
    """Feasible configurations of an instance's size classes, canonical order."""
    sizes, counts, _ = instance.size_classes()
    return enumerate_class_configurations(sizes, counts, instance.capacity, cap)


@dataclass(frozen=True)
class LpSolution:
    x: tuple[Fraction, ...]
    objective: Fraction
    basic: bool

    def to_json(self) -> str:
        return json.dumps(
            {
                "x": {j: str(v) for j, v in enumerate(self.x) if v != 0},
                "objective": str(self.objective),
                "basic": self.basic,
            }
        )


def _lp_arrays(system: ConfigurationSystem, k: int):
    rows = system.matrix_a()
    b = [k * c for c in system.counts]
    c = [1] * system.t
    return rows, b, c


def solve_fractional(system: ConfigurationSystem, k: int) -> LpSolution:
    """Exact-rational optimal basic solution of F_k (min 1.x, A x = k n)."""
    rows, b, c = _lp_arrays(system, k)
    try:
        res = solve_lp(rows, b, c, basis_hint=system.singleton_basis())
    except Infeasible as exc:  # cannot happen for systems built from instances
        raise AssertionError("configuration system infeasible") from exc
    x = tuple(res.x)
    return LpSolution(x, res.objective, res.support <= system.m)


def _greedy_integer_counts(system: ConfigurationSystem, k: int) -> list[int]:
    """A feasible integer solution of C_k via first-fit decreasing, as counts."""
    pseudo: list[tuple[int, int]] = []
    agent = 0
    class_of: list[int] = []
    for i, (size, cnt) in enumerate(zip(system.sizes, system.counts)):
        for _ in range(cnt):
            pseudo.append((agent, size))
            class_of.append(i)
            agent += 1
    order = ffd_order([s for _, s in pseudo])
    stream = [(pseudo[a][0], pseudo[a][1]) for _ in range(k) for a in order]
    bins = first_fit_labeled(stream, system.capacity)
    index = system.column_index()
    counts = [0] * system.t
    for b in bins:
        col = [0] * system.m
        for a in b:
            col[class_of[a]] += 1
        counts[index[tuple(col)]] += 1
    return counts


def solve_integer(
    system: ConfigurationSystem,
    k: int,
    node_budget: int = DEFAULT_NODE_BUDGET,
) -> tuple[tuple[int, ...], bool]:
    """Minimal integer solution of C_k by LP-based branch-and-bound.

    Every node LP also yields a rounded incumbent (floor plus residual
    cover), which usually closes the gap at the root. Branches on the
    most-fractional count, ties broken by larger configuration size, then
    lower column index. Returns (counts, optimal); optimal is False when the
    node budget ran out first.
    """
    rows, b, c = _lp_arrays(system, k)
    loads = [system.column_load(j) for j in range(system.t)]
    hint = system.singleton_basis()

    best_counts = _greedy_integer_counts(system, k)
    best_value = sum(best_counts)

    nodes = 0
    exhausted = False
    stack: list[tuple[dict[int, Fraction], dict[int, Fraction]]] = [({}, {})]
    while stack:
        lower, upper = stack.pop()
        if nodes >= node_budget:
            exhausted = True
            break
        nodes += 1
        try:
            res = solve_lp(rows, b, c, upper=upper, lower=lower, basis_hint=hint)
        except Infeasible:
            continue
        bound = math.ceil(res.objective)
        if bound >= best_value:
            continue
        rounded = _round_counts(res.x, system, k)
        rounded_value = sum(rounded)
        if rounded_value < best_value:
            best_value = rounded_value
            best_counts = list(rounded)
            if bound >= best_value:
                continue
        frac_j = -1
        frac_score: tuple[Fraction, int, int] | None = None
        for j, v in enumerate(res.x):
            f = v - math.floor(v)
            if f != 0:
                score = (min(f, 1 - f), loads[j], -j)
                if frac_score is None or score > frac_score:
                    frac_score = score
                    frac_j = j
        if frac_j < 0:
            value = int(res.objective)
            if value < best_value:
                best_value = value
                best_counts = [int(v) for v in res.x]
            continue
        v = res.x[frac_j]
        lo_child = dict(lower)
        lo_child[frac_j] = Fraction(math.ceil(v))
        hi_child = dict(upper)
        hi_child[frac_j] = Fraction(math.floor(v))
        stack.append((lower, hi_child))  # floor branch explored second
        stack.append((lo_child, upper))
    return tuple(best_counts), not exhausted


# --- realization -------------------------------------------------------------


def realize_counts(
    columns: Sequence[tuple[int, ...]],
    counts: Sequence[int],
    class_agents: Sequence[Sequence[int]],
    k: int,
) -> list[list[int]]:
    """Drain per-class queues of k agent copies through the configuration
    sequence; never places two copies of one agent in a bin.

    Queues hold the first copies of each class member, then the second
    copies, and so on; empty queues are skipped.
    """
    queues: list[list[int]] = []
    heads: list[int] = []
    for agents in class_agents:
        queues.append([a for _ in range(k) for a in agents])
        heads.append(0)
    bins: list[list[int]] = []
    for j, col in enumerate(columns):
        for _ in range(counts[j]):
            bin_agents: list[int] = []
            in_bin: set[int] = set()
            for i, take in enumerate(col):
                q, h = queues[i], heads[i]
                while take > 0 and h < len(q) and q[h] not in in_bin:
                    a = q[h]
                    bin_agents.append(a)
                    in_bin.add(a)
                    h += 1
                    take -= 1
                heads[i] = h
            if bin_agents:
                bins.append(bin_agents)
    return bins


def realize_solution(
    counts: Sequence[int],
    system: ConfigurationSystem,
    instance: Instance,
    k: int,
) -> Packing:
    """Turn integer configuration counts into a valid packing of D_k."""
    sizes, class_counts, class_agents = instance.size_classes()
    if sizes != system.sizes:
        raise ValueError("system size classes do not match the instance")
    for i in range(system.m):
        total = sum(counts[j] * system.columns[j][i] for j in range(system.t))
        if total != k * class_counts[i]:
            raise ValueError(
                f"counts cover {total} items of size {sizes[i]}, need {k * class_counts[i]}"
            )
    bins = realize_counts(system.columns, counts, class_agents, k)
    return Packing(k, tuple(tuple(b) for b in bins))


# --- rounding ----------------------------------------------------------------


@dataclass(frozen=True)
class RoundedCounts:
    """Integer configuration counts from a basic LP solution plus the
    overhead (bins beyond the floored part) and which residual strategy won."""

    counts: tuple[int, ...]
    total: int
    floor_total: int
    overhead: int
    residual_method: str


def _residual_per_config(
    system: ConfigurationSystem, x: Sequence[Fraction], residual: list[int]
) -> list[tuple[int, ...]]:
    bins: list[tuple[int, ...]] = []
    left = list(residual)
    for j, v in enumerate(x):
        if v != math.floor(v):
            col = system.columns[j]
            take = tuple(min(col[i], left[i]) for i in range(system.m))
            if any(take):
                bins.append(take)
                for i in range(system.m):
                    left[i] -= take[i]
    assert all(v == 0 for v in left)
    return bins


def _residual_first_fit(system: ConfigurationSystem, residual: list[int]) -> list[tuple[int, ...]]:
    items: list[int] = []  # class indices, largest sizes first
    for i in sorted(range(system.m), key=lambda i: -system.sizes[i]):
        items.extend([i] * residual[i])
    bins: list[list[int]] = []
    loads: list[int] = []
    for i in items:
        size = system.sizes[i]
        for b, load in enumerate(loads):
            if load + size <= system.capacity and bins[b][i] < system.counts[i]:
                bins[b][i] += 1
                loads[b] += size
                break
        else:
            col = [0] * system.m
            col[i] = 1
            bins.append(col)
            loads.append(size)
    return [tuple(b) for b in bins]


def _round_counts(
    x: Sequence[Fraction], system: ConfigurationSystem, k: int
) -> tuple[int, ...]:
    counts, _ = _round_counts_method(x, system, k)
    return counts


def _round_counts_method(
    x: Sequence[Fraction], system: ConfigurationSystem, k: int
) -> tuple[tuple[int, ...], str]:
    floor_counts = [int(math.floor(v)) for v in x]
    residual = [
        k * system.counts[i]
        - sum(floor_counts[j] * system.columns[j][i] for j in range(system.t))
        for i in range(system.m)
    ]
    counts = list(floor_counts)
    method = "none"
    if any(residual):
        per_config = _residual_per_config(system, x, residual)
        first_fit = _residual_first_fit(system, residual)
        extra, method = min(
            (per_config, "per-config"), (first_fit, "first-fit"), key=lambda p: len(p[0])
        )
        index = system.column_index()
        for col in extra:
            counts[index[col]] += 1
    return tuple(counts), method


def round_lp(solution: LpSolution, system: ConfigurationSystem, k: int) -> RoundedCounts:
    """Integer counts: floor of the basic solution plus the cheaper residual
    packing (one trimmed bin per fractional configuration, or greedy
    first-fit over the leftover items)."""
    counts, method = _round_counts_method(solution.x, system, k)
    floor_total = sum(int(math.floor(v)) for v in solution.x)
    total = sum(counts)
    return RoundedCounts(counts, total, floor_total, total - floor_total, method)


# --- grouping ----------------------------------------------------------------


def linear_grouping(items: Sequence[int], g: int) -> tuple[list[int], list[int]]:
    """Split descending-sorted items into groups of cardinality g; the first
    (largest) group is returned as-is, the rest with every item raised to its
    group maximum."""
    if not items:
        raise ValueError("linear grouping of an empty list")
    if g < 1:
        raise ValueError("group cardinality must be positive")
    if any(items[i] < items[i + 1] for i in range(len(items) - 1)):
        raise ValueError("items must be sorted in non-increasing order")
    u_prime = list(items[:g])
    u_rest: list[int] = []
    for start in range(g, len(items), g):
        group = items[start : start + g]
        u_rest.extend([group[0]] * len(group))
    return u_prime, u_rest


def _grouped_classes(
    pairs: Sequence[tuple[int, int]], g: int
) -> list[tuple[int, list[int]]]:
    """Groups of g consecutive pairs, each rounded to the group's max size.

    Pairs must already be ordered so each group's first element is its max.
    Classes with equal rounded size are merged. Returns (size, agents) pairs.
    """
    classes: dict[int, list[int]] = {}
    order: list[int] = []
    for start in range(0, len(pairs), g):
        group = pairs[start : start + g]
        rounded = max(s for _, s in group)
        if rounded not in classes:
            classes[rounded] = []
            order.append(rounded)
        classes[rounded].extend(a for a, _ in group)
    return [(s, classes[s]) for s in order]


def alt_geometric_grouping(
    items: Sequence[int], g: int, capacity: int
) -> tuple[list[int], list[int], list[list[int]]]:
    """Greedy groups of descending items, each filled until its total is at
    least g * capacity (the last may fall short).

    Returns (U', U'', groups): U' is the first group plus the smallest
    l_i - l_{i-1} items of every later group; U'' holds the remaining items
    of later groups rounded up to their group maximum.
    """
    if not items:
        raise ValueError("grouping of an empty list")
    if g <= 1:
        raise ValueError("group parameter must exceed 1")
    if any(items[i] < items[i + 1] for i in range(len(items) - 1)):
        raise ValueError("items must be sorted in non-increasing order")
    target = g * capacity
    groups: list[list[int]] = []
    current: list[int] = []
    total = 0
    for v in items:
        current.append(v)
        total += v
        if total >= target:
            groups.append(current)
            current = []
            total = 0
    if current:
        groups.append(current)
    u_prime = list(groups[0])
    u_rest: list[int] = []
    prev_len = len(groups[0])
    for grp in groups[1:]:
        delta = max(len(grp) - prev_len, 0)
        kept = grp[: len(grp) - delta]
        u_prime.extend(grp[len(grp) - delta :])  # the delta smallest items
        u_rest.extend([grp[0]] * len(kept))
        prev_len = len(grp)
    return u_prime, u_rest, groups


def _alt_geometric_classes(
    pairs: Sequence[tuple[int, int]], g: int, capacity: int
) -> tuple[list[tuple[int, int]], list[tuple[int, list[int]]]]:
    """Pair-level alternative geometric grouping for the loop-based packer."""
    target = g * capacity
    groups: list[list[tuple[int, int]]] = []
    current: list[tuple[int, int]] = []
    total = 0
    for a, v in pairs:
        current.append((a, v))
        total += v
        if total >= target:
            groups.append(current)
            current = []
            total = 0
    if current:
        groups.append(current)
    u_prime = list(groups[0])
    classes: dict[int, list[int]] = {}
    order: list[int] = []
    prev_len = len(groups[0])
    for grp in groups[1:]:
        delta = max(len(grp) - prev_len, 0)
        kept = grp[: len(grp) - delta]
        u_prime.extend(grp[len(grp) - delta :])
        if kept:
            rounded = grp[0][1]
            if rounded not in classes:
                classes[rounded] = []
                order.append(rounded)
            classes[rounded].extend(a for a, _ in kept)
        prev_len = len(grp)
    return u_prime, [(s, classes[s]) for s in order]


# --- small items -------------------------------------------------------------


def add_small_items(
    packing: Packing,
    small: Sequence[tuple[int, int]],
    k: int,
    capacity: int,
    demands: Sequence[int],
) -> Packing:
    """First-fit the k copies of each small item into the packing, opening
    new bins when no existing bin has room without a duplicate."""
    bins = [list(b) for b in packing.bins]
    loads = [sum(int(demands[a]) for a in b) for b in bins]
    members = [set(b) for b in bins]
    for _ in range(k):
        for agent, size in small:
            for j in range(len(bins)):
                if loads[j] + size <= capacity and agent not in members[j]:
                    bins[j].append(agent)
                    loads[j] += size
                    members[j].add(agent)
                    break
            else:
                bins.append([agent])
                loads.append(size)
                members.append({agent})
    return Packing(k, tuple(tuple(b) for b in bins))


# --- full packers ------------------------------------------------------------


def _to_fraction(eps) -> Fraction:
    if isinstance(eps, Fraction):
        return eps
    return Fraction(str(eps))


def _split_small(instance: Instance, threshold: Fraction):
    small: list[tuple[int, int]] = []
    large: list[tuple[int, int]] = []
    for a, d in enumerate(instance.demands):
        (small if Fraction(int(d)) <= threshold else large).append((a, int(d)))
    return small, large


def _classes_to_system(
    classes: Sequence[tuple[int, list[int]]], capacity: int, cap: int
) -> tuple[ConfigurationSystem, list[list[int]]]:
    ordered = sorted(classes, key=lambda c: c[0])
    sizes = [s for s, _ in ordered]
    counts = [len(agents) for _, agents in ordered]
    system = enumerate_class_configurations(sizes, counts, capacity, cap)
    return system, [list(agents) for _, agents in ordered]


def dlvl_pack(
    instance: Instance,
    k: int,
    eps,
    config_cap: int = DEFAULT_CONFIG_CAP,
    node_budget: int = DEFAULT_NODE_BUDGET,
) -> Packing:
    """Linear-grouping scheme: round the large items, solve C_k exactly on
    the rounded classes, realize, then add the small items.

    Uses at most (1 + 2 eps) OPT(D_k) + k bins for eps in (0, 1/2].
    """
    eps = _to_fraction(eps)
    if not 0 < eps <= Fraction(1, 2):
        raise ValueError("eps must be in (0, 1/2]")
    threshold = eps * instance.capacity
    small, large = _split_small(instance, threshold)
    if not large:
        return add_small_items(Packing(k, ()), small, k, instance.capacity, instance.demands)
    large.sort(key=lambda p: (p[1], p[0]))  # non-decreasing, stable by agent
    g = math.ceil(len(large) * eps * eps)
    classes = _grouped_classes_ascending(large, g)
    system, class_agents = _classes_to_system(classes, instance.capacity, config_cap)
    counts, optimal = solve_integer(system, k, node_budget)
    if not optimal:
        raise BudgetExceeded("integer configuration program not solved to optimality")
    bins = realize_counts(system.columns, counts, class_agents, k)
    packing = Packing(k, tuple(tuple(b) for b in bins))
    return add_small_items(packing, small, k, instance.capacity, instance.demands)


def _grouped_classes_ascending(
    pairs: Sequence[tuple[int, int]], g: int
) -> list[tuple[int, list[int]]]:
    """Ascending variant: groups of g from the smallest item up, each rounded
    to its own maximum (the last, possibly short, group holds the largest)."""
    classes: dict[int, list[int]] = {}
    order: list[int] = []
    for start in range(0, len(pairs), g):
        group = pairs[start : start + g]
        rounded = max(s for _, s in group)
        if rounded not in classes:
            classes[rounded] = []
            order.append(rounded)
        classes[rounded].extend(a for a, _ in group)
    return [(s, classes[s]) for s in order]


def kk1_pack(
    instance: Instance,
    k: int,
    eps,
    config_cap: int = DEFAULT_CONFIG_CAP,
) -> Packing:
    """Linear grouping with one bin per top-group copy, a fractional solve of
    the rounded classes, rounding, then the small items.

    Uses at most (1 + 2 k eps) OPT(D_k) + 1/(2 eps^2) + 2k + 1 bins.
    """
    eps = _to_fraction(eps)
    if not 0 < eps <= Fraction(1, 2):
        raise ValueError("eps must be in (0, 1/2]")
    threshold = max(Fraction(1, instance.n), eps) * instance.capacity
    small, large = _split_small(instance, threshold)
    if not large:
        return add_small_items(Packing(k, ()), small, k, instance.capacity, instance.demands)
    large.sort(key=lambda p: (-p[1], p[0]))  # non-increasing, stable by agent
    g = math.ceil(len(large) * eps * eps)
    u_prime = large[:g]
    bins: list[list[int]] = [[a] for _ in range(k) for a, _ in u_prime]
    rest = large[g:]
    if rest:
        classes = _grouped_classes(rest, g)
        system, class_agents = _classes_to_system(classes, instance.capacity, config_cap)
        lp = solve_fractional(system, k)
        rounded = round_lp(lp, system, k)
        bins.extend(realize_counts(system.columns, rounded.counts, class_agents, k))
    packing = Packing(k, tuple(tuple(b) for b in bins))
    return add_small_items(packing, small, k, instance.capacity, instance.demands)


def kk2_pack(
    instance: Instance,
    k: int,
    eps=None,
    g: int = 2,
    config_cap: int = DEFAULT_CONFIG_CAP,
    loop_volumes: list[int] | None = None,
) -> Packing:
    """Iterated alternative-geometric-grouping scheme.

    Size thresholds and logarithms are evaluated with sizes normalized by the
    capacity. Defaults follow the g = 2, eps = 1/V(D) parameterization.
    ``loop_volumes``, when given, records V(J) at the top of each iteration.
    """
    if g <= 1:
        raise ValueError("group parameter g must exceed 1")
    volume_norm = Fraction(instance.volume(), int(instance.capacity))
    eps = Fraction(1, 1) / volume_norm if eps is None else _to_fraction(eps)
    if eps <= 0:
        raise ValueError("eps must be positive")
    capacity = int(instance.capacity)
    threshold = eps * capacity
    small, work = _split_small(instance, threshold)
    cutoff_norm = 1 + g / (g - 1) * math.log(1 / float(eps))

    all_bins: list[list[int]] = []
    while work and sum(s for _, s in work) / capacity > cutoff_norm:
        if loop_volumes is not None:
            loop_volumes.append(sum(s for _, s in work))
        work.sort(key=lambda p: (-p[1], p[0]))
        u_prime, classes = _alt_geometric_classes(work, g, capacity)
        removed: set[int] = set()
        if classes:
            system, class_agents = _classes_to_system(classes, capacity, config_cap)
            lp = solve_fractional(system, k)
            floor_counts = [int(math.floor(v)) for v in lp.x]
            covered = [
                sum(floor_counts[j] * system.columns[j][i] for j in range(system.t))
                for i in range(system.m)
            ]
            chosen: list[list[int]] = []
            for i in range(system.m):
                whole = covered[i] // k
                chosen.append(class_agents[i][:whole])
                removed.update(chosen[-1])
            all_bins.extend(realize_counts(system.columns, floor_counts, chosen, k))
        stream = [(a, s) for _ in range(k) for a, s in u_prime]
        all_bins.extend(first_fit_labeled(stream, capacity))
        removed.update(a for a, _ in u_prime)
        work = [(a, s) for a, s in work if a not in removed]
    if work:
        layer = first_fit_labeled(work, capacity)
        for _ in range(k):
            all_bins.extend([list(b) for b in layer])
    packing = Packing(k, tuple(tuple(b) for b in all_bins))
    return add_small_items(packing, small, k, capacity, instance.demands)
