"""Exact small-instance oracles: optimal bin counts, the egalitarian
connection-time r_max, the smallest multiplicity achieving it, and the
maximal 0/1-matrix determinant table that bounds that multiplicity.

Desk-scale tools (roughly n <= 12, k <= 10), all in exact rational
arithmetic so values like 9/17 compare exactly.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .configlp import (
    DEFAULT_CONFIG_CAP,
    DEFAULT_NODE_BUDGET,
    ConfigurationExplosion,
    ConfigurationSystem,
    enumerate_configurations,
    realize_solution,
    solve_integer,
)
from .core import Instance, Packing
from .rational import solve_lp

# Maximal determinant of an n x n 0/1 matrix, n = 1..21.
A_N_TABLE = (
    1,
    1,
    2,
    3,
    5,
    9,
    32,
    56,
    144,
    320,
    1458,
    3645,
    9477,
    25515,
    131072,
    327680,
    1114112,
    3411968,
    19531250,
    56640625,
    195312500,
)


@dataclass(frozen=True)
class DeterminantBound:
    value: int
    exact: bool  # False: Hadamard upper bound only


def a_n(n: int) -> DeterminantBound:
    """a(n) for n <= 21; beyond that the Hadamard bound 2^-n (n+1)^((n+1)/2)."""
    if n <= 0:
        raise ValueError("n must be positive")
    if n <= len(A_N_TABLE):
        return DeterminantBound(A_N_TABLE[n - 1], True)
    bound = (n + 1) ** Fraction(n + 1, 2) / 2**n  # may be irrational
    return DeterminantBound(int(float(bound)), False)


@dataclass(frozen=True)
class ExactResult:
    packing: Packing
    bins: int
    optimal: bool
    volume_certified: bool  # all bins full, so optimal by the volume bound


def exact_kbp(
    instance: Instance,
    k: int,
    node_budget: int = DEFAULT_NODE_BUDGET,
    config_cap: int = DEFAULT_CONFIG_CAP,
    system: ConfigurationSystem | None = None,
) -> ExactResult:
    """Optimal k-times bin packing via the integer configuration program."""
    if k < 1:
        raise ValueError("k must be positive")
    if system is None:
        system = enumerate_configurations(instance, config_cap)
    counts, optimal = solve_integer(system, k, node_budget)
    packing = realize_solution(counts, system, instance, k)
    bins = len(packing.bins)
    volume = k * instance.volume()
    certified = volume % instance.capacity == 0 and bins == volume // instance.capacity
    return ExactResult(packing, bins, optimal, certified)


@dataclass(frozen=True)
class RmaxResult:
    r_max: Fraction
    support: tuple[tuple[tuple[int, ...], Fraction], ...]  # (agent subset, weight)


def rmax(instance: Instance, subset_cap: int = 1 << 22) -> RmaxResult:
    """Largest r with r*(1,...,1) in the convex hull of feasible agent
    subsets: max r s.t. sum_w lambda_w w = r e, sum lambda = 1, lambda >= 0."""
    n = instance.n
    if 1 << n > subset_cap:
        raise ConfigurationExplosion(f"2^{n} agent subsets exceed the cap")
    demands = [int(d) for d in instance.demands]
    cap = int(instance.capacity)
    subsets: list[tuple[int, ...]] = []
    for mask in range(1 << n):
        members = [i for i in range(n) if mask >> i & 1]
        if sum(demands[i] for i in members) <= cap:
            subsets.append(tuple(members))
    t = len(subsets)
    # variables: lambda_1..lambda_t, r ; rows: n coverage equalities + normalization
    rows: list[list[int]] = []
    for i in range(n):
        row = [1 if i in subsets[j] else 0 for j in range(t)]
        row.append(-1)
        rows.append(row)
    rows.append([1] * t + [0])
    b = [0] * n + [1]
    c = [0] * t + [-1]  # maximize r
    res = solve_lp(rows, b, c)
    r = -res.objective
    support = tuple(
        (subsets[j], res.x[j]) for j in range(t) if res.x[j] != 0
    )
    return RmaxResult(r, support)


def minimal_k(
    instance: Instance,
    k_max: int,
    node_budget: int = DEFAULT_NODE_BUDGET,
    config_cap: int = DEFAULT_CONFIG_CAP,
) -> int | None:
    """Smallest k <= k_max with k / OPT(D_k) equal to r_max, or None."""
    if k_max < 1:
        raise ValueError("k_max must be positive")
    target = rmax(instance).r_max
    system = enumerate_configurations(instance, config_cap)
    for k in range(1, k_max + 1):
        result = exact_kbp(instance, k, node_budget, system=system)
        if not result.optimal:
            raise ValueError(f"exact solve for k={k} exceeded the node budget")
        if Fraction(k, result.bins) == target:
            return k
    return None


def opt_table(
    instance: Instance,
    k_max: int,
    node_budget: int = DEFAULT_NODE_BUDGET,
    config_cap: int = DEFAULT_CONFIG_CAP,
) -> list[tuple[int, int]]:
    """(k, OPT(D_k)) for k = 1..k_max."""
    system = enumerate_configurations(instance, config_cap)
    out = []
    for k in range(1, k_max + 1):
        out.append((k, exact_kbp(instance, k, node_budget, system=system).bins))
    return out
