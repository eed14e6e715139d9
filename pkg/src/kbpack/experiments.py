"""Experiment harness: ratio sweeps on known-optimum instances, hourly
distribution simulation, and watts-heuristic accounting over a series."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import watts as watts_mod
from .allocation import HOURS_PER_WEEK, comfort_matrix
from .configlp import dlvl_pack, kk1_pack, kk2_pack
from .core import Instance, Packing, Size, WelfareReport, welfare
from .datagen import (
    DemandSeries,
    generate_instance,
    hour_instance,
    make_rng,
    perturb_demands,
    spawn_rngs,
)
from .exact import exact_kbp
from .greedy import ff_bin_count, ffdk, ffk, nfk

GREEDY_ALGS = ("ffk", "ffdk", "nfk")
LP_ALGS = ("dlvl", "kk1", "kk2")
ALL_ALGS = GREEDY_ALGS + LP_ALGS + ("exact",)


@dataclass(frozen=True)
class PackOutcome:
    packing: Packing
    bins: int
    optimal: bool | None  # None unless the exact solver ran
    volume_certified: bool


def pack_with(
    algorithm: str,
    instance: Instance,
    k: int,
    eps: str | float | None = None,
    g: int = 2,
    node_budget: int | None = None,
) -> PackOutcome:
    """Run one packing algorithm by name."""
    if algorithm == "ffk":
        packing = ffk(instance, k)
    elif algorithm == "ffdk":
        packing = ffdk(instance, k)
    elif algorithm == "nfk":
        packing = nfk(instance, k)
    elif algorithm == "dlvl":
        packing = dlvl_pack(instance, k, eps if eps is not None else "0.25")
    elif algorithm == "kk1":
        packing = kk1_pack(instance, k, eps if eps is not None else "0.25")
    elif algorithm == "kk2":
        packing = kk2_pack(instance, k, eps, g)
    elif algorithm == "exact":
        kwargs = {} if node_budget is None else {"node_budget": node_budget}
        result = exact_kbp(instance, k, **kwargs)
        return PackOutcome(result.packing, result.bins, result.optimal, result.volume_certified)
    else:
        raise ValueError(f"unknown algorithm {algorithm!r}")
    bins = len(packing.bins)
    volume = k * instance.volume()
    certified = volume % instance.capacity == 0 and bins == volume // instance.capacity
    return PackOutcome(packing, bins, None, certified)


def volume_lower_bound(instance: Instance, k: int) -> int:
    return math.ceil(k * instance.volume() / instance.capacity)


# --- ratio sweep --------------------------------------------------------------


def ratio_sweep(
    algorithms: Sequence[str],
    k_list: Sequence[int],
    opt_list: Sequence[int],
    instances_per_cell: int,
    seed: int,
    capacity_kw: float = 10.0,
) -> list[dict]:
    """Max bins per (algorithm, k, OPT) cell over known-optimum instances,
    next to the conjectured bound columns."""
    capacity = Size.from_kw(capacity_kw)
    rows: list[dict] = []
    rng = make_rng(seed)
    for opt in opt_list:
        cell_instances = [generate_instance(capacity, opt, rng).instance for _ in range(instances_per_cell)]
        for k in k_list:
            opt_dk = k * opt
            for alg in algorithms:
                worst = max(pack_with(alg, inst, k).bins for inst in cell_instances)
                rows.append(
                    {
                        "alg": alg,
                        "k": k,
                        "opt": opt,
                        "opt_dk": opt_dk,
                        "max_bins": worst,
                        "bound_ffk_conjecture": 1.375 * opt_dk,
                        "bound_ffdk_conjecture": (11 * opt_dk + 6) / 9,
                    }
                )
    return rows


def ffdk_conjecture_bound(opt_dk: int) -> float:
    """Conjectured first-fit-decreasing ceiling; violations are research
    findings, not failures."""
    return (11 * opt_dk + 6) / 9


def write_findings_report(path, violations: Sequence[tuple[int, int, int, int]]) -> None:
    """Record conjecture violations as CSV: (instance index, opt, k, bins)."""
    from pathlib import Path

    lines = ["instance_index,opt,k,ffdk_bins,conjectured_bound"]
    lines += [
        f"{i},{opt},{k},{bins},{ffdk_conjecture_bound(k * opt):.5f}"
        for i, opt, k, bins in violations
    ]
    Path(path).write_text("\n".join(lines) + "\n")


# --- hourly simulation --------------------------------------------------------


@dataclass(frozen=True)
class RunMetrics:
    run: int
    grid: dict[str, WelfareReport]  # utility model -> welfare over agent totals

    def flat(self) -> dict[str, float]:
        out: dict[str, float] = {}
        for model, rep in self.grid.items():
            out[f"{model}_utilitarian"] = rep.utilitarian
            out[f"{model}_egalitarian"] = rep.egalitarian
            out[f"{model}_max_diff"] = rep.max_utility_difference
        return out


def _hourly_bin_counts(series: DemandSeries, k: int, decreasing: bool) -> np.ndarray:
    # demands above the hourly supply are capped at it: no more than the
    # supply can be delivered to one agent anyway
    counts = np.empty(series.hours, dtype=np.int64)
    micro = np.round(series.demands * 1e6).astype(np.int64)
    supply = np.round(series.supply * 1e6).astype(np.int64)
    micro = np.minimum(micro, supply[:, None])
    for h in range(series.hours):
        counts[h] = ff_bin_count(micro[h], k, int(supply[h]), decreasing=decreasing)
    return counts


def simulate_series(
    series: DemandSeries,
    k: int,
    algorithm: str,
    sigma: float,
    runs: int,
    seed: int,
    discard_weeks: int = 4,
) -> list[RunMetrics]:
    """Pack every hour, connect each bin 1/q of the hour, and accumulate the
    three utility models per agent; one metrics grid per run.

    Comfort totals skip the first `discard_weeks` weeks (cold-start window).
    """
    if algorithm not in ("ffk", "ffdk"):
        raise ValueError("hourly simulation supports the ffk and ffdk algorithms")
    decreasing = algorithm == "ffdk"
    rngs = spawn_rngs(seed, runs)
    results: list[RunMetrics] = []
    skip = discard_weeks * HOURS_PER_WEEK
    for run, rng in enumerate(rngs):
        realized = perturb_demands(series, sigma, rng)
        q = _hourly_bin_counts(realized, k, decreasing)
        share = k / q.astype(float)  # connected fraction of each hour
        time_total = float(share.sum())
        time_totals = np.full(series.n_agents, time_total)
        delivered = np.minimum(realized.demands, realized.supply[:, None])
        watts_totals = (delivered * share[:, None]).sum(axis=0)
        comf = comfort_matrix(realized.demands)
        comfort_totals = (comf[skip:] * share[skip:, None]).sum(axis=0)
        grid = {
            "time": welfare(time_totals.tolist()),
            "watts": welfare(watts_totals.tolist()),
            "comfort": welfare(comfort_totals.tolist()),
        }
        results.append(RunMetrics(run, grid))
    return results


def summarize_runs(results: Sequence[RunMetrics]) -> dict[str, dict[str, float]]:
    """Mean and standard deviation of every flat metric across runs."""
    keys = results[0].flat().keys()
    table = {key: [r.flat()[key] for r in results] for key in keys}
    return {
        "mean": {key: float(np.mean(vals)) for key, vals in table.items()},
        "sd": {key: float(np.std(vals)) for key, vals in table.items()},
    }


# --- watts heuristics over a series --------------------------------------------


@dataclass(frozen=True)
class WattsSeriesMetrics:
    utilitarian: float  # all hours, all agents
    egalitarian: float  # sum over shedding hours of the worst not-always-on watts
    max_diff: float  # sum over shedding hours of the not-always-on spread
    shedding_hours: int


def run_heuristic(instance: Instance, ha: int, k: int, backend: str, u: float | str = 0.25):
    if instance.volume() <= instance.capacity:
        # no shortage: connect everyone the whole hour
        return watts_mod.WattsSolution(
            instance.n,
            tuple(range(instance.n)),
            (),
            (),
            tuple(d.kw for d in instance.demands),
        )
    if ha == 1:
        return watts_mod.ha1(instance, k, backend)
    if ha == 2:
        return watts_mod.ha2(instance, k)
    if ha == 3:
        return watts_mod.ha3(instance, k, u, backend)
    if ha == 4:
        return watts_mod.ha4(instance, k, backend)
    raise ValueError(f"unknown heuristic HA{ha}")


def watts_over_series(
    series: DemandSeries, ha: int, k: int, backend: str = "ffk", u: float | str = 0.25
) -> WattsSeriesMetrics:
    """Run the chosen heuristic for every shedding hour; non-shedding hours
    deliver every demand in full and count only toward the utilitarian sum."""
    utilitarian = 0.0
    egalitarian = 0.0
    max_diff = 0.0
    shedding = 0
    for h in range(series.hours):
        aggregate = float(series.demands[h].sum())
        if aggregate <= float(series.supply[h]):
            utilitarian += aggregate
            continue
        shedding += 1
        sol = run_heuristic(hour_instance(series, h), ha, k, backend, u)
        utilitarian += sum(sol.watts)
        on = set(sol.always_on)
        rest = [w for a, w in enumerate(sol.watts) if a not in on]
        if rest:
            egalitarian += min(rest)
            max_diff += max(rest) - min(rest)
    return WattsSeriesMetrics(utilitarian, egalitarian, max_diff, shedding)
