"""Fast constant-factor algorithms for k-times bin packing: FFk, FFDk, NFk.

FFk processes the whole demand list k times in sequence (D_k = D ... D) and
packs each item into the lowest-index bin that has room and does not already
contain a copy of the same agent. FFDk does the same on the non-increasing
sort of D. NFk keeps a single bin open.
"""

from __future__ import annotations

from typing import Sequence

from .core import Instance, Packing

try:  # optional accelerator for the simulation harness
    import numpy as np
    from numba import njit

    _HAVE_NUMBA = True
except ImportError:  # pragma: no cover
    _HAVE_NUMBA = False


def first_fit_labeled(
    items: Sequence[tuple[int, int]], capacity: int
) -> list[list[int]]:
    """First-fit over a stream of (agent, size) items.

    Bins are scanned by creation index; an item goes into the first bin with
    room that does not already hold the same agent. Also the workhorse for the
    derived-copy instances of the watts heuristics, where agents appear with
    unequal multiplicities.
    """
    loads: list[int] = []
    members: list[set[int]] = []
    bins: list[list[int]] = []
    for agent, size in items:
        if size > capacity:
            raise ValueError(f"item of agent {agent} is larger than the bin capacity")
        for j in range(len(bins)):
            if loads[j] + size <= capacity and agent not in members[j]:
                loads[j] += size
                members[j].add(agent)
                bins[j].append(agent)
                break
        else:
            loads.append(size)
            members.append({agent})
            bins.append([agent])
    return bins


def _k_stream(order: Sequence[int], demands: Sequence[int], k: int):
    for _ in range(k):
        for agent in order:
            yield agent, int(demands[agent])


def ffk(instance: Instance, k: int) -> Packing:
    """First-Fit over k consecutive copies of the demand list."""
    if k < 1:
        raise ValueError("k must be positive")
    order = range(instance.n)
    bins = first_fit_labeled(list(_k_stream(order, instance.demands, k)), instance.capacity)
    return Packing(k, tuple(tuple(b) for b in bins))


def ffd_order(demands: Sequence[int]) -> list[int]:
    """Non-increasing size order; equal sizes keep their input order."""
    return sorted(range(len(demands)), key=lambda a: -int(demands[a]))


def ffdk(instance: Instance, k: int) -> Packing:
    """First-Fit Decreasing: FFk on k copies of the descending-sorted demands."""
    if k < 1:
        raise ValueError("k must be positive")
    order = ffd_order(instance.demands)
    bins = first_fit_labeled(list(_k_stream(order, instance.demands, k)), instance.capacity)
    return Packing(k, tuple(tuple(b) for b in bins))


def nfk(instance: Instance, k: int) -> Packing:
    """Next-Fit: one open bin over the D_k stream; close and reopen on misfit.

    When the whole demand multiset fits in one bin, returns the trivial k-bin
    solution (k bins, each holding every agent once).
    """
    if k < 1:
        raise ValueError("k must be positive")
    if instance.volume() <= instance.capacity:
        full_bin = tuple(range(instance.n))
        return Packing(k, tuple(full_bin for _ in range(k)))
    bins: list[list[int]] = [[]]
    load = 0
    open_members: set[int] = set()
    for agent, size in _k_stream(range(instance.n), instance.demands, k):
        if load + size > instance.capacity:
            bins.append([])
            load = 0
            open_members = set()
        # V(D) > S guarantees the open bin never holds an older copy.
        assert agent not in open_members
        bins[-1].append(agent)
        open_members.add(agent)
        load += size
    return Packing(k, tuple(tuple(b) for b in bins))


# --- fast bin-count path -----------------------------------------------------
#
# The hourly simulation only needs the number of bins q per hour (per-agent
# utilities under a uniform allocation are all k/q based). The kernel below is
# the same first-fit loop, compiled, with dead bins (residual below the
# smallest demand) compacted out of the scan. Output is bit-identical to
# len(ffk(...).bins) / len(ffdk(...).bins); tests assert this.

if _HAVE_NUMBA:

    @njit(cache=True)
    def _ff_count_kernel(demands, order, k, capacity):  # pragma: no cover - jit
        n = order.shape[0]
        max_bins = n * k
        words = (n + 63) // 64
        loads = np.zeros(max_bins, dtype=np.int64)
        member = np.zeros((max_bins, words), dtype=np.uint64)
        live = np.empty(max_bins, dtype=np.int64)
        n_bins = 0
        n_live = 0
        min_d = demands[order[0]]
        for i in range(n):
            if demands[order[i]] < min_d:
                min_d = demands[order[i]]
        for _copy in range(k):
            for oi in range(n):
                agent = order[oi]
                d = demands[agent]
                w = agent >> 6
                bit = np.uint64(1) << np.uint64(agent & 63)
                placed = -1
                for li in range(n_live):
                    b = live[li]
                    if loads[b] + d <= capacity and (member[b, w] & bit) == 0:
                        placed = b
                        break
                if placed < 0:
                    placed = n_bins
                    n_bins += 1
                    live[n_live] = placed
                    n_live += 1
                loads[placed] += d
                member[placed, w] |= bit
            # compaction: bins that cannot take any further item are dropped
            kept = 0
            for li in range(n_live):
                b = live[li]
                if capacity - loads[b] >= min_d:
                    live[kept] = b
                    kept += 1
            n_live = kept
        return n_bins


def _ff_count_python(demands: Sequence[int], order: Sequence[int], k: int, capacity: int) -> int:
    min_d = min(int(demands[a]) for a in order)
    loads: list[int] = []
    members: list[set[int]] = []
    live: list[int] = []
    n_bins = 0
    for _ in range(k):
        for agent in order:
            d = int(demands[agent])
            placed = -1
            for b in live:
                if loads[b] + d <= capacity and agent not in members[b]:
                    placed = b
                    break
            if placed < 0:
                placed = n_bins
                n_bins += 1
                loads.append(0)
                members.append(set())
                live.append(placed)
            loads[placed] += d
            members[placed].add(agent)
        live = [b for b in live if capacity - loads[b] >= min_d]
    return n_bins


def ff_bin_count(demands: Sequence[int], k: int, capacity: int, decreasing: bool = False) -> int:
    """Number of bins FFk (or FFDk) uses, without materializing the packing."""
    order = ffd_order(demands) if decreasing else list(range(len(demands)))
    if _HAVE_NUMBA and len(demands) * k > 512:
        return int(
            _ff_count_kernel(
                np.asarray([int(d) for d in demands], dtype=np.int64),
                np.asarray(order, dtype=np.int64),
                k,
                int(capacity),
            )
        )
    return _ff_count_python(demands, order, k, capacity)
