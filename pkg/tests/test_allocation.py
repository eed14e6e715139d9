from fractions import Fraction

import numpy as np
import pytest

from kbpack.allocation import (
    TimeAllocation,
    comfort,
    comfort_matrix,
    hour_report,
    uniform_allocation,
    utility_time,
    utility_watts,
)
from kbpack.core import Instance, Packing
from kbpack.exact import exact_kbp
from kbpack.greedy import ffk


class TestUniformAllocation:
    def test_intro_connection_time(self, inst_intro):
        packing = Packing(2, ((0, 1), (1, 2), (2, 0)))
        alloc = uniform_allocation(packing)
        for agent in range(3):
            assert utility_time(alloc, agent) == Fraction(2, 3)

    def test_single_bin(self):
        alloc = uniform_allocation(Packing(1, ((0, 1),)))
        assert alloc.durations == (Fraction(1),)
        assert utility_time(alloc, 0) == 1

    def test_k6_seventeen_bins(self, inst_k6):
        result = exact_kbp(inst_k6, 9)
        alloc = uniform_allocation(result.packing)
        for agent in range(inst_k6.n):
            assert utility_time(alloc, agent) == Fraction(9, 17)

    def test_empty_packing_rejected(self):
        with pytest.raises(ValueError):
            uniform_allocation(Packing(1, ()))


class TestUtilities:
    def test_disconnected_agent(self):
        alloc = TimeAllocation(((0,),), (Fraction(1),))
        assert utility_time(alloc, 1) == 0

    def test_weighted_sum(self):
        alloc = TimeAllocation(((0,), (0, 1), (1,)), (Fraction(1, 2), Fraction(1, 4), Fraction(1, 4)))
        assert utility_time(alloc, 0) == Fraction(3, 4)
        assert utility_time(alloc, 1) == Fraction(1, 2)

    def test_watts_equalizing_example(self):
        inst = Instance.from_kw([3, 5], 5)
        alloc = TimeAllocation(((0,), (1,)), (Fraction(5, 8), Fraction(3, 8)))
        assert utility_watts(alloc, inst, 0) == pytest.approx(15 / 8)
        assert utility_watts(alloc, inst, 1) == pytest.approx(15 / 8)

    def test_watts_uniform_case(self, inst_intro):
        alloc = uniform_allocation(ffk(inst_intro, 2))
        q = len(alloc.bins)
        for agent, d in enumerate(inst_intro.demands):
            assert utility_watts(alloc, inst_intro, agent) == pytest.approx(d.kw * 2 / q)

    def test_unknown_agent(self, inst_intro):
        alloc = uniform_allocation(ffk(inst_intro, 1))
        with pytest.raises(ValueError):
            utility_watts(alloc, inst_intro, 99)


class TestComfort:
    def test_constant_history(self):
        history = np.full((24 * 7 * 6, 3), 2.5)
        assert comfort(history, 1, 1000) == 1.0

    def test_single_hot_hour(self):
        hours = 24 * 7 * 6
        history = np.zeros((hours, 1))
        history[10::24 * 7, 0] = 4.0  # one hour-of-week spike
        assert comfort(history, 0, 24 * 7 * 5 + 10) == 1.0
        assert comfort(history, 0, 24 * 7 * 5 + 11) == 0.0

    def test_matches_bruteforce(self):
        rng = np.random.default_rng(5)
        hours = 24 * 7 * 6
        history = rng.uniform(0.1, 2.0, size=(hours, 4))
        matrix = comfort_matrix(history)
        for agent in (0, 3):
            raw = np.empty(hours)
            for t in range(hours):
                prior = [t - w * 168 for w in (1, 2, 3, 4) if t - w * 168 >= 0]
                raw[t] = history[prior, agent].mean() if prior else history[t, agent]
            expected = raw / raw.max()
            for t in (0, 167, 168, 1000, hours - 1):
                assert comfort(history, agent, t) == pytest.approx(expected[t])
                assert matrix[t, agent] == pytest.approx(expected[t])

    def test_empty_history_rejected(self):
        with pytest.raises(ValueError):
            comfort(np.zeros((0, 1)), 0, 0)


class TestHourReport:
    def test_uniform_equal_demands(self):
        inst = Instance.from_kw([2, 2, 2], 4)
        alloc = uniform_allocation(ffk(inst, 2))
        grid = hour_report(alloc, inst, [1.0, 1.0, 1.0])
        assert all(grid[m].max_utility_difference == 0 for m in ("time", "watts", "comfort"))

    def test_watts_model_values(self):
        inst = Instance.from_kw([3, 5], 5)
        alloc = TimeAllocation(((0,), (1,)), (Fraction(5, 8), Fraction(3, 8)))
        rep = hour_report(alloc, inst, [1.0, 1.0])["watts"]
        assert rep.utilitarian == pytest.approx(3.75)
        assert rep.egalitarian == pytest.approx(1.875)
        assert rep.max_utility_difference == pytest.approx(0.0)

    def test_time_model_uniform_zero_spread(self, inst_371):
        alloc = uniform_allocation(ffk(inst_371, 3))
        rep = hour_report(alloc, inst_371, [1.0] * inst_371.n)["time"]
        assert rep.max_utility_difference == 0.0


def test_supply_conservation(inst_371):
    alloc = uniform_allocation(ffk(inst_371, 2))
    total = sum(utility_watts(alloc, inst_371, a) for a in range(inst_371.n))
    assert total <= inst_371.capacity.kw + 1e-9
    for a in range(inst_371.n):
        assert utility_watts(alloc, inst_371, a) <= inst_371.demands[a].kw + 1e-12
