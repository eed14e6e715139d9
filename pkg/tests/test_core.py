import pytest
from hypothesis import given, strategies as st

from kbpack.core import (
    Instance,
    Packing,
    Size,
    bin_load,
    validate_copies,
    validate_packing,
    welfare,
)


class TestSize:
    def test_parse_decimal_string(self):
        assert Size.from_str("12.5") == 12_500_000
        assert Size.from_str("0.000001") == 1
        assert str(Size.from_str("3.0")) == "3"
        assert str(Size.from_str("4.25")) == "4.25"

    def test_rejects_more_than_six_decimals(self):
        with pytest.raises(ValueError):
            Size.from_str("1.0000001")

    def test_rejects_garbage_and_negative(self):
        with pytest.raises(ValueError):
            Size.from_str("abc")
        with pytest.raises(ValueError):
            Size(-1)

    def test_sum_is_exact(self):
        parts = [Size.from_str("0.1")] * 10
        assert sum(parts) == Size.from_str("1.0")


class TestInstance:
    def test_rejects_demand_above_capacity(self):
        with pytest.raises(ValueError):
            Instance.from_kw([5, 11], 10)

    def test_rejects_zero_demand(self):
        with pytest.raises(ValueError):
            Instance.from_kw([0, 1], 10)

    def test_size_classes(self):
        inst = Instance.from_kw([3, 4, 3, 4, 3], 12)
        sizes, counts, members = inst.size_classes()
        assert sizes == (3_000_000, 4_000_000)
        assert counts == (3, 2)
        assert members == ((0, 2, 4), (1, 3))


class TestValidatePacking:
    def test_intro_example_ok(self, inst_intro):
        packing = Packing(2, ((0, 1), (1, 2), (2, 0)))
        assert validate_packing(inst_intro, packing).ok

    def test_duplicate_in_bin(self, inst_intro):
        packing = Packing(2, ((0, 1), (1, 2, 2), (0,)))
        verdict = validate_packing(inst_intro, packing)
        assert not verdict.ok
        assert verdict.bin_index == 1
        assert "duplicate agent 2" in verdict.reason

    def test_single_item(self):
        inst = Instance.from_kw([5], 5)
        assert validate_packing(inst, Packing(1, ((0,),))).ok

    def test_wrong_multiplicity(self, inst_intro):
        verdict = validate_packing(inst_intro, Packing(2, ((0, 1), (1, 2))))
        assert not verdict.ok
        assert "appears" in verdict.reason

    def test_capacity_overflow(self):
        inst = Instance.from_kw([2, 2], 3)
        verdict = validate_packing(inst, Packing(1, ((0, 1),)))
        assert not verdict.ok
        assert "exceeds capacity" in verdict.reason

    def test_copies_variant(self, inst_intro):
        bins = [(0, 1), (0, 2)]
        assert validate_copies(inst_intro, bins, [2, 1, 1]).ok
        assert not validate_copies(inst_intro, bins, [2, 2, 1]).ok


class TestBinLoad:
    def test_examples(self):
        inst = Instance.from_kw([10, 20, 11], 31)
        assert bin_load(inst, [0, 1]) == Size.from_kw(30)
        assert bin_load(inst, []) == 0
        inst2 = Instance.from_kw([3, 4], 10)
        assert bin_load(inst2, [0, 1]) == Size.from_kw(7)


class TestWelfare:
    def test_uniform(self):
        rep = welfare([1, 1, 1])
        assert (rep.utilitarian, rep.egalitarian, rep.max_utility_difference) == (3, 1, 0)

    def test_paper_vector(self):
        rep = welfare([1, 2.2, 2.2])
        assert rep.utilitarian == pytest.approx(5.4, abs=1e-9)
        assert rep.egalitarian == pytest.approx(1.0, abs=1e-9)
        assert rep.max_utility_difference == pytest.approx(1.2, abs=1e-9)

    def test_direct(self):
        rep = welfare([0.5, 2, 2.5])
        assert (rep.utilitarian, rep.egalitarian, rep.max_utility_difference) == (5.0, 0.5, 2.0)

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            welfare([])

    def test_egalitarian_at_most_mean(self):
        rep = welfare([0.3, 0.9, 2.4])
        assert rep.egalitarian <= rep.utilitarian / 3


instances = st.integers(2, 40).flatmap(
    lambda cap: st.lists(st.integers(1, cap), min_size=1, max_size=8).map(
        lambda ds: Instance(tuple(Size(d * 10**6) for d in ds), Size(cap * 10**6))
    )
)


@given(instances, st.integers(1, 4))
def test_serialization_round_trip_preserves_verdict(inst, k):
    from kbpack.greedy import ffk

    packing = ffk(inst, k)
    inst2 = Instance.from_json(inst.to_json())
    packing2 = Packing.from_json(packing.to_json())
    assert inst2 == inst
    assert packing2 == packing
    assert validate_packing(inst2, packing2) == validate_packing(inst, packing)


@given(instances, st.integers(1, 4))
def test_valid_packing_has_at_least_k_bins_and_conserves_volume(inst, k):
    from kbpack.greedy import ffk

    packing = ffk(inst, k)
    assert validate_packing(inst, packing).ok
    assert len(packing.bins) >= k
    assert sum(int(bin_load(inst, b)) for b in packing.bins) == k * inst.volume()
