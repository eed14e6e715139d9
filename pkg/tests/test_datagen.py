import numpy as np
import pytest

from kbpack.core import Size
from kbpack.datagen import (
    DemandSeries,
    daily_supply,
    generate_instance,
    generate_items,
    generate_timeseries,
    hour_instance,
    instances_to_jsonl,
    make_rng,
    perturb_demands,
    series_from_csv,
    series_to_csv,
)
from kbpack.exact import exact_kbp


class TestGenerateItems:
    def test_sum_is_exact(self):
        rng = make_rng(0)
        for _ in range(50):
            items = generate_items(Size(10**6), rng)
            assert sum(items) == 10**6
            assert all(0 < d <= 10**6 for d in items)

    def test_tiny_capacity_single_item(self):
        assert generate_items(Size(2), make_rng(1)) == [Size(2)]

    def test_seed_reproducible(self):
        a = generate_items(Size(10**7), make_rng(42))
        b = generate_items(Size(10**7), make_rng(42))
        assert a == b
        assert sum(a) == 10**7


class TestGenerateInstance:
    def test_opt_one_single_full_bin(self):
        gen = generate_instance(Size(10**6), 1, make_rng(3))
        assert gen.instance.volume() == 10**6
        assert gen.certificate_valid()

    def test_known_opt_confirmed_by_oracle(self):
        rng = make_rng(9)
        gen = generate_instance(Size(10**6), 3, rng)
        assert gen.instance.volume() == 3 * 10**6
        for k in (1, 2, 3):
            assert exact_kbp(gen.instance, k).bins == 3 * k

    def test_certificate_packs_full_bins(self):
        gen = generate_instance(Size(10**6), 4, make_rng(11))
        assert gen.certificate_valid()

    def test_known_opt_scales_through_k_five(self):
        gen = generate_instance(Size(10**6), 2, make_rng(21))
        for k in (2, 3, 4, 5):
            assert exact_kbp(gen.instance, k).bins == 2 * k

    def test_jsonl_round_trip_fields(self):
        gens = [generate_instance(Size(10**6), 2, make_rng(5)) for _ in range(2)]
        text = instances_to_jsonl(gens)
        import json

        lines = [json.loads(line) for line in text.strip().splitlines()]
        assert len(lines) == 2
        assert lines[0]["opt"] == 2
        assert len(lines[0]["certificate"]) == 2


class TestTimeseries:
    def test_constant_demand_supply_rule(self):
        demands = np.full((48, 5), 0.8)
        assert np.allclose(daily_supply(demands), 4.0)

    def test_peaked_profiles_create_shedding(self):
        series = generate_timeseries(30, 24 * 14, make_rng(7))
        assert len(series.shedding_hours()) > 0

    def test_requires_full_days(self):
        with pytest.raises(ValueError):
            generate_timeseries(3, 100, make_rng(0))

    def test_csv_round_trip(self):
        series = generate_timeseries(4, 48, make_rng(2))
        back = series_from_csv(series_to_csv(series))
        assert np.allclose(back.demands, series.demands, atol=1e-6)
        assert np.allclose(back.supply, series.supply, atol=1e-6)

    def test_hour_instance_caps_at_supply(self):
        series = DemandSeries(np.array([[5.0, 1.0]] * 24), np.full(24, 3.0))
        inst = hour_instance(series, 0)
        assert inst.capacity == Size.from_kw(3.0)
        assert inst.demands[0] == Size.from_kw(3.0)


class TestPerturb:
    def test_sigma_zero_identity(self):
        series = generate_timeseries(3, 24, make_rng(4))
        assert perturb_demands(series, 0.0, make_rng(1)) is series

    def test_empirical_sd(self):
        base = DemandSeries(np.full((24 * 50, 20), 5.0), np.full(24 * 50, 100.0))
        noisy = perturb_demands(base, 0.05, make_rng(8))
        sd = float((noisy.demands - 5.0).std())
        assert abs(sd - 0.05) / 0.05 < 0.05

    def test_clamped_positive(self):
        base = DemandSeries(np.full((24, 2), 0.01), np.full(24, 1.0))
        noisy = perturb_demands(base, 1.0, make_rng(3))
        assert (noisy.demands > 0).all()

    def test_negative_sigma_rejected(self):
        series = generate_timeseries(2, 24, make_rng(0))
        with pytest.raises(ValueError):
            perturb_demands(series, -0.1, make_rng(0))


def test_findings_report_format(tmp_path):
    from kbpack.experiments import ffdk_conjecture_bound, write_findings_report

    path = tmp_path / "findings.csv"
    write_findings_report(path, [(3, 2, 4, 13)])
    lines = path.read_text().splitlines()
    assert lines[0] == "instance_index,opt,k,ffdk_bins,conjectured_bound"
    assert lines[1] == f"3,2,4,13,{ffdk_conjecture_bound(8):.5f}"
