import csv
import json

import pytest

from src.Benchmark import (COUNTER_COLUMNS, SweepConfig, format_table, run_benchmark, sample_queries, scaling_fit,
                           write_plots, write_results)
from src.CoreStructures import core_decomposition
from src.ProfiledGraph import generate_graph

TIMED = {"build_seconds"} | {f"{a}_seconds" for a in ("basic", "incre", "adv-p")}


@pytest.fixture(scope="module")
def bench_graph():
    return generate_graph(200, 800, 16, 3, 6, 40, seed=5)


@pytest.fixture(scope="module")
def small_config():
    return SweepConfig(sweeps=("vertex", "gptree", "k"), fractions=(0.5, 1.0), k_values=(2, 3), k=3, queries=4,
                       workers=2)


@pytest.fixture(scope="module")
def report(bench_graph, small_config):
    return run_benchmark(bench_graph, small_config, progress=False)


def untimed(records):
    return [{key: value for key, value in r.items() if key not in TIMED} for r in records]


class TestSweep:
    def test_cells_in_config_order(self, report):
        assert [(r["sweep"], r["value"]) for r in report.records] == [
            ("vertex", 0.5), ("vertex", 1.0), ("gptree", 0.5), ("gptree", 1.0), ("k", 2), ("k", 3)]

    def test_full_fraction_is_the_whole_graph(self, report, bench_graph):
        full = report.records[1]
        assert full["n"] == bench_graph.n and full["m"] == bench_graph.m
        assert full["size"] == full["entries"] + full["m"]

    def test_counters_are_seed_deterministic(self, bench_graph, small_config, report):
        again = run_benchmark(bench_graph, small_config, progress=False)
        assert untimed(again.records) == untimed(report.records)

    def test_verified_counts_are_ordered(self, report):
        for r in report.records:
            assert r["adv-p_verified"] <= r["incre_verified"]
            assert r["incre_verified"] <= r["basic_generated"]
            assert r["incre_communities"] == r["basic_communities"] == r["adv-p_communities"]

    def test_locations_count_first_algorithm_communities(self, report):
        # communities of an empty profile have no location
        for r in report.records:
            assert sum(r[f"location_{level}"] for level in range(1, 6)) <= r["basic_communities"]

    def test_queries_have_core_number_k(self, bench_graph):
        cores = core_decomposition(bench_graph)
        queries = sample_queries(bench_graph, 3, 10, seed=0)
        assert queries == sorted(queries)
        assert all(cores[q] >= 3 for q in queries)
        assert queries == sample_queries(bench_graph, 3, 10, seed=0)


class TestOutput:
    def test_write_results(self, report, tmp_path):
        paths = write_results(report, tmp_path / "out")
        data = json.loads(paths[0].read_text())
        assert len(data["records"]) == 6
        assert data["config"]["workers"] == 2
        with open(paths[1], newline="") as f:
            rows = list(csv.DictReader(f))
        assert len(rows) == 6
        assert all(f"incre_{column}" in rows[0] for column in COUNTER_COLUMNS)

    def test_write_plots(self, report, tmp_path):
        for path in write_plots(report, tmp_path):
            assert path.exists() and path.stat().st_size > 0

    def test_table(self, report):
        lines = format_table(report.records, report.config.algorithms).splitlines()
        assert len(lines) == 7
        assert "adv-p_verified" in lines[0]


class TestScalingFit:
    def test_linear_records(self):
        records = [{"sweep": "vertex", "size": s, "build_seconds": 0.5 + 0.001 * s} for s in (100, 200, 400, 800)]
        fit = scaling_fit(records)
        assert fit["slope"] == pytest.approx(0.001)
        assert fit["r_squared"] == pytest.approx(1.0)

    def test_needs_two_sizes(self):
        assert scaling_fit([{"sweep": "vertex", "size": 10, "build_seconds": 1.0}]) is None
        assert scaling_fit([]) is None


class TestConfig:
    @pytest.mark.parametrize("kwargs", [
        {"sweeps": ("edges",)},
        {"algorithms": ("greedy",)},
        {"fractions": (0.0,)},
        {"fractions": (1.5,)},
        {"k_values": (-1,)},
        {"queries": 0},
        {"workers": 0},
    ])
    def test_rejects(self, kwargs):
        with pytest.raises(ValueError):
            SweepConfig(**kwargs)

    def test_normalizes_case(self):
        assert SweepConfig(sweeps=("Vertex",), algorithms=("ADV-P",)).algorithms == ("adv-p",)


@pytest.mark.slow
def test_build_time_scales_linearly():
    g = generate_graph(50_000, 500_000, 64, 4, 20, 500, seed=0)
    config = SweepConfig(sweeps=("vertex",), fractions=(0.2, 0.4, 0.6, 0.8, 1.0), queries=1, algorithms=("incre",))
    report = run_benchmark(g, config, progress=False)
    assert report.fit["r_squared"] >= 0.95
