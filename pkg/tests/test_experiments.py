import json

import pytest

from crossflow.experiments import (
    ConfidenceParams,
    DEMAND_LEVELS,
    DimensionMismatch,
    GridConfig,
    rank_methods,
    run_grid,
    sample_size,
    table_csv,
    write_report,
)
from crossflow.sim import ConfigError, MetricsRecord


class TestSampleSize:
    @pytest.mark.parametrize("population,expected", [
        (250, 152), (375, 190), (750, 254), (1125, 287), (1300, 297),
    ])
    def test_published_values_exact(self, population, expected):
        assert sample_size(population) == expected

    def test_large_population_limit(self):
        assert sample_size(10**9) == 384

    def test_rejects_empty_population(self):
        with pytest.raises(ValueError):
            sample_size(0)

    def test_rejects_bad_confidence_params(self):
        with pytest.raises(ValueError):
            ConfidenceParams(e=0.0)


def record(**kw):
    base = dict(departure_arrival_pct=90.0, avg_queue_veh=10.0, max_queue_veh=20.0,
                avg_wait_s=50.0, max_wait_s=100.0, green_time_utilization=0.5,
                stability=1)
    base.update(kw)
    return tuple(base[f] for f in MetricsRecord.FIELDS)


class TestRanking:
    def test_dominant_method_scores_30_among_5(self):
        methods = {
            "m1": record(departure_arrival_pct=99, avg_queue_veh=1, max_queue_veh=2,
                         avg_wait_s=5, max_wait_s=10, green_time_utilization=0.9),
            "m2": record(departure_arrival_pct=95, avg_queue_veh=3, max_queue_veh=6,
                         avg_wait_s=20, max_wait_s=40, green_time_utilization=0.7),
            "m3": record(departure_arrival_pct=90, avg_queue_veh=5, max_queue_veh=10,
                         avg_wait_s=30, max_wait_s=60, green_time_utilization=0.5),
            "m4": record(departure_arrival_pct=85, avg_queue_veh=7, max_queue_veh=14,
                         avg_wait_s=40, max_wait_s=80, green_time_utilization=0.3),
            "m5": record(departure_arrival_pct=80, avg_queue_veh=9, max_queue_veh=18,
                         avg_wait_s=50, max_wait_s=99, green_time_utilization=0.1),
        }
        out = rank_methods(methods)
        assert out["overall"]["m1"] == 30.0
        assert out["overall"]["m5"] == 6.0
        # per-factor points sum to 15 absent ties
        for factor in out["points"]["m1"]:
            assert sum(out["points"][m][factor] for m in methods) == 15.0

    def test_instability_forces_zero(self):
        methods = {
            "good": record(),
            "bad": record(departure_arrival_pct=99.9, avg_queue_veh=0.1,
                          max_queue_veh=0.2, avg_wait_s=1, max_wait_s=2,
                          green_time_utilization=0.99, stability=0),
            "mid": record(avg_queue_veh=12.0),
        }
        out = rank_methods(methods)
        assert out["overall"]["bad"] == 0.0
        # unstable methods are excluded from per-factor ranking
        assert all(v == 0.0 for v in out["points"]["bad"].values())
        assert out["points"]["good"]["avg_queue_veh"] == 2.0
        assert out["points"]["mid"]["avg_queue_veh"] == 1.0

    def test_tied_best_shares_average_points(self):
        methods = {f"m{i}": record(avg_queue_veh=10.0 + i) for i in range(5)}
        methods["m0"] = record(avg_queue_veh=5.0)
        methods["m1"] = record(avg_queue_veh=5.0)
        out = rank_methods(methods)
        assert out["points"]["m0"]["avg_queue_veh"] == 4.5
        assert out["points"]["m1"]["avg_queue_veh"] == 4.5

    def test_ragged_matrix_rejected(self):
        with pytest.raises(DimensionMismatch):
            rank_methods({"a": record(), "b": (1.0, 2.0)})
        with pytest.raises(DimensionMismatch):
            rank_methods({"a": record()})


SMALL_GRID = {
    "controllers": [{"name": "bm1"}, {"name": "dt3p"}],
    "demand_levels": ["very-small", "medium"],
    "duration_s": 600,
    "seed_base": 7,
    "replications": 3,
}


class TestGrid:
    def test_config_parsing_and_counts(self):
        grid = GridConfig.from_dict(SMALL_GRID)
        assert grid.replication_count("very-small") == 3
        paper = GridConfig.from_dict({**SMALL_GRID, "replications": "paper"})
        assert paper.replication_count("very-small") == 152
        assert paper.replication_count("medium") == 254

    def test_rejects_unknown_level_and_bad_reps(self):
        with pytest.raises(ConfigError):
            GridConfig.from_dict({**SMALL_GRID, "demand_levels": ["huge"]})
        with pytest.raises(ConfigError):
            GridConfig.from_dict({**SMALL_GRID, "replications": 0})

    def test_report_structure_and_aggregation_bounds(self):
        grid = GridConfig.from_dict(SMALL_GRID)
        report = run_grid(grid, check_invariants=True)
        assert set(report.tables) == {"very-small", "medium"}
        for level, table in report.tables.items():
            assert set(table) == {"bm1", "dt3p"}
            for rec in table.values():
                d = dict(zip(MetricsRecord.FIELDS, rec))
                assert d["max_queue_veh"] >= d["avg_queue_veh"]
                assert d["stability"] in (0.0, 1.0)
        assert set(report.overall_scores) == {"very-small", "medium"}

    def test_determinism_across_runs_and_jobs(self, tmp_path):
        grid = GridConfig.from_dict(SMALL_GRID)
        r1 = run_grid(grid, jobs=1)
        r2 = run_grid(grid, jobs=2)
        assert r1.tables == r2.tables
        p1 = tmp_path / "a"
        p2 = tmp_path / "b"
        write_report(r1, p1)
        write_report(r2, p2)
        for name in ["table_very-small.csv", "table_medium.csv", "ranking.csv",
                     "overall_scores.csv", "report.json"]:
            assert (p1 / name).read_bytes() == (p2 / name).read_bytes()

    def test_table_csv_shape(self):
        grid = GridConfig.from_dict(SMALL_GRID)
        report = run_grid(grid)
        text = table_csv(report, "very-small")
        lines = text.strip().split("\n")
        assert lines[0] == "factor,bm1,dt3p"
        assert len(lines) == 1 + len(MetricsRecord.FIELDS)
        assert "\r" not in text

    def test_report_json_round_trips(self, tmp_path):
        grid = GridConfig.from_dict(SMALL_GRID)
        report = run_grid(grid)
        write_report(report, tmp_path)
        bundle = json.loads((tmp_path / "report.json").read_text())
        assert bundle["config"]["seed_base"] == 7
        assert set(bundle["tables"]) == {"very-small", "medium"}
