"""Replicated evaluation harness: sample sizing, the controller x demand
grid, points-order ranking and report emission."""

import concurrent.futures
import csv
import io
import json
import math
from dataclasses import dataclass, field

from .sim import ConfigError, MetricsRecord, SimConfig, observe_stability, simulate

__all__ = [
    "ConfidenceParams",
    "DEMAND_LEVELS",
    "GridConfig",
    "Report",
    "observe_stability",
    "rank_methods",
    "run_grid",
    "sample_size",
    "write_report",
]


@dataclass(frozen=True)
class ConfidenceParams:
    z: float = 1.96
    sigma: float = 0.5
    e: float = 0.05

    def __post_init__(self):
        if min(self.z, self.sigma, self.e) <= 0:
            raise ValueError("confidence parameters must be positive")


# Demand levels: name -> veh/hour/lane.
DEMAND_LEVELS = {
    "very-small": 250.0,
    "small": 375.0,
    "medium": 750.0,
    "large": 1125.0,
    "very-large": 1300.0,
}


def sample_size(population: int, params: ConfidenceParams = ConfidenceParams()) -> int:
    """Replication count for a finite population at the given confidence.

    n0 = (z*sigma/e)^2 corrected for the finite population, rounded to the
    nearest integer.
    """
    if population < 1:
        raise ValueError("population must be >= 1")
    n0 = (params.z * params.sigma / params.e) ** 2
    n = n0 * population / (n0 + population - 1)
    return math.floor(n + 0.5)


# The six measured factors entering the ranking, with their better-is
# directions; stability is handled multiplicatively.
RANKED_FACTORS = (
    ("departure_arrival_pct", "higher"),
    ("avg_queue_veh", "lower"),
    ("max_queue_veh", "lower"),
    ("avg_wait_s", "lower"),
    ("max_wait_s", "lower"),
    ("green_time_utilization", "higher"),
)


class DimensionMismatch(ValueError):
    """Ragged metric matrix passed to the ranking."""


def rank_methods(metrics_by_method: dict) -> dict:
    """Points-order ranking of per-method seven-factor records.

    For each measured factor the best of the M stable methods earns M points
    and the worst 1; ties share the average of their positions' points.
    Unstable methods are excluded from the per-factor ranking and score 0.
    Returns {"points": {method: {factor: pts}}, "overall": {method: score}}.
    """
    if len(metrics_by_method) < 2:
        raise DimensionMismatch("ranking needs at least two methods")
    for name, rec in metrics_by_method.items():
        if len(rec) != len(MetricsRecord.FIELDS):
            raise DimensionMismatch(f"method {name!r} has a ragged metrics row")
    records = {m: dict(zip(MetricsRecord.FIELDS, rec)) for m, rec in metrics_by_method.items()}
    stable = [m for m, r in records.items() if r["stability"] >= 1]
    points = {m: {} for m in metrics_by_method}
    n = len(stable)
    for factor, direction in RANKED_FACTORS:
        values = {m: records[m][factor] for m in stable}
        # Position 1 = worst ... n = best; ties average their positions.
        worst_first = sorted(values, key=lambda m: values[m],
                             reverse=(direction == "lower"))
        for m in stable:
            positions = [i + 1 for i, mm in enumerate(worst_first)
                         if values[mm] == values[m]]
            points[m][factor] = sum(positions) / len(positions)
        for m in metrics_by_method:
            if m not in values:
                points[m][factor] = 0.0
    overall = {
        m: records[m]["stability"] * sum(points[m].values())
        for m in metrics_by_method
    }
    return {"points": points, "overall": overall}


@dataclass(frozen=True)
class ControllerSpec:
    name: str
    params: dict = field(default_factory=dict)

    @property
    def label(self) -> str:
        return self.params.get("label", self.name)


@dataclass(frozen=True)
class GridConfig:
    controllers: tuple
    demand_levels: tuple = tuple(DEMAND_LEVELS)
    duration_s: int = 3600
    seed_base: int = 1
    replications: object = 20  # int, or the string "paper"
    sim_overrides: dict = field(default_factory=dict)

    @staticmethod
    def from_dict(raw: dict) -> "GridConfig":
        try:
            controllers = tuple(
                ControllerSpec(c["name"], dict(c.get("params", {})))
                if isinstance(c, dict) else ControllerSpec(str(c))
                for c in raw["controllers"]
            )
        except KeyError as exc:
            raise ConfigError(f"grid config missing key: {exc}") from exc
        levels = tuple(raw.get("demand_levels", tuple(DEMAND_LEVELS)))
        for lvl in levels:
            if lvl not in DEMAND_LEVELS:
                raise ConfigError(f"unknown demand level {lvl!r}")
        reps = raw.get("replications", 20)
        if reps != "paper" and (not isinstance(reps, int) or reps < 1):
            raise ConfigError("replications must be a positive integer or 'paper'")
        return GridConfig(
            controllers=controllers,
            demand_levels=levels,
            duration_s=int(raw.get("duration_s", 3600)),
            seed_base=int(raw.get("seed_base", 1)),
            replications=reps,
            sim_overrides=dict(raw.get("sim", {})),
        )

    def replication_count(self, level: str) -> int:
        if self.replications == "paper":
            return sample_size(int(DEMAND_LEVELS[level]))
        return int(self.replications)


@dataclass
class Report:
    """Aggregated grid output: one table per demand level plus rankings."""

    config: dict
    tables: dict  # level -> {method: MetricsRecord tuple}
    rankings: dict  # level -> rank_methods() output
    overall_scores: dict  # level -> {method: score}


def _run_cell(args):
    cfg, check = args
    metrics, _ = simulate(cfg)
    return metrics.as_tuple()


def run_grid(grid: GridConfig, jobs: int = 1, check_invariants: bool = False) -> Report:
    """Execute the full grid and aggregate replication means.

    Replication r of every cell uses seed seed_base + r, so all controllers
    face identical arrival streams. Results are keyed by task index: the
    report is byte-identical for any jobs count.
    """
    tasks = []
    index = []
    for level in grid.demand_levels:
        reps = grid.replication_count(level)
        for ctrl in grid.controllers:
            for r in range(reps):
                cfg = SimConfig(
                    demand_veh_per_hour_per_lane=DEMAND_LEVELS[level],
                    seed=grid.seed_base + r,
                    duration_s=grid.duration_s,
                    controller=ctrl.name,
                    controller_params={k: v for k, v in ctrl.params.items() if k != "label"},
                    check_invariants=check_invariants,
                    **grid.sim_overrides,
                )
                cfg.validate()
                tasks.append((cfg, check_invariants))
                index.append((level, ctrl.label))

    if jobs > 1:
        with concurrent.futures.ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_run_cell, tasks, chunksize=8))
    else:
        results = [_run_cell(t) for t in tasks]

    cells = {}
    for (level, label), rec in zip(index, results):
        cells.setdefault((level, label), []).append(rec)

    tables = {}
    rankings = {}
    scores = {}
    n_factors = len(MetricsRecord.FIELDS)
    for level in grid.demand_levels:
        table = {}
        for ctrl in grid.controllers:
            rows = cells[(level, ctrl.label)]
            means = [sum(r[i] for r in rows) / len(rows) for i in range(n_factors)]
            # Stability aggregates as logical AND over replications.
            means[n_factors - 1] = float(all(r[n_factors - 1] >= 1 for r in rows))
            table[ctrl.label] = tuple(means)
        tables[level] = table
        ranking = rank_methods(table)
        rankings[level] = ranking
        scores[level] = ranking["overall"]

    cfg_dict = {
        "controllers": [{"name": c.name, "params": c.params} for c in grid.controllers],
        "demand_levels": list(grid.demand_levels),
        "duration_s": grid.duration_s,
        "seed_base": grid.seed_base,
        "replications": grid.replications,
        "sim": grid.sim_overrides,
    }
    return Report(config=cfg_dict, tables=tables, rankings=rankings, overall_scores=scores)


def _fmt(x) -> str:
    return format(float(x), ".6g")


FACTOR_ROWS = MetricsRecord.FIELDS


def table_csv(report: Report, level: str) -> str:
    """One demand-level table: rows = factors, columns = methods."""
    methods = list(report.tables[level])
    out = io.StringIO()
    w = csv.writer(out, lineterminator="\n")
    w.writerow(["factor"] + methods)
    for i, factor in enumerate(FACTOR_ROWS):
        w.writerow([factor] + [_fmt(report.tables[level][m][i]) for m in methods])
    return out.getvalue()


def ranking_csv(report: Report) -> str:
    out = io.StringIO()
    w = csv.writer(out, lineterminator="\n")
    factors = [f for f, _ in RANKED_FACTORS]
    w.writerow(["demand_level", "method"] + factors + ["overall"])
    for level, ranking in report.rankings.items():
        for method, pts in ranking["points"].items():
            w.writerow(
                [level, method]
                + [_fmt(pts[f]) for f in factors]
                + [_fmt(ranking["overall"][method])]
            )
    return out.getvalue()


def overall_scores_csv(report: Report) -> str:
    out = io.StringIO()
    w = csv.writer(out, lineterminator="\n")
    w.writerow(["demand_level", "method", "overall_score"])
    for level, scores in report.overall_scores.items():
        for method, score in scores.items():
            w.writerow([level, method, _fmt(score)])
    return out.getvalue()


def write_report(report: Report, outdir):
    """Write the per-level tables, ranking, score series and JSON bundle."""
    from pathlib import Path

    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    paths = []
    for level in report.tables:
        p = outdir / f"table_{level}.csv"
        p.write_text(table_csv(report, level), newline="")
        paths.append(p)
    (outdir / "ranking.csv").write_text(ranking_csv(report), newline="")
    (outdir / "overall_scores.csv").write_text(overall_scores_csv(report), newline="")
    bundle = {
        "config": report.config,
        "factors": list(FACTOR_ROWS),
        "tables": {lvl: {m: list(rec) for m, rec in tbl.items()}
                   for lvl, tbl in report.tables.items()},
        "rankings": report.rankings,
        "overall_scores": report.overall_scores,
    }
    (outdir / "report.json").write_text(
        json.dumps(bundle, indent=2, sort_keys=True) + "\n", newline=""
    )
    return paths + [outdir / "ranking.csv", outdir / "overall_scores.csv", outdir / "report.json"]
