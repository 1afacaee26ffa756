"""Command-line entry points: single runs and the experiment grid."""

import csv
import io
import json
import os
import sys
from pathlib import Path

import click

from .experiments import DEMAND_LEVELS, GridConfig, run_grid, write_report
from .sim import CONTROLLER_NAMES, ConfigError, MetricsRecord, SimConfig, run


@click.group()
def main():
    """Signalized-intersection simulator and experiment harness."""


def _fmt(x) -> str:
    return format(float(x), ".6g")


@main.command("run")
@click.option("--controller", required=True,
              type=click.Choice(CONTROLLER_NAMES, case_sensitive=False))
@click.option("--demand", required=True, type=float,
              help="Arrival rate in veh/hour/lane.")
@click.option("--seed", required=True, type=int)
@click.option("--duration", default=3600, type=int, show_default=True,
              help="Simulated seconds.")
@click.option("--trace", type=click.Path(dir_okay=False), default=None,
              help="Write a per-step detection trace CSV here.")
@click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False),
              default=None, help="JSON file with SimConfig field overrides.")
def cmd_run(controller, demand, seed, duration, trace, config_path):
    """Run one simulation and print its seven-factor metrics row."""
    if demand < 0:
        raise click.BadParameter("demand must be nonnegative", param_hint="--demand")
    if duration <= 0:
        raise click.BadParameter("duration must be positive", param_hint="--duration")
    overrides = {}
    if config_path:
        try:
            overrides = json.loads(Path(config_path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            click.echo(f"error: bad config file: {exc}", err=True)
            sys.exit(1)
    try:
        cfg = SimConfig(
            demand_veh_per_hour_per_lane=demand,
            seed=seed,
            duration_s=duration,
            controller=controller.lower(),
            **overrides,
        )
        cfg.validate()
    except (ConfigError, TypeError) as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(1)

    trace_writer = None
    trace_file = None
    trace_csv = None
    if trace:
        trace_file = open(trace, "w", newline="")
        trace_csv = csv.writer(trace_file, lineterminator="\n")
        trace_csv.writerow(["t", "lane", "v_c", "c_fva", "v_c_pct", "l_w", "responsible_rse"])

        def trace_writer(t, lane, v_c, c_fva, v_c_pct, l_w, rse):
            trace_csv.writerow([_fmt(t), lane, v_c, c_fva, _fmt(v_c_pct), _fmt(l_w), rse])

    try:
        metrics = run(cfg, trace_writer=trace_writer)
    finally:
        if trace_file:
            trace_file.close()

    out = io.StringIO()
    w = csv.writer(out, lineterminator="\n")
    w.writerow(["controller", "demand", "seed"] + list(MetricsRecord.FIELDS))
    w.writerow([cfg.controller, _fmt(demand), seed] + [_fmt(v) for v in metrics.as_tuple()])
    click.echo(out.getvalue(), nl=False)


@main.command("experiment")
@click.option("--config", "config_path", required=True,
              type=click.Path(exists=True, dir_okay=False))
@click.option("--jobs", default=1, type=int, show_default=True,
              help="Parallel workers for replications.")
@click.option("--output", "output_dir", type=click.Path(file_okay=False), default=None,
              help="Report directory (falls back to CROSSFLOW_OUTPUT_DIR, then the "
                   "config's output_dir, then ./crossflow-report).")
def cmd_experiment(config_path, jobs, output_dir):
    """Run the replicated controller x demand grid and write report files."""
    if jobs < 1:
        raise click.BadParameter("jobs must be >= 1", param_hint="--jobs")
    try:
        raw = json.loads(Path(config_path).read_text())
        grid = GridConfig.from_dict(raw)
    except (OSError, json.JSONDecodeError, ConfigError, KeyError, TypeError) as exc:
        click.echo(f"error: bad grid config: {exc}", err=True)
        sys.exit(1)

    outdir = (
        output_dir
        or os.environ.get("CROSSFLOW_OUTPUT_DIR")
        or raw.get("output_dir")
        or "crossflow-report"
    )
    try:
        report = run_grid(grid, jobs=jobs)
    except ConfigError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(1)
    paths = write_report(report, outdir)

    click.echo(f"wrote {len(paths)} report files to {outdir}")
    for level, scores in report.overall_scores.items():
        ranked = sorted(scores.items(), key=lambda kv: -kv[1])
        line = ", ".join(f"{m}={_fmt(s)}" for m, s in ranked)
        click.echo(f"{level} ({_fmt(DEMAND_LEVELS[level])} veh/h/lane): {line}")


if __name__ == "__main__":
    main()
