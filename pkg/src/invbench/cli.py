"""Command-line entry point: instance generation, benchmark runs, report
export, experiment-log analysis, and the game server.

Exit codes: 0 success, 1 validation error, 2 runtime error, 3 failure
fraction over threshold.  Settings resolve as flags > config file >
environment (INVBENCH_*) > defaults, and the effective values are printed
at startup.
"""

from __future__ import annotations

import json
import os
import sys
from pathlib import Path

import click

from .agents import agent_config_from_spec
from .analysis import run_analysis
from .benchmark import BASE_SEED, build_benchmark
from .complementarity import AIBenchmark, load_samples
from .evaluate import (BenchmarkError, ResultRecord, export_report,
                       run_benchmark)
from .realdata import preprocess_real, real_instances
from .service import GameConfig, create_app, default_experiment_instances
from .storage import (append_jsonl, load_instances, read_jsonl,
                      save_instances, write_instance_dir)

EXIT_VALIDATION = 1
EXIT_RUNTIME = 2
EXIT_PARTIAL_FAILURE = 3


def _resolve(flag_value, config: dict, key: str, default, cast=None):
    """flags > config file > environment > default."""
    if flag_value is not None:
        return flag_value
    if key in config:
        return config[key]
    env = os.environ.get(f"INVBENCH_{key.upper()}")
    if env is not None:
        return cast(env) if cast else env
    return default


def _load_config(path) -> dict:
    if not path:
        return {}
    return json.loads(Path(path).read_text())


def _echo_settings(**settings) -> None:
    click.echo("settings: " + json.dumps(settings, sort_keys=True, default=str))


@click.group()
def main() -> None:
    """Inventory-control benchmark and experiment platform."""


@main.command()
@click.option("--out", "out_dir", type=click.Path(path_type=Path), default=None,
              help="Output directory (per-instance files plus a manifest).")
@click.option("--seed", type=int, default=None)
@click.option("--realizations", type=int, default=None)
@click.option("--pattern", "patterns", multiple=True,
              help="Restrict to pattern ids (e.g. p07).")
@click.option("--leadtime", "leads", multiple=True,
              type=click.Choice(["L0", "L4", "Lstoch"], case_sensitive=False),
              help="Restrict to lead-time configs.")
@click.option("--rho", "rhos", multiple=True, type=float,
              help="Restrict to critical fractiles.")
@click.option("--real-sales", type=click.Path(exists=True), default=None,
              help="Weekly sales CSV; enables real-instance conversion.")
@click.option("--real-meta", type=click.Path(exists=True), default=None,
              help="Article metadata CSV (required with --real-sales).")
@click.option("--bundle", type=click.Path(path_type=Path), default=None,
              help="Also write a single-file JSON bundle.")
@click.option("--config", "config_path", type=click.Path(exists=True), default=None)
def generate(out_dir, seed, realizations, patterns, leads, rhos,
             real_sales, real_meta, bundle, config_path):
    """Generate the synthetic benchmark (and optionally real instances)."""
    config = _load_config(config_path)
    seed = int(_resolve(seed, config, "seed", BASE_SEED, int))
    realizations = int(_resolve(realizations, config, "realizations", 2, int))
    out_dir = Path(_resolve(out_dir, config, "out", "benchmark"))
    _echo_settings(command="generate", out=out_dir, seed=seed,
                   realizations=realizations, patterns=list(patterns) or "all",
                   leadtime=list(leads) or "all", rho=list(rhos) or "all")
    try:
        instances = build_benchmark(
            realizations_per_variant=realizations, base_seed=seed,
            patterns=patterns or None, lead_labels=leads or None,
            fractiles=rhos or None)
    except KeyError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(EXIT_VALIDATION)
    if bool(real_sales) != bool(real_meta):
        click.echo("error: --real-sales and --real-meta go together", err=True)
        sys.exit(EXIT_VALIDATION)
    if real_sales:
        try:
            series = preprocess_real(real_sales, real_meta)
        except ValueError as exc:
            click.echo(f"error: {exc}", err=True)
            sys.exit(EXIT_VALIDATION)
        real = real_instances(series, seed=seed)
        instances = instances + real
        click.echo(f"real articles kept: {len(series)} -> {len(real)} instances")
    manifest = write_instance_dir(instances, out_dir, config={
        "seed": seed, "realizations": realizations,
        "patterns": list(patterns) or None, "leads": list(leads) or None,
        "rhos": list(rhos) or None})
    if bundle:
        save_instances(instances, bundle)
    click.echo(f"wrote {len(instances)} instances to {out_dir} "
               f"(manifest {manifest})")


@main.command()
@click.option("--instances", "instances_path", type=click.Path(exists=True),
              required=True, help="Instance bundle file or generated directory.")
@click.option("--method", "methods", multiple=True, required=True,
              help="Agent spec: or | mock:KIND[:method] | mock-file:PATH | llm:URL:MODEL[:method]")
@click.option("--out", "out_path", type=click.Path(path_type=Path), default=None,
              help="JSON-lines record store (appended; enables resume).")
@click.option("--trajectories", "traj_dir", type=click.Path(path_type=Path),
              default=None, help="Also export each trajectory as JSON lines "
              "(one period record per line) into this directory.")
@click.option("--parallelism", type=int, default=None)
@click.option("--seed", type=int, default=None)
@click.option("--failure-threshold", type=float, default=None)
@click.option("--resume/--no-resume", default=True)
@click.option("--config", "config_path", type=click.Path(exists=True), default=None)
def run(instances_path, methods, out_path, traj_dir, parallelism, seed,
        failure_threshold, resume, config_path):
    """Run agents over instances and store one record per episode."""
    config = _load_config(config_path)
    parallelism = int(_resolve(parallelism, config, "parallelism", 1, int))
    seed = int(_resolve(seed, config, "seed", 0, int))
    failure_threshold = float(_resolve(failure_threshold, config,
                                       "failure_threshold", 0.05, float))
    _echo_settings(command="run", instances=instances_path,
                   methods=list(methods), out=out_path,
                   parallelism=parallelism, seed=seed,
                   failure_threshold=failure_threshold, resume=resume)
    try:
        agents = [agent_config_from_spec(spec) for spec in methods]
        instances = load_instances(instances_path)
    except (ValueError, FileNotFoundError) as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(EXIT_VALIDATION)

    skip = None
    if out_path and resume and Path(out_path).exists():
        existing = [ResultRecord.from_dict(d) for d in read_jsonl(out_path)]
        skip = {(r.instance_id, r.method) for r in existing}
        click.echo(f"resume: {len(skip)} records already present")

    on_trajectory = None
    if traj_dir:
        from .sim import trajectory_to_lines
        traj_dir.mkdir(parents=True, exist_ok=True)

        def on_trajectory(traj, record):
            path = traj_dir / f"{record.instance_id}__{record.method}.jsonl"
            with path.open("w") as fh:
                for line in trajectory_to_lines(traj):
                    fh.write(json.dumps(line, sort_keys=True) + "\n")

    try:
        records, failures = run_benchmark(
            instances, agents, parallelism=parallelism, seed=seed,
            failure_threshold=failure_threshold, skip=skip,
            on_trajectory=on_trajectory)
    except BenchmarkError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(EXIT_PARTIAL_FAILURE)
    except Exception as exc:  # noqa: BLE001
        click.echo(f"error: {exc}", err=True)
        sys.exit(EXIT_RUNTIME)

    if out_path:
        append_jsonl(out_path, (r.to_dict() for r in records))
    click.echo(export_report(records, shape="cells", fmt="md",
                             group_by=("method",)))
    click.echo(f"{len(records)} episodes, {failures.summary()}")


@main.command()
@click.option("--records", "records_path", type=click.Path(exists=True),
              required=True)
@click.option("--shape", type=click.Choice(["table2", "fractiles", "cells"]),
              default="cells")
@click.option("--format", "fmt", type=click.Choice(["json", "csv", "md"]),
              default="md")
@click.option("--group-by", default="method",
              help="Comma-separated facets for --shape cells.")
@click.option("--out", "out_path", type=click.Path(path_type=Path), default=None)
def report(records_path, shape, fmt, group_by, out_path):
    """Aggregate a record store into a table."""
    _echo_settings(command="report", records=records_path, shape=shape,
                   format=fmt, group_by=group_by, out=out_path)
    records = [ResultRecord.from_dict(d) for d in read_jsonl(records_path)]
    if not records:
        click.echo("error: record store is empty", err=True)
        sys.exit(EXIT_VALIDATION)
    text = export_report(records, shape=shape, fmt=fmt,
                         group_by=tuple(group_by.split(",")))
    if out_path:
        Path(out_path).write_text(text)
        click.echo(f"wrote {out_path}")
    else:
        click.echo(text)


@main.command()
@click.option("--log", "log_path", type=click.Path(exists=True), required=True,
              help="Experiment log (JSON lines; sample rows are consumed).")
@click.option("--ai", "ai_path", type=click.Path(exists=True), required=True,
              help="Automated-benchmark JSON (means, optional runs, optional 'or').")
@click.option("--out", "out_path", type=click.Path(path_type=Path), default=None)
@click.option("--bootstrap", "replicates", type=int, default=None)
@click.option("--seed", type=int, default=None)
@click.option("--delta", type=float, default=0.0,
              help="Benefit margin for the lower bound.")
@click.option("--config", "config_path", type=click.Path(exists=True), default=None)
def analyze(log_path, ai_path, out_path, replicates, seed, delta, config_path):
    """Emit the full complementarity analysis report."""
    config = _load_config(config_path)
    replicates = int(_resolve(replicates, config, "bootstrap", 10_000, int))
    seed = int(_resolve(seed, config, "seed", 0, int))
    _echo_settings(command="analyze", log=log_path, ai=ai_path,
                   bootstrap=replicates, seed=seed, delta=delta, out=out_path)
    try:
        samples = load_samples(log_path)
        ai = AIBenchmark.from_json(ai_path)
        report_doc = run_analysis(samples, ai, replicates=replicates,
                                  seed=seed, delta=delta)
    except ValueError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(EXIT_VALIDATION)
    text = json.dumps(report_doc, indent=1, sort_keys=True)
    if out_path:
        Path(out_path).write_text(text + "\n")
        click.echo(f"wrote {out_path}")
    else:
        click.echo(text)


@main.command()
@click.option("--host", default="127.0.0.1")
@click.option("--port", type=int, default=None)
@click.option("--agent", "agent_spec", default=None,
              help="Agent spec for modes B/C (default mock:follow-or).")
@click.option("--instances", "instances_path", type=click.Path(exists=True),
              default=None, help="Bundle with exactly 3 instances "
              "(default: bundled experiment instances).")
@click.option("--seed", type=int, default=None)
@click.option("--allocator", type=click.Choice(["hash", "balanced"]), default=None)
@click.option("--log", "log_path", type=click.Path(path_type=Path), default=None,
              help="Durable event-log file.")
@click.option("--config", "config_path", type=click.Path(exists=True), default=None)
def serve(host, port, agent_spec, instances_path, seed, allocator,
          log_path, config_path):
    """Serve the human-in-the-loop game over HTTP."""
    config = _load_config(config_path)
    port = int(_resolve(port, config, "port", 8000, int))
    seed = int(_resolve(seed, config, "seed", BASE_SEED, int))
    agent_spec = _resolve(agent_spec, config, "agent", "mock:follow-or")
    allocator = _resolve(allocator, config, "allocator", "hash")
    instances_path = _resolve(instances_path, config, "instances", None)
    log_path = _resolve(log_path, config, "log", None)
    _echo_settings(command="serve", host=host, port=port, agent=agent_spec,
                   instances=instances_path, seed=seed, allocator=allocator,
                   log=log_path)
    try:
        agent = agent_config_from_spec(agent_spec)
        instances = (load_instances(instances_path) if instances_path
                     else default_experiment_instances(seed))
        game = GameConfig(instances=instances, agent=agent, seed=seed,
                          allocator=allocator,
                          log_path=Path(log_path) if log_path else None)
        app = create_app(game)
    except ValueError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(EXIT_VALIDATION)
    import uvicorn
    uvicorn.run(app, host=host, port=port, log_level="warning")


if __name__ == "__main__":
    main()
