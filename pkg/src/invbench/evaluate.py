"""Batch episode runner and metrics aggregation.

Each (instance, agent) pair yields one result record with the normalized
reward, total reward, implicit critical fractile, and reporting facets.
Failed episodes are recorded and excluded from aggregates but always
surfaced in the failure report; a run aborts only if the failure fraction
exceeds the configured threshold.
"""

from __future__ import annotations

import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .agents import AgentConfig, AgentError, Decision, InsightStore, Method, decide, make_transport
from .benchmark import facets_of
from .policy import or_recommendation
from .sim import (Instance, Trajectory, TrajectoryStep,
                  implicit_critical_fractile, new_session, normalized_reward,
                  observe, step)

Z_95 = 1.96


class BenchmarkError(RuntimeError):
    pass


@dataclass(frozen=True)
class ResultRecord:
    instance_id: str
    method: str
    normalized_reward: float
    total_reward: float
    implicit_fractile: float
    facets: dict
    seed: int = 0
    runtime_s: float = field(default=0.0, compare=False)
    failed: bool = False
    error: Optional[str] = None

    def to_dict(self) -> dict:
        return {
            "instance_id": self.instance_id,
            "method": self.method,
            "normalized_reward": self.normalized_reward,
            "total_reward": self.total_reward,
            "implicit_fractile": self.implicit_fractile,
            "facets": dict(self.facets),
            "seed": self.seed,
            "runtime_s": self.runtime_s,
            "failed": self.failed,
            "error": self.error,
        }

    @staticmethod
    def from_dict(doc: dict) -> "ResultRecord":
        return ResultRecord(
            instance_id=doc["instance_id"],
            method=doc["method"],
            normalized_reward=doc["normalized_reward"],
            total_reward=doc["total_reward"],
            implicit_fractile=doc["implicit_fractile"],
            facets=dict(doc.get("facets", {})),
            seed=doc.get("seed", 0),
            runtime_s=doc.get("runtime_s", 0.0),
            failed=doc.get("failed", False),
            error=doc.get("error"),
        )


def run_episode(instance: Instance, agent: AgentConfig, *, seed: int = 0,
                transport=None) -> tuple[Trajectory, ResultRecord]:
    """Drive observe -> decide -> step over the full horizon, threading the
    insight store through.  Raises AgentError with period context if the
    agent cannot produce a decision."""
    start = time.perf_counter()
    if transport is None:
        transport = make_transport(agent)
    state = new_session(instance)
    insights = InsightStore()
    steps: list[TrajectoryStep] = []
    for _ in range(instance.horizon):
        obs = observe(state, instance)
        advice = or_recommendation(obs) if agent.method.uses_or_advice else None
        decision: Decision = decide(agent, instance, obs, or_advice=advice,
                                    insights=insights, transport=transport)
        insights.update(obs.period, decision.carry_over_insight)
        state, outcome = step(state, instance, decision.quantity)
        steps.append(TrajectoryStep(action=decision.quantity, outcome=outcome,
                                    rationale=decision.rationale or None))
    traj = Trajectory(instance_id=instance.id, steps=tuple(steps))
    record = ResultRecord(
        instance_id=instance.id,
        method=agent.label,
        normalized_reward=normalized_reward(traj, instance),
        total_reward=traj.total_reward,
        implicit_fractile=implicit_critical_fractile(traj),
        facets=facets_of(instance),
        seed=seed,
        runtime_s=time.perf_counter() - start,
    )
    return traj, record


@dataclass
class FailureReport:
    failures: list[ResultRecord] = field(default_factory=list)

    @property
    def count(self) -> int:
        return len(self.failures)

    def summary(self) -> str:
        if not self.failures:
            return "0 failures"
        lines = [f"{self.count} failures:"]
        lines += [f"  {r.instance_id} [{r.method}]: {r.error}" for r in self.failures[:10]]
        if self.count > 10:
            lines.append(f"  ... and {self.count - 10} more")
        return "\n".join(lines)


def run_benchmark(instances: Sequence[Instance], agents: Sequence[AgentConfig],
                  parallelism: int = 1, *, seed: int = 0,
                  failure_threshold: float = 0.05,
                  skip: Optional[set[tuple[str, str]]] = None,
                  on_record: Optional[Callable[[ResultRecord], None]] = None,
                  on_trajectory: Optional[Callable[[Trajectory, ResultRecord], None]] = None,
                  ) -> tuple[list[ResultRecord], FailureReport]:
    """Run every (instance, agent) pair.  Deterministic for the baseline and
    for mock agents regardless of ``parallelism``: results are sorted by
    (instance, method) at the end."""
    if not instances or not agents:
        raise ValueError("run_benchmark needs non-empty instances and agents")
    jobs = [(inst, agent) for agent in agents for inst in instances
            if not (skip and (inst.id, agent.label) in skip)]

    def one(job) -> ResultRecord:
        inst, agent = job
        try:
            traj, record = run_episode(inst, agent, seed=seed)
            if on_trajectory is not None:
                on_trajectory(traj, record)
            return record
        except AgentError as exc:
            return ResultRecord(
                instance_id=inst.id, method=agent.label,
                normalized_reward=0.0, total_reward=0.0, implicit_fractile=0.0,
                facets=facets_of(inst), seed=seed, failed=True,
                error=f"period {exc.period}: {exc}")

    if parallelism <= 1:
        records = [one(job) for job in jobs]
    else:
        with ThreadPoolExecutor(max_workers=parallelism) as pool:
            records = list(pool.map(one, jobs))

    records.sort(key=lambda r: (r.method, r.instance_id))
    if on_record:
        for record in records:
            on_record(record)
    report = FailureReport([r for r in records if r.failed])
    if jobs and report.count / len(jobs) > failure_threshold:
        raise BenchmarkError(
            f"failure fraction {report.count}/{len(jobs)} exceeds threshold "
            f"{failure_threshold}:\n{report.summary()}")
    return records, report


# --- aggregation ------------------------------------------------------------

@dataclass(frozen=True)
class AggregateCell:
    selector: tuple[tuple[str, object], ...]
    n: int
    mean: float
    ci_half_width: float
    mean_implicit_fractile: float

    def to_dict(self) -> dict:
        return {
            "selector": dict(self.selector),
            "n": self.n,
            "mean": self.mean,
            "ci_half_width": self.ci_half_width,
            "mean_implicit_fractile": self.mean_implicit_fractile,
        }


def _facet_value(record: ResultRecord, facet: str):
    if facet == "method":
        return record.method
    return record.facets.get(facet)


def aggregate(records: Sequence[ResultRecord],
              group_by: Sequence[str]) -> list[AggregateCell]:
    """Mean normalized reward with a 1.96*s/sqrt(n) half-width and the mean
    implicit fractile, per facet-selector cell, stably ordered."""
    usable = [r for r in records if not r.failed]
    groups: dict[tuple, list[ResultRecord]] = {}
    for record in usable:
        key = tuple((facet, _facet_value(record, facet)) for facet in group_by)
        groups.setdefault(key, []).append(record)
    cells = []
    for key in sorted(groups, key=lambda k: tuple(str(v) for _, v in k)):
        rows = groups[key]
        rewards = np.array([r.normalized_reward for r in rows])
        fractiles = np.array([r.implicit_fractile for r in rows])
        half = 0.0 if len(rows) < 2 else Z_95 * rewards.std(ddof=1) / np.sqrt(len(rows))
        cells.append(AggregateCell(
            selector=key, n=len(rows), mean=float(rewards.mean()),
            ci_half_width=float(half),
            mean_implicit_fractile=float(fractiles.mean())))
    return cells


# --- report export ----------------------------------------------------------

PATTERN_COLUMNS = [f"p{i:02d}" for i in range(1, 11)]


def _method_order(records: Sequence[ResultRecord]) -> list[str]:
    canonical = [m.value for m in Method]
    seen = {r.method for r in records if not r.failed}
    ordered = [m for m in canonical if m in seen]
    ordered += sorted(seen - set(ordered))
    return ordered


def pattern_table(records: Sequence[ResultRecord]) -> dict:
    """Per-pattern mean normalized rewards over deterministic-lead instances,
    plus 'all_synthetic' and 'real' columns; one row per method."""
    det = [r for r in records
           if not r.failed and (r.facets.get("lead_kind") or "fixed") == "fixed"]
    table: dict[str, dict[str, float | None]] = {}
    for method in _method_order(det):
        rows = [r for r in det if r.method == method]
        row: dict[str, float | None] = {}
        synth = [r for r in rows if r.facets.get("source") == "synthetic"]
        real = [r for r in rows if r.facets.get("source") == "real"]
        for pattern in PATTERN_COLUMNS:
            cell = [r.normalized_reward for r in synth
                    if r.facets.get("pattern") == pattern]
            row[pattern] = float(np.mean(cell)) if cell else None
        row["all_synthetic"] = (float(np.mean([r.normalized_reward for r in synth]))
                                if synth else None)
        row["real"] = (float(np.mean([r.normalized_reward for r in real]))
                       if real else None)
        table[method] = row
    return table


def fractile_table(records: Sequence[ResultRecord]) -> dict:
    """Mean implicit critical fractile per method per rho, plus the range."""
    usable = [r for r in records if not r.failed]
    rhos = sorted({r.facets.get("rho") for r in usable if r.facets.get("rho") is not None})
    table: dict[str, dict] = {}
    for method in _method_order(usable):
        rows = [r for r in usable if r.method == method]
        row = {}
        for rho in rhos:
            cell = [r.implicit_fractile for r in rows if r.facets.get("rho") == rho]
            row[str(rho)] = float(np.mean(cell)) if cell else None
        values = [v for v in row.values() if v is not None]
        row["range"] = (max(values) - min(values)) if len(values) > 1 else None
        table[method] = row
    return table


def _round(value, digits=4):
    return None if value is None else round(value, digits)


def export_report(records: Sequence[ResultRecord], shape: str = "cells",
                  fmt: str = "json",
                  group_by: Sequence[str] = ("method",)) -> str:
    """Stable, diff-friendly report in the requested shape and format."""
    import csv
    import io
    import json as _json

    if shape == "table2":
        table = pattern_table(records)
        columns = [*PATTERN_COLUMNS, "all_synthetic", "real"]
        rows = [{"method": m, **{c: _round(table[m][c]) for c in columns}}
                for m in table]
        header = ["method", *columns]
    elif shape == "fractiles":
        table = fractile_table(records)
        columns = sorted(next(iter(table.values())).keys(),
                         key=lambda c: (c == "range", c)) if table else []
        rows = [{"method": m, **{c: _round(table[m][c]) for c in columns}}
                for m in table]
        header = ["method", *columns]
    elif shape == "cells":
        cells = aggregate(records, group_by)
        header = [*group_by, "n", "mean", "ci_half_width", "mean_implicit_fractile"]
        rows = []
        for cell in cells:
            row = {facet: value for facet, value in cell.selector}
            row.update(n=cell.n, mean=_round(cell.mean),
                       ci_half_width=_round(cell.ci_half_width),
                       mean_implicit_fractile=_round(cell.mean_implicit_fractile))
            rows.append(row)
    else:
        raise ValueError(f"unknown report shape {shape!r}")

    if fmt == "json":
        return _json.dumps(rows, indent=1, sort_keys=True) + "\n"
    if fmt == "csv":
        buffer = io.StringIO()
        writer = csv.DictWriter(buffer, fieldnames=header)
        writer.writeheader()
        writer.writerows(rows)
        return buffer.getvalue()
    if fmt in ("md", "markdown"):
        def cell_text(v):
            if v is None:
                return "-"
            if isinstance(v, float):
                return f"{v:.3f}"
            return str(v)
        lines = ["| " + " | ".join(header) + " |",
                 "| " + " | ".join("---" for _ in header) + " |"]
        for row in rows:
            lines.append("| " + " | ".join(cell_text(row.get(h)) for h in header) + " |")
        return "\n".join(lines) + "\n"
    raise ValueError(f"unknown report format {fmt!r}")
