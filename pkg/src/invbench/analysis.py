"""End-to-end experiment-log analysis: point estimates, bootstrap inference,
the benefit-fraction lower bound, and the fixed-effects regressions, emitted
as one JSON report."""

from __future__ import annotations

from typing import Optional, Sequence

from .complementarity import (AIBenchmark, ComplementaritySample,
                              MODE_GUIDED, MODE_HUMAN, MODE_TEAM,
                              _scenarios, bootstrap)
from .regression import (RegressionResult, human_vs_auto_regression,
                         mode_effects_regression)

#: experiment-log mode -> treatment label in the regressions
MODE_LABELS = {MODE_HUMAN: "A", MODE_TEAM: "B", MODE_GUIDED: "C"}


def mode_effect_rows(samples: Sequence[ComplementaritySample]) -> list[dict]:
    return [{"outcome": s.reward, "subject": s.participant,
             "instance": s.instance, "mode": MODE_LABELS[s.mode]}
            for s in samples]


def human_vs_auto_rows(samples: Sequence[ComplementaritySample],
                       human_mode: str, auto_runs: dict[str, list[float]]
                       ) -> list[dict]:
    """Human rows cluster by subject; automated rows cluster by run index
    (run k spans the instances it was played on)."""
    rows = [{"outcome": s.reward, "instance": s.instance, "human": True,
             "cluster": f"subject-{s.participant}"}
            for s in samples if s.mode == human_mode]
    for instance, runs in sorted(auto_runs.items()):
        for k, value in enumerate(runs):
            rows.append({"outcome": value, "instance": instance, "human": False,
                         "cluster": f"run-{k}"})
    return rows


def _regression_block(result: RegressionResult, terms: dict[str, str],
                      contrasts: Optional[dict[str, dict[str, float]]] = None
                      ) -> dict:
    block: dict = {"n_obs": result.n_obs, "n_clusters": result.n_clusters}
    for label, name in terms.items():
        if name in result.names:
            block[label] = result[name].to_dict()
    for label, weights in (contrasts or {}).items():
        try:
            block[label] = result.contrast(weights).to_dict()
        except ValueError:
            pass
    return block


def run_analysis(samples: Sequence[ComplementaritySample], ai: AIBenchmark,
                 replicates: int = 10_000, seed: int = 0,
                 delta: float = 0.0) -> dict:
    """The full report.  CE statistics use solo/team modes only; guided-mode
    samples feed the treatment regression."""
    report: dict = {
        "n_samples": len(samples),
        "n_participants": len({s.participant for s in samples}),
        "scenarios": _scenarios(samples),
        "modes_present": sorted({s.mode for s in samples}),
        "delta": delta,
    }
    report["population_ce"] = bootstrap(
        samples, ai, "ce", replicates=replicates, seed=seed).to_dict()
    report["individual_ce_avg"] = bootstrap(
        samples, ai, "ce_i_avg", replicates=replicates, seed=seed).to_dict()
    ks = bootstrap(samples, ai, "ks_bound", replicates=replicates, seed=seed,
                   delta=delta)
    report["benefit_fraction_bound"] = {**ks.to_dict(), "delta": delta}

    modes_present = {s.mode for s in samples}
    rows = mode_effect_rows(samples)
    contrasts = {}
    if {MODE_TEAM, MODE_GUIDED} <= modes_present:
        contrasts["contrast_C_minus_B"] = {"mode:C": 1.0, "mode:B": -1.0}
    result = mode_effects_regression(rows)
    report["mode_effects"] = _regression_block(
        result, {"tau_B": "mode:B", "tau_C": "mode:C"}, contrasts)

    auto = {z: ai.runs(z) for z in ai.instances()}
    team_rows = human_vs_auto_rows(samples, MODE_TEAM, auto)
    report["team_vs_auto"] = _regression_block(
        human_vs_auto_regression(team_rows), {"delta_human": "human"})
    if ai.baseline:
        base_runs = {z: [v] for z, v in ai.baseline.items()}
        solo_rows = human_vs_auto_rows(samples, MODE_HUMAN, base_runs)
        report["solo_vs_baseline"] = _regression_block(
            human_vs_auto_regression(solo_rows), {"delta_human": "human"})
    return report
