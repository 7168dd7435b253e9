"""Complementarity measurement: population and average individual effects,
the distribution-free lower bound on the fraction of individuals who benefit,
its tightness coupling, and within-cell bootstrap inference.

Notation: for participant i and scenario z, a(i) is the collaborative
performance and b(i) = max(solo performance, automated benchmark).  The
fraction with a - b > delta is bounded below by
sup_t [F_b(t) - F_a(t + delta)], and the bound is achieved by an explicit
coupling of the two marginals.
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

MODE_HUMAN = "H"        # solo (baseline-advised human)
MODE_TEAM = "H_AI"      # collaborative
MODE_GUIDED = "C"       # autonomous agent with periodic human guidance

VALID_MODES = (MODE_HUMAN, MODE_TEAM, MODE_GUIDED)

#: Modes that enter the complementarity estimators.
CE_MODES = (MODE_HUMAN, MODE_TEAM)


class MissingCellError(ValueError):
    pass


@dataclass(frozen=True)
class ComplementaritySample:
    participant: str
    instance: str
    mode: str
    reward: float

    def __post_init__(self):
        if self.mode not in VALID_MODES:
            raise ValueError(f"mode must be one of {VALID_MODES}, got {self.mode!r}")

    def to_dict(self) -> dict:
        return {"type": "sample", "participant": self.participant,
                "instance": self.instance, "mode": self.mode,
                "reward": self.reward}


def load_samples(path) -> list[ComplementaritySample]:
    """Read an experiment log (JSON lines).  Lines with a ``type`` other than
    ``sample`` (e.g. raw event records) are skipped."""
    samples = []
    with Path(path).open() as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            doc = json.loads(line)
            if doc.get("type", "sample") != "sample":
                continue
            samples.append(ComplementaritySample(
                participant=str(doc["participant"]),
                instance=str(doc["instance"]),
                mode=str(doc["mode"]),
                reward=float(doc["reward"])))
    return samples


class AIBenchmark:
    """Per-instance automated performance: the mean over repeated runs of the
    collaborative-agent pipeline, optionally the individual runs, and
    optionally a deterministic pure-baseline value."""

    def __init__(self, means: dict, runs: Optional[dict] = None,
                 baseline: Optional[dict] = None):
        self._means = {str(k): float(v) for k, v in means.items()}
        self._runs = {str(k): [float(x) for x in v] for k, v in (runs or {}).items()}
        self.baseline = {str(k): float(v) for k, v in (baseline or {}).items()}

    def mean(self, instance: str) -> float:
        try:
            return self._means[instance]
        except KeyError:
            raise MissingCellError(
                f"automated benchmark has no value for scenario {instance!r}") from None

    def runs(self, instance: str) -> list[float]:
        return self._runs.get(instance, [self.mean(instance)])

    def instances(self) -> tuple[str, ...]:
        return tuple(sorted(self._means))

    @staticmethod
    def from_json(path) -> "AIBenchmark":
        doc = json.loads(Path(path).read_text())
        if "ai" in doc:
            entries = doc["ai"]
        else:
            entries = doc
        means, runs = {}, {}
        for key, value in entries.items():
            if isinstance(value, dict):
                if "runs" in value and value["runs"]:
                    runs[key] = list(value["runs"])
                    means[key] = float(value.get("mean", np.mean(value["runs"])))
                else:
                    means[key] = float(value["mean"])
            else:
                means[key] = float(value)
        return AIBenchmark(means, runs, baseline=doc.get("or"))

    def to_json(self) -> dict:
        doc = {"ai": {}}
        for key, mean in sorted(self._means.items()):
            entry: dict = {"mean": mean}
            if key in self._runs:
                entry["runs"] = self._runs[key]
            doc["ai"][key] = entry
        if self.baseline:
            doc["or"] = dict(sorted(self.baseline.items()))
        return doc


def _cells(samples: Sequence[ComplementaritySample]
           ) -> dict[tuple[str, str], list[ComplementaritySample]]:
    cells: dict[tuple[str, str], list[ComplementaritySample]] = {}
    for s in samples:
        cells.setdefault((s.mode, s.instance), []).append(s)
    return cells


def _scenarios(samples: Sequence[ComplementaritySample]) -> list[str]:
    return sorted({s.instance for s in samples if s.mode in CE_MODES})


def _require_cells(samples: Sequence[ComplementaritySample]) -> None:
    cells = _cells(samples)
    for z in _scenarios(samples):
        for mode in CE_MODES:
            if not cells.get((mode, z)):
                raise MissingCellError(f"scenario {z!r} has no {mode} samples")


def ce_population(samples: Sequence[ComplementaritySample],
                  ai: AIBenchmark) -> float:
    """Mean over scenarios of [team mean - max(solo mean, automated mean)]."""
    _require_cells(samples)
    cells = _cells(samples)
    terms = []
    for z in _scenarios(samples):
        team = np.mean([s.reward for s in cells[(MODE_TEAM, z)]])
        solo = np.mean([s.reward for s in cells[(MODE_HUMAN, z)]])
        terms.append(team - max(solo, ai.mean(z)))
    return float(np.mean(terms))


def ce_individual_avg(samples: Sequence[ComplementaritySample],
                      ai: AIBenchmark) -> float:
    """E[a] - E[b]: the mean over team participants of their per-person mean,
    minus the mean over solo participants of mean_z max(reward, automated)."""
    _require_cells(samples)
    a_by_person: dict[str, list[float]] = {}
    b_by_person: dict[str, list[float]] = {}
    for s in samples:
        if s.mode == MODE_TEAM:
            a_by_person.setdefault(s.participant, []).append(s.reward)
        elif s.mode == MODE_HUMAN:
            b_by_person.setdefault(s.participant, []).append(
                max(s.reward, ai.mean(s.instance)))
    e_a = np.mean([np.mean(v) for v in a_by_person.values()])
    e_b = np.mean([np.mean(v) for v in b_by_person.values()])
    return float(e_a - e_b)


@dataclass(frozen=True)
class EcdfPair:
    """Finite samples of a (team per-person values) and b (max of solo and
    automated)."""
    a: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        if len(self.a) == 0 or len(self.b) == 0:
            raise ValueError("both samples must be non-empty")


def build_ecdf_pair(samples: Sequence[ComplementaritySample],
                    ai: AIBenchmark) -> EcdfPair:
    _require_cells(samples)
    a = [s.reward for s in samples if s.mode == MODE_TEAM]
    b = [max(s.reward, ai.mean(s.instance)) for s in samples
         if s.mode == MODE_HUMAN]
    return EcdfPair(a=np.asarray(a, dtype=float), b=np.asarray(b, dtype=float))


def ks_lower_bound(pair: EcdfPair, delta: float = 0.0) -> float:
    """sup_t [F_b(t) - F_a(t + delta)], clamped at zero.  The supremum of the
    step-function difference is attained on the b sample points or just at an
    a point shifted down by delta, so scanning that finite set is exact.  At
    delta = 0 this is the one-sided Kolmogorov-Smirnov statistic."""
    if delta < 0:
        raise ValueError(f"delta must be >= 0, got {delta}")
    a = np.sort(pair.a)
    b = np.sort(pair.b)
    candidates = np.concatenate([b, a - delta])
    f_b = np.searchsorted(b, candidates, side="right") / len(b)
    f_a = np.searchsorted(a, candidates + delta, side="right") / len(a)
    return float(max(np.max(f_b - f_a), 0.0))


@dataclass(frozen=True)
class CouplingResult:
    pairs: np.ndarray              # shape (N, 2): columns a, b
    achieved_fraction: float       # empirical P[a - b > delta] on the pairs
    bound: float                   # ks_lower_bound of the marginals
    granularity: float             # 1/N discretization error scale

    @property
    def error(self) -> float:
        return abs(self.achieved_fraction - self.bound)


_MAX_COUPLING_ATOMS = 4_000_000


def tightness_coupling(a_samples: Sequence[float], b_samples: Sequence[float],
                       delta: float = 0.0) -> CouplingResult:
    """Construct a joint sample with the given marginals achieving the lower
    bound: a fraction p* of pairs takes a conditioned above t* + delta with b
    conditioned at or below t*; the remainder is coupled by sorted ranks,
    which keeps a - b <= delta there because t* attains the supremum.

    Marginals of unequal size are replicated to their lcm so the coupling is
    exact; if that exceeds the atom budget the larger sample is used as-is
    and the discretization error is reflected in ``granularity``.
    """
    if delta < 0:
        raise ValueError(f"delta must be >= 0, got {delta}")
    a = np.sort(np.asarray(a_samples, dtype=float))
    b = np.sort(np.asarray(b_samples, dtype=float))
    if len(a) == 0 or len(b) == 0:
        raise ValueError("both samples must be non-empty")
    pair = EcdfPair(a=a, b=b)
    bound = ks_lower_bound(pair, delta)

    lcm = math.lcm(len(a), len(b))
    if lcm <= _MAX_COUPLING_ATOMS:
        a_rep = np.repeat(a, lcm // len(a))
        b_rep = np.repeat(b, lcm // len(b))
    else:
        n = max(len(a), len(b))
        quantiles = (np.arange(n) + 0.5) / n
        a_rep = np.quantile(a, quantiles, method="inverted_cdf")
        b_rep = np.quantile(b, quantiles, method="inverted_cdf")
    n_atoms = len(a_rep)

    # optimal threshold: evaluate the bound objective on the candidate set
    candidates = np.concatenate([b, a - delta])
    f_b = np.searchsorted(b, candidates, side="right") / len(b)
    f_a = np.searchsorted(a, candidates + delta, side="right") / len(a)
    gains = f_b - f_a
    t_star = float(candidates[np.argmax(gains)])

    count_a_high = int(np.sum(a_rep > t_star + delta))
    count_b_low = int(np.sum(b_rep <= t_star))
    k = max(count_a_high + count_b_low - n_atoms, 0)

    pairs = np.empty((n_atoms, 2))
    if k > 0:
        high_a = a_rep[n_atoms - k:]             # the k largest a atoms
        low_b = b_rep[:k]                        # the k smallest b atoms
        pairs[:k, 0] = high_a
        pairs[:k, 1] = low_b
        rest_a = a_rep[:n_atoms - k]
        rest_b = b_rep[k:]
    else:
        rest_a = a_rep
        rest_b = b_rep
    pairs[k:, 0] = rest_a                        # both already sorted ascending
    pairs[k:, 1] = rest_b
    achieved = float(np.mean(pairs[:, 0] - pairs[:, 1] > delta))
    return CouplingResult(pairs=pairs, achieved_fraction=achieved, bound=bound,
                          granularity=1.0 / n_atoms)


# --- bootstrap ---------------------------------------------------------------

STATISTICS = ("ce", "ce_i_avg", "ks_bound")


@dataclass(frozen=True)
class BootstrapResult:
    statistic: str
    point: float
    p_one_sided: float             # fraction of replicates <= 0 (H0: stat <= 0)
    ci_low: float
    ci_high: float
    replicates: int
    seed: int

    def to_dict(self) -> dict:
        return {"statistic": self.statistic, "point": self.point,
                "p_one_sided": self.p_one_sided,
                "ci95": [self.ci_low, self.ci_high],
                "replicates": self.replicates, "seed": self.seed}


def _point_estimate(statistic: str, samples, ai, delta: float) -> float:
    if statistic == "ce":
        return ce_population(samples, ai)
    if statistic == "ce_i_avg":
        return ce_individual_avg(samples, ai)
    if statistic == "ks_bound":
        return ks_lower_bound(build_ecdf_pair(samples, ai), delta)
    raise ValueError(f"unknown statistic {statistic!r}; pick one of {STATISTICS}")


def bootstrap(samples: Sequence[ComplementaritySample], ai: AIBenchmark,
              statistic: str, replicates: int = 10_000, seed: int = 0,
              delta: float = 0.0) -> BootstrapResult:
    """Within-cell bootstrap: participants are resampled with replacement
    independently inside each (mode, instance) cell.  Replicate statistics
    treat each drawn observation as one participant, which coincides with
    the point estimators under the one-observation-per-cell design.

    One-sided p-value: fraction of replicates at or below zero.  A cell with
    a single participant resamples to itself (warned upstream)."""
    point = _point_estimate(statistic, samples, ai, delta)
    rng = np.random.default_rng(seed)
    cells = _cells(samples)
    scenarios = _scenarios(samples)
    for (mode, z), cell in sorted(cells.items()):
        if mode in CE_MODES and len(cell) == 1:
            warnings.warn(f"cell ({mode}, {z}) has a single participant; "
                          "it resamples trivially")
    for z in scenarios:
        for mode in CE_MODES:
            rewards = np.asarray([s.reward for s in cells[(mode, z)]])
            # the b construction folds the automated benchmark in per draw
            if mode == MODE_HUMAN and statistic in ("ce_i_avg", "ks_bound"):
                rewards = np.maximum(rewards, ai.mean(z))
            cells[(mode, z)] = rewards  # type: ignore[assignment]

    f_ai = {z: ai.mean(z) for z in scenarios}
    team_draws = {}
    solo_draws = {}
    for z in scenarios:
        team = cells[(MODE_TEAM, z)]
        solo = cells[(MODE_HUMAN, z)]
        team_draws[z] = team[rng.integers(0, len(team), size=(replicates, len(team)))]
        solo_draws[z] = solo[rng.integers(0, len(solo), size=(replicates, len(solo)))]

    if statistic == "ce":
        terms = [team_draws[z].mean(axis=1)
                 - np.maximum(solo_draws[z].mean(axis=1), f_ai[z])
                 for z in scenarios]
        reps = np.mean(terms, axis=0)
    elif statistic == "ce_i_avg":
        a_all = np.concatenate([team_draws[z] for z in scenarios], axis=1)
        b_all = np.concatenate([solo_draws[z] for z in scenarios], axis=1)
        reps = a_all.mean(axis=1) - b_all.mean(axis=1)
    else:  # ks_bound
        a_all = np.concatenate([team_draws[z] for z in scenarios], axis=1)
        b_all = np.concatenate([solo_draws[z] for z in scenarios], axis=1)
        reps = np.empty(replicates)
        for i in range(replicates):
            reps[i] = ks_lower_bound(EcdfPair(a=a_all[i], b=b_all[i]), delta)

    p_one = float(np.mean(reps <= 0.0))
    lo, hi = np.percentile(reps, [2.5, 97.5])
    return BootstrapResult(statistic=statistic, point=point,
                           p_one_sided=p_one, ci_low=float(lo), ci_high=float(hi),
                           replicates=replicates, seed=seed)
