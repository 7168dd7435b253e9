"""Cross synthetic demand patterns with cost and lead-time configurations.

The full synthetic benchmark is 40 pattern variants x 2 realizations x
3 cost ratios x 3 lead-time regimes = 720 instances.  Demands are shared
across the cost/lead cross for a given (variant, realization); stochastic
lead times are pre-drawn per period, so an instance is fully resolved.

Seed derivation (base seed 42): demand streams use
``[base, pattern_index, variant_index, realization]`` and lead-time streams
append ``[1000 + lead_config_index]``, all through numpy's PCG64.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .patterns import (PATTERN_IDS, TEST_HORIZON, VARIANT_IDS, get_pattern,
                       sample_demand_series)
from .sim import LOST, Instance

BASE_SEED = 42


@dataclass(frozen=True)
class CostConfig:
    fractile: float
    profit: float
    holding: float

    @property
    def label(self) -> str:
        return f"rho{int(round(self.fractile * 100)):02d}"


COST_CONFIGS: tuple[CostConfig, ...] = (
    CostConfig(0.50, 1.0, 1.0),
    CostConfig(0.80, 4.0, 1.0),
    CostConfig(0.95, 19.0, 1.0),
)


@dataclass(frozen=True)
class LeadTimeConfig:
    kind: str                       # "fixed" | "stochastic"
    fixed: Optional[int] = None
    support: tuple[float, ...] = ()
    probabilities: tuple[float, ...] = ()
    label: str = ""

    def validate(self) -> None:
        if self.kind == "fixed":
            if self.fixed is None or self.fixed < 0:
                raise ValueError("fixed lead-time config needs a non-negative lead")
        elif self.kind == "stochastic":
            if len(self.support) != len(self.probabilities) or not self.support:
                raise ValueError("stochastic lead-time config needs matching support/probabilities")
            if abs(sum(self.probabilities) - 1.0) > 1e-9:
                raise ValueError("lead-time probabilities must sum to 1")
            for v in self.support:
                if v != LOST and (v < 0 or v != int(v)):
                    raise ValueError("lead-time support must be non-negative integers or LOST")
        else:
            raise ValueError(f"unknown lead-time kind {self.kind!r}")

    @property
    def promised_lead(self) -> int:
        """The lead time announced to the decision maker."""
        if self.kind == "fixed":
            return int(self.fixed)
        finite = [int(v) for v in self.support if v != LOST]
        return min(finite) if finite else 0

    def draw(self, horizon: int, rng: np.random.Generator) -> tuple[float, ...]:
        self.validate()
        if self.kind == "fixed":
            return (float(self.fixed),) * horizon
        idx = rng.choice(len(self.support), size=horizon, p=self.probabilities)
        return tuple(self.support[i] for i in idx)


#: Benchmark lead-time regimes: immediate, fixed 4-period delay, and
#: stochastic uniform over {1, 2, 3, lost}.
LEAD_CONFIGS: tuple[LeadTimeConfig, ...] = (
    LeadTimeConfig("fixed", fixed=0, label="L0"),
    LeadTimeConfig("fixed", fixed=4, label="L4"),
    LeadTimeConfig("stochastic", support=(1.0, 2.0, 3.0, LOST),
                   probabilities=(0.25, 0.25, 0.25, 0.25), label="Lstoch"),
)

#: Lead-time regime used by the third human-experiment instance: arrives next
#: period with probability 75%, otherwise the order is lost.
HUMAN_LEAD_CONFIG = LeadTimeConfig(
    "stochastic", support=(1.0, LOST), probabilities=(0.75, 0.25), label="Lp75")


def lead_config_by_label(label: str) -> LeadTimeConfig:
    for cfg in (*LEAD_CONFIGS, HUMAN_LEAD_CONFIG):
        if cfg.label.lower() == label.lower():
            return cfg
    raise KeyError(f"unknown lead-time config {label!r}")


def neutral_item_id(instance_id: str) -> str:
    """Stable SKU label that does not leak how the demand was generated."""
    digest = hashlib.sha1(instance_id.encode()).hexdigest()[:8]
    return f"sku-{digest}"


SYNTHETIC_DESCRIPTION = (
    "Stock-keeping unit from the catalog; no further product information is available."
)


def build_benchmark(realizations_per_variant: int = 2,
                    base_seed: int = BASE_SEED,
                    patterns: Optional[Sequence[str]] = None,
                    lead_labels: Optional[Sequence[str]] = None,
                    fractiles: Optional[Sequence[float]] = None) -> list[Instance]:
    """Generate the synthetic benchmark, optionally filtered by pattern,
    lead-time label, or critical fractile."""
    wanted_patterns = tuple(patterns) if patterns else PATTERN_IDS
    for p in wanted_patterns:
        if p not in PATTERN_IDS:
            raise KeyError(f"unknown pattern {p!r}")
    lead_set = {l.lower() for l in lead_labels} if lead_labels else None
    frac_set = set(fractiles) if fractiles else None

    instances: list[Instance] = []
    for p_idx, pattern in enumerate(PATTERN_IDS):
        if pattern not in wanted_patterns:
            continue
        for v_idx, variant in enumerate(VARIANT_IDS):
            spec = get_pattern(pattern, variant)
            for realization in range(1, realizations_per_variant + 1):
                demand_seed = [base_seed, p_idx, v_idx, realization]
                test, training = sample_demand_series(spec, TEST_HORIZON, demand_seed)
                lead_draws = {}
                for l_idx, lead_cfg in enumerate(LEAD_CONFIGS):
                    rng = np.random.default_rng([base_seed, p_idx, v_idx,
                                                 realization, 1000 + l_idx])
                    lead_draws[lead_cfg.label] = lead_cfg.draw(TEST_HORIZON, rng)
                for cost in COST_CONFIGS:
                    if frac_set and cost.fractile not in frac_set:
                        continue
                    for lead_cfg in LEAD_CONFIGS:
                        if lead_set and lead_cfg.label.lower() not in lead_set:
                            continue
                        inst_id = (f"syn-{pattern}{variant}-r{realization}-"
                                   f"{cost.label}-{lead_cfg.label}")
                        instances.append(Instance(
                            id=inst_id,
                            horizon=TEST_HORIZON,
                            demands=test,
                            history=training,
                            lead_times=lead_draws[lead_cfg.label],
                            promised_lead=lead_cfg.promised_lead,
                            profit=cost.profit,
                            holding=cost.holding,
                            context=("",) * TEST_HORIZON,
                            product_description=SYNTHETIC_DESCRIPTION,
                            provenance={
                                "kind": "synthetic",
                                "pattern": pattern,
                                "variant": variant,
                                "realization": realization,
                                "rho": cost.fractile,
                                "lead": lead_cfg.label,
                                "lead_kind": lead_cfg.kind,
                            },
                        ))
    return instances


def facets_of(instance: Instance) -> dict:
    """Reporting facets shared by the evaluator and the exporters."""
    prov = dict(instance.provenance)
    return {
        "source": prov.get("kind", "unknown"),
        "pattern": prov.get("pattern"),
        "variant": prov.get("variant"),
        "realization": prov.get("realization"),
        "rho": prov.get("rho", round(instance.critical_fractile, 4)),
        "lead": prov.get("lead"),
        "lead_kind": prov.get("lead_kind"),
    }


def deterministic_lead(instance: Instance) -> bool:
    kind = instance.provenance.get("lead_kind")
    if kind is not None:
        return kind == "fixed"
    return all(ell != LOST for ell in instance.lead_times) and \
        len(set(instance.lead_times)) == 1
