"""Data-driven capped base-stock policy.

The empirical mean and standard deviation (n-1 divisor) of every observed
demand -- the five seeded history values plus realized periods -- are scaled
to the promised lead-time horizon by (1+L) and sqrt(1+L).  The base-stock
target is mean plus a safety term at the critical fractile; the order raises
the inventory position (on-hand plus all outstanding orders, lost ones
included) up to the target, capped at roughly one period's worth of demand
plus a 95% safety margin to avoid unstable inventory flow.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

from .normal import normal_inverse_cdf
from .sim import Observation

CAP_SAFETY_FRACTILE = 0.95


@dataclass(frozen=True)
class ORAdvice:
    quantity: float
    base_stock: float
    inventory_position: float
    demand_mean: float
    demand_std: float
    horizon_mean: float
    horizon_std: float
    cap: float
    z_star: float
    fractile: float
    lead_time: float
    uncapped_quantity: float


@dataclass(frozen=True)
class ParamEstimate:
    """Estimates an upstream forecaster may feed into the policy.  When both
    horizon stats are present the lead-time estimate is context only and the
    promised lead is used for scaling; a bare lead-time estimate re-derives
    the horizon stats from the empirical per-period moments."""

    lead_time: Optional[float] = None
    horizon_mean: Optional[float] = None
    horizon_std: Optional[float] = None

    def validate(self) -> None:
        if self.lead_time is not None and (not math.isfinite(self.lead_time) or self.lead_time < 0):
            raise ValueError(f"lead-time estimate must be >= 0, got {self.lead_time}")
        for name, v in (("horizon_mean", self.horizon_mean), ("horizon_std", self.horizon_std)):
            if v is not None and not math.isfinite(v):
                raise ValueError(f"{name} must be finite, got {v}")
        if self.horizon_std is not None and self.horizon_std < 0:
            raise ValueError(f"horizon_std must be >= 0, got {self.horizon_std}")


def demand_stats(values: Sequence[float]) -> tuple[float, float]:
    """Empirical mean and n-1 standard deviation; needs >= 2 observations."""
    n = len(values)
    if n < 2:
        raise ValueError(f"need at least 2 demand observations, got {n}")
    mean = sum(values) / n
    var = sum((v - mean) ** 2 for v in values) / (n - 1)
    return mean, math.sqrt(var)


def capped_base_stock(demand_mean: float, demand_std: float, lead_time: float,
                      fractile: float, inventory_position: float,
                      horizon_mean: Optional[float] = None,
                      horizon_std: Optional[float] = None) -> ORAdvice:
    """Core order computation.  ``horizon_mean``/``horizon_std`` override the
    default (1+L)-scaled empirical stats; the cap always unscales by the same
    ``lead_time`` used to build them."""
    if lead_time < 0:
        raise ValueError(f"lead_time must be >= 0, got {lead_time}")
    scale = 1.0 + lead_time
    if horizon_mean is None:
        horizon_mean = scale * demand_mean
    if horizon_std is None:
        horizon_std = math.sqrt(scale) * demand_std
    z_star = normal_inverse_cdf(fractile)
    base_stock = horizon_mean + z_star * horizon_std
    cap = horizon_mean / scale + normal_inverse_cdf(CAP_SAFETY_FRACTILE) * horizon_std / math.sqrt(scale)
    uncapped = max(base_stock - inventory_position, 0.0)
    quantity = min(uncapped, cap)
    return ORAdvice(
        quantity=quantity,
        base_stock=base_stock,
        inventory_position=inventory_position,
        demand_mean=demand_mean,
        demand_std=demand_std,
        horizon_mean=horizon_mean,
        horizon_std=horizon_std,
        cap=cap,
        z_star=z_star,
        fractile=fractile,
        lead_time=lead_time,
        uncapped_quantity=uncapped,
    )


def inventory_position(obs: Observation) -> float:
    return obs.on_hand + obs.pipeline


def or_recommendation(obs: Observation) -> ORAdvice:
    """Recommendation from the observation alone, using the promised lead."""
    mean, std = demand_stats(obs.observed_demands)
    return capped_base_stock(
        demand_mean=mean,
        demand_std=std,
        lead_time=obs.promised_lead,
        fractile=obs.critical_fractile,
        inventory_position=inventory_position(obs),
    )


def apply_param_estimate(estimate: ParamEstimate, obs: Observation) -> ORAdvice:
    """Plug forecaster estimates into the capped base-stock computation.

    Scaling lead: the estimated lead when the horizon stats are derived from
    it, the promised lead when both horizon stats are supplied directly
    (the lead estimate is then informational only).
    """
    estimate.validate()
    mean, std = demand_stats(obs.observed_demands)
    both_given = estimate.horizon_mean is not None and estimate.horizon_std is not None
    if both_given:
        lead = float(obs.promised_lead)
    elif estimate.lead_time is not None:
        lead = float(estimate.lead_time)
    else:
        lead = float(obs.promised_lead)
    return capped_base_stock(
        demand_mean=mean,
        demand_std=std,
        lead_time=lead,
        fractile=obs.critical_fractile,
        inventory_position=inventory_position(obs),
        horizon_mean=estimate.horizon_mean,
        horizon_std=estimate.horizon_std,
    )
