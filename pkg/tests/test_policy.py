"""Capped base-stock oracle tests.

The brute-force reference below is written independently of the library code
path: scipy quantiles, plain formula transcription, no shared helpers.
"""

from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.stats import norm

from invbench.policy import (ORAdvice, ParamEstimate, apply_param_estimate,
                             capped_base_stock, demand_stats, inventory_position,
                             or_recommendation)
from invbench.sim import new_session, observe, step

from helpers import make_instance


def brute_force_order(observed, lead, rho, position):
    """Independent reference: empirical stats -> base stock -> capped order."""
    xs = np.asarray(observed, dtype=float)
    mean = xs.mean()
    std = xs.std(ddof=1)
    mu = (1 + lead) * mean
    sigma = math.sqrt(1 + lead) * std
    base = mu + norm.ppf(rho) * sigma
    cap = mu / (1 + lead) + norm.ppf(0.95) * sigma / math.sqrt(1 + lead)
    return min(max(base - position, 0.0), cap)


def _obs(history, demands=(0,), lead=0, profit=19.0, holding=1.0, promised=None):
    inst = make_instance(demands=demands, lead_times=(lead,) * len(demands),
                         profit=profit, holding=holding,
                         promised_lead=promised if promised is not None else lead,
                         history=history)
    return observe(new_session(inst), inst)


def test_unit_oracle_canonical_history():
    obs = _obs((80, 90, 100, 110, 120), profit=19.0, holding=1.0)  # rho = 0.95
    advice = or_recommendation(obs)
    assert advice.demand_mean == pytest.approx(100.0, abs=1e-12)
    assert advice.demand_std == pytest.approx(15.811388, abs=1e-6)
    expected_q = brute_force_order((80, 90, 100, 110, 120), 0, 0.95, 0.0)
    assert advice.quantity == pytest.approx(expected_q, abs=1e-3)
    # with L=0 the cap equals the base stock here, so both bind at ~126.01
    assert advice.base_stock == pytest.approx(126.008, abs=1e-2)
    assert advice.cap == pytest.approx(advice.base_stock, abs=1e-9)


def test_zero_variance_collapse():
    obs = _obs((50, 50, 50, 50, 50), profit=4.0, holding=1.0)
    advice = or_recommendation(obs)
    assert advice.demand_std == 0.0
    assert advice.base_stock == pytest.approx(50.0)
    assert advice.cap == pytest.approx(50.0)
    assert advice.quantity == pytest.approx(50.0)


def test_position_at_or_above_base_stock_orders_nothing():
    advice = capped_base_stock(100, 10, lead_time=0, fractile=0.8,
                               inventory_position=500)
    assert advice.quantity == 0.0
    assert advice.uncapped_quantity == 0.0


def test_randomized_against_brute_force():
    rng = np.random.default_rng(7)
    for _ in range(20):
        n = rng.integers(5, 40)
        observed = rng.integers(0, 300, size=n).tolist()
        if len(set(observed)) == 1:
            observed[0] += 1
        lead = int(rng.integers(0, 6))
        rho = float(rng.uniform(0.05, 0.99))
        position = float(rng.uniform(0, 600))
        mean, std = demand_stats(observed)
        advice = capped_base_stock(mean, std, lead_time=lead, fractile=rho,
                                   inventory_position=position)
        expected = brute_force_order(observed, lead, rho, position)
        assert advice.quantity == pytest.approx(expected, abs=1e-9), (
            observed, lead, rho, position)


def test_inventory_position_counts_lost_orders():
    from invbench.sim import LOST
    inst = make_instance(demands=(5, 5, 5), lead_times=(LOST, 2, 0),
                         history=(5,) * 5)
    state = new_session(inst)
    state, _ = step(state, inst, 30)     # lost, stays in pipeline
    state, _ = step(state, inst, 10)     # arrives at period 4 (past horizon view)
    obs = observe(state, inst)
    assert inventory_position(obs) == pytest.approx(0 + 30 + 10)


def test_demand_stats_requires_two_observations():
    with pytest.raises(ValueError):
        demand_stats([5])


@given(st.floats(0.05, 0.949))
@settings(max_examples=60)
def test_base_stock_strictly_increasing_in_fractile(rho):
    lo = capped_base_stock(100, 20, 2, rho, 0)
    hi = capped_base_stock(100, 20, 2, rho + 0.05, 0)
    assert hi.base_stock > lo.base_stock
    assert hi.cap == pytest.approx(lo.cap)  # cap is fractile-independent


@given(st.floats(1, 500), st.floats(0, 80), st.integers(0, 8),
       st.floats(0.01, 0.99), st.floats(0, 1000))
@settings(max_examples=200)
def test_cap_dominance(mean, std, lead, rho, position):
    advice = capped_base_stock(mean, std, lead, rho, position)
    assert advice.quantity <= advice.cap + 1e-12
    assert advice.quantity >= 0.0
    if position >= advice.base_stock:
        assert advice.quantity == 0.0


@given(st.floats(0.5, 50))
@settings(max_examples=50)
def test_cost_scale_invariance(scale):
    obs1 = _obs((80, 90, 100, 110, 120), profit=4.0, holding=1.0)
    obs2 = _obs((80, 90, 100, 110, 120), profit=4.0 * scale, holding=1.0 * scale)
    a1, a2 = or_recommendation(obs1), or_recommendation(obs2)
    assert a1.fractile == pytest.approx(a2.fractile)
    assert a1.z_star == pytest.approx(a2.z_star)
    assert a1.base_stock == pytest.approx(a2.base_stock)
    assert a1.quantity == pytest.approx(a2.quantity)


def test_param_estimate_default_equivalence():
    obs = _obs((80, 90, 100, 110, 120), demands=(10, 10), lead=3,
               profit=4.0, holding=1.0)
    plain = or_recommendation(obs)
    plugged = apply_param_estimate(ParamEstimate(lead_time=obs.promised_lead), obs)
    assert plugged == plain


def test_param_estimate_lead_only_worked_example():
    # history with mean 100 and std 10; rho = 0.8; empty position
    history = (90, 95, 100, 105, 110)
    mean, std = demand_stats(history)
    assert mean == pytest.approx(100.0)
    assert std == pytest.approx(math.sqrt(250 / 4))  # 7.905...
    # build an observation whose stats are exactly mean 100, std 10
    history = (90, 90, 100, 110, 110)
    mean, std = demand_stats(history)
    assert (mean, std) == (100.0, pytest.approx(10.0))
    obs = _obs(history, profit=4.0, holding=1.0, promised=0)
    advice = apply_param_estimate(ParamEstimate(lead_time=2), obs)
    assert advice.horizon_mean == pytest.approx(300.0)
    assert advice.horizon_std == pytest.approx(10 * math.sqrt(3), abs=1e-9)
    assert advice.base_stock == pytest.approx(300 + norm.ppf(0.8) * 10 * math.sqrt(3), abs=1e-9)
    # cap unscales by the estimated lead: one period's demand plus safety
    assert advice.cap == pytest.approx(100 + norm.ppf(0.95) * 10, abs=1e-9)
    assert advice.quantity == pytest.approx(116.4, abs=0.1)


def test_param_estimate_direct_stats_ignore_lead_estimate():
    obs = _obs((80, 90, 100, 110, 120), lead=1, profit=4.0, holding=1.0)
    direct = apply_param_estimate(
        ParamEstimate(lead_time=9, horizon_mean=240.0, horizon_std=30.0), obs)
    no_lead = apply_param_estimate(
        ParamEstimate(horizon_mean=240.0, horizon_std=30.0), obs)
    assert direct == no_lead
    assert direct.lead_time == obs.promised_lead
    assert direct.base_stock == pytest.approx(240 + direct.z_star * 30.0)


def test_param_estimate_validation():
    with pytest.raises(ValueError):
        ParamEstimate(lead_time=-1).validate()
    with pytest.raises(ValueError):
        ParamEstimate(horizon_std=-5.0).validate()
