"""Shared test fixtures and builders."""

from __future__ import annotations

from invbench.sim import LOST, HISTORY_LEN, Instance


def make_instance(*, demands, lead_times, profit=1.0, holding=1.0,
                  promised_lead=0, history=None, instance_id="test",
                  context=None, description="", provenance=None) -> Instance:
    demands = tuple(demands)
    if history is None:
        history = (10,) * HISTORY_LEN
    inst = Instance(
        id=instance_id,
        horizon=len(demands),
        demands=demands,
        history=tuple(history),
        lead_times=tuple(float(ell) if ell != LOST else LOST for ell in lead_times),
        promised_lead=promised_lead,
        profit=profit,
        holding=holding,
        context=tuple(context) if context else ("",) * len(demands),
        product_description=description,
        provenance=provenance or {},
    )
    inst.validate()
    return inst
