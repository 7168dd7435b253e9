"""Prompt assembly for the model-backed decision methods.

One fixed system prompt per episode plus a per-period user message with three
blocks in order: carry-over insights, the observation (including the previous
period's conclusion), and -- when the method uses it -- the baseline
recommendation.  Strategic guidance from a human supervisor, when present,
goes on top of everything.
"""

from __future__ import annotations

from typing import Optional, Sequence

from .policy import ORAdvice, demand_stats
from .sim import Instance, Observation

RULE = "=" * 70


def _fmt(x: float) -> str:
    return f"{x:g}"


def item_label(instance: Instance) -> str:
    from .benchmark import neutral_item_id
    prov = instance.provenance
    if prov.get("kind") == "real" and prov.get("article_id"):
        return str(prov["article_id"])
    if prov.get("item_id"):
        return str(prov["item_id"])
    return neutral_item_id(instance.id)


def _mechanics_block(item_id: str, promised_lead: int) -> str:
    return f"""Period execution sequence:
1. Decision phase: you receive the observation and place the order for period N.
2. Arrival resolution: orders scheduled to arrive in period N are added to on-hand inventory.
3. Demand resolution: customer demand is satisfied from on-hand inventory; unmet demand is lost (demand itself is still reported).
4. Period conclusion: the system generates the "Period N conclude" message, visible in period N+1.
Important: steps 2-4 happen AFTER your decision. You will see their results in the next period.

Lead time definition. Promised lead time: {promised_lead} period(s). An order placed in period N arrives during period (N+{promised_lead})'s arrival resolution, becomes visible in the "Period (N+{promised_lead}) conclude" message, and is read at the start of period (N+{promised_lead}+1)'s decision phase. There is always a 1-period observation delay. Actual lead time may differ from promised; orders may also be lost (never arrive)."""


def _or_explained_block() -> str:
    return """The baseline agent uses a capped base-stock policy:

1. Demand estimation (from historical samples x_1..x_n):
   empirical mean m = (1/n) * sum(x_i)
   std dev s = sqrt( (1/(n-1)) * sum((x_i - m)^2) )
   over the lead-time horizon: mu = (1+L) * m, sigma = sqrt(1+L) * s

2. Safety factor: rho = p / (p + h), z = PhiInverse(rho)

3. Base stock: B = mu + z * sigma

4. Capped order: q = max(0, min(B - IP, cap))
   where IP = on-hand + all in-transit orders
   and cap = mu / (1+L) + PhiInverse(0.95) * sigma / sqrt(1+L)

5. Baseline limitations: uses the promised (not actual) lead time; weights all historical samples equally; cannot detect lost orders or regime shifts; assumes i.i.d. demand.

Your role: the baseline recommendation is a data-driven starting point. Override it when you detect: actual vs. promised lead-time discrepancies, demand regime changes, seasonality (from dates and the product description), or lost shipments."""


def _checklist_block() -> str:
    return """Decision checklist:
1. Use world knowledge and the product description to assess the demand outlook.
2. Reconcile on-hand + pipeline with expected arrivals; flag overdue or lost shipments.
3. Inspect the baseline recommendation (quantity + statistics) and decide how to adapt it.
4. Justify the final quantity by tying it to the demand outlook, your lead-time belief, and the baseline.

Carry-over insights: record only NEW, evidence-backed insights about sustained shifts (demand mean/variance, lead time, seasonality). Stay conservative; provide concrete statistics. Remove insights once they stop being true."""


def _decision_output_block(item_id: str) -> str:
    return f"""Output format (JSON object, nothing else):
  "rationale": full step-by-step analysis
  "short_rationale_for_human": 1-3 sentence summary
  "carry_over_insight": new sustained discoveries, or ""
  "action": {{"{item_id}": quantity}}"""


def _estimate_output_block() -> str:
    return """Output format (JSON object, nothing else). Return parameter estimates, not an order quantity:
  "rationale": full step-by-step analysis
  "short_rationale_for_human": 1-3 sentence summary
  "carry_over_insight": new sustained discoveries, or ""
  "estimates": {
      "lead_time": effective lead time in periods (optional),
      "demand_mean_over_horizon": expected total demand from now through arrival (optional),
      "demand_std_over_horizon": standard deviation of that total (optional)
  }
Any estimate you omit falls back to the baseline's empirical default. If you provide both demand estimates, the lead time is treated as context only."""


def system_prompt(method: str, instance: Instance, *,
                  guidance_enabled: bool = False,
                  feedback_enabled: bool = False) -> str:
    item_id = item_label(instance)
    blocks = [
        f'You control the vending machine for a single SKU "{item_id}".'
        f" Maximize total reward R = Profit * units_sold - HoldingCost * ending_inventory"
        f" each period, over a {instance.horizon}-period horizon."
        f" Profit per unit sold: {_fmt(instance.profit)}."
        f" Holding cost per unit per period: {_fmt(instance.holding)}.",
        _mechanics_block(item_id, instance.promised_lead),
    ]
    if method == "or_to_llm":
        blocks.append(_or_explained_block())
    blocks.append(_checklist_block())
    if method == "llm_to_or":
        blocks.append(_estimate_output_block())
    else:
        blocks.append(_decision_output_block(item_id))
    if feedback_enabled:
        blocks.append(
            "Two-stage interaction: first provide your rationale and decision. "
            "If the human then provides feedback, incorporate it and output a revised "
            "action in the same JSON format.")
    if guidance_enabled:
        blocks.append(
            "A human supervisor may provide strategic guidance, shown at the top of "
            "the observation. Follow it when making your decisions.")
    return "\n\n".join(blocks)


def _insights_block(insights: Sequence[tuple[int, str]]) -> Optional[str]:
    if not insights:
        return None
    lines = [RULE, "CARRY-OVER INSIGHTS (key discoveries):", RULE]
    lines += [f"Period {period}: {memo}" for period, memo in insights]
    lines.append(RULE)
    return "\n".join(lines)


def _guidance_block(guidance: Sequence[tuple[int, str]]) -> str:
    lines = [RULE, "STRATEGIC GUIDANCE FROM THE HUMAN SUPERVISOR:", RULE]
    for period, message in guidance:
        lines.append(f"Before period {period}: {message!r}" if message
                     else f"Before period {period}: (no guidance)")
    lines.append(RULE)
    return "\n".join(lines)


def observation_block(obs: Observation, item_id: str) -> str:
    lines = [RULE, f"OBSERVATION - PERIOD {obs.period} / {obs.horizon}", RULE]
    if obs.context:
        lines.append(f"Context: {obs.context}")
    if obs.product_description:
        lines.append(f"Product: {obs.product_description}")
    lines.append(f"On-hand inventory: {_fmt(obs.on_hand)}")
    lines.append(f"In-transit inventory (orders not yet arrived): {_fmt(obs.pipeline)}")
    if obs.orders:
        lines.append("Order book:")
        for o in obs.orders:
            status = (f"arrived in period {o.arrival_period}" if o.arrived
                      else "outstanding")
            lines.append(f"  placed period {o.placed}: {_fmt(o.quantity)} units - {status}")
    else:
        lines.append("Order book: empty")
    if obs.previous_conclusion:
        lines.append(obs.previous_conclusion)
    lines.append(
        f"Historical demand samples (before period 1): "
        f"{', '.join(str(d) for d in obs.history)}")
    if obs.realized_demands:
        lines.append(
            f"Realized demand, periods 1..{obs.period - 1}: "
            f"{', '.join(str(d) for d in obs.realized_demands)}")
    lines.append(
        f"Parameters: profit/unit {_fmt(obs.profit)}, holding/unit/period "
        f"{_fmt(obs.holding)}, promised lead time {obs.promised_lead}.")
    lines.append(f"Cumulative reward so far: {_fmt(obs.cumulative_reward)}")
    return "\n".join(lines)


def or_block(advice: ORAdvice, item_id: str) -> str:
    return "\n".join([
        RULE,
        "BASELINE (CAPPED BASE-STOCK) RECOMMENDATION:",
        RULE,
        f"{item_id}: order {int(round(advice.quantity))} units"
        f" (exact: {advice.quantity!r})",
        f"  Base-stock level B: {advice.base_stock:.2f}",
        f"  Inventory position IP (on-hand + in-transit): {_fmt(advice.inventory_position)}",
        f"  Empirical demand mean: {advice.demand_mean:.2f}",
        f"  Empirical demand std: {advice.demand_std:.2f}",
        f"  Order cap: {advice.cap:.2f}",
        RULE,
    ])


def _stats_context_block(obs: Observation) -> str:
    mean, std = demand_stats(obs.observed_demands)
    return "\n".join([
        RULE,
        "BASELINE STATISTICS (context for your estimates):",
        RULE,
        f"  Empirical demand mean: {mean:.2f}",
        f"  Empirical demand std: {std:.2f}",
        f"  Promised lead time: {obs.promised_lead}",
        RULE,
    ])


def _feedback_block(proposal_quantity: float, feedback: str) -> str:
    return "\n".join([
        RULE,
        "STAGE 2 - HUMAN FEEDBACK ON YOUR PROPOSAL:",
        RULE,
        f"Your stage-1 proposal was {_fmt(proposal_quantity)} units.",
        f"The human responded: {feedback!r}",
        "Incorporate this feedback and output a revised action in the same JSON format.",
        RULE,
    ])


def user_message(method: str, instance: Instance, obs: Observation,
                 or_advice: Optional[ORAdvice] = None,
                 insights: Sequence[tuple[int, str]] = (),
                 guidance: Sequence[tuple[int, str]] = (),
                 feedback: Optional[tuple[float, str]] = None) -> str:
    item_id = item_label(instance)
    blocks = []
    if guidance:
        blocks.append(_guidance_block(guidance))
    insight_block = _insights_block(insights)
    if insight_block:
        blocks.append(insight_block)
    blocks.append(observation_block(obs, item_id))
    if method == "or_to_llm":
        if or_advice is None:
            raise ValueError("or_to_llm user message requires the baseline advice")
        blocks.append(or_block(or_advice, item_id))
    elif method == "llm_to_or":
        blocks.append(_stats_context_block(obs))
    if feedback is not None:
        blocks.append(_feedback_block(*feedback))
    blocks.append("Respond with the JSON object only.")
    return "\n\n".join(blocks)


def build_prompts(method: str, instance: Instance, obs: Observation,
                  or_advice: Optional[ORAdvice] = None,
                  insights: Sequence[tuple[int, str]] = (),
                  guidance: Sequence[tuple[int, str]] = (),
                  feedback: Optional[tuple[float, str]] = None,
                  guidance_enabled: bool = False,
                  feedback_enabled: bool = False) -> tuple[str, str]:
    """(system, user) texts for a model-backed method."""
    if method not in ("llm", "or_to_llm", "llm_to_or"):
        raise ValueError(f"method {method!r} does not use prompts")
    system = system_prompt(method, instance, guidance_enabled=guidance_enabled,
                           feedback_enabled=feedback_enabled or feedback is not None)
    user = user_message(method, instance, obs, or_advice=or_advice,
                        insights=insights, guidance=guidance, feedback=feedback)
    return system, user
