"""Single-item, multi-period inventory environment with lead times and lost sales.

Period sequence: observe -> place order -> receive arrivals -> realize demand
(uncensored, unmet demand lost) -> carry leftover inventory.  All demand and
lead-time randomness lives in the :class:`Instance`, so simulation is fully
deterministic and replayable.  A lead time of ``LOST`` marks an order that
never arrives; it still counts toward the in-transit pipeline the agent sees.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Iterable, Mapping, Optional, Sequence

#: Sentinel lead time for an order that never arrives.  Using infinity keeps
#: arrival arithmetic total: ``placed + LOST`` never equals a finite period.
LOST: float = math.inf

HISTORY_LEN = 5

SCHEMA_VERSION = 1


class SimError(Exception):
    """Base class for simulator errors."""


class InstanceError(SimError, ValueError):
    """An instance violates its invariants; the message names the field."""


class EpisodeFinishedError(SimError):
    """Raised when observing or stepping past the final period."""


@dataclass(frozen=True)
class Instance:
    """Fully resolved episode: every demand and lead time is pre-drawn."""

    id: str
    horizon: int
    demands: tuple[int, ...]
    history: tuple[int, ...]
    lead_times: tuple[float, ...]
    promised_lead: int
    profit: float
    holding: float
    context: tuple[str, ...] = ()
    product_description: str = ""
    provenance: Mapping[str, Any] = field(default_factory=dict)

    @property
    def critical_fractile(self) -> float:
        return self.profit / (self.profit + self.holding)

    def validate(self) -> None:
        if self.horizon <= 0:
            raise InstanceError(f"horizon must be positive, got {self.horizon}")
        if len(self.demands) != self.horizon:
            raise InstanceError(
                f"demands has {len(self.demands)} entries but horizon is {self.horizon}"
            )
        if len(self.history) != HISTORY_LEN:
            raise InstanceError(
                f"history must hold exactly {HISTORY_LEN} values, got {len(self.history)}"
            )
        if len(self.lead_times) != self.horizon:
            raise InstanceError(
                f"lead_times has {len(self.lead_times)} entries but horizon is {self.horizon}"
            )
        if any(d < 0 for d in self.demands):
            raise InstanceError("demands must be non-negative")
        if any(d < 0 for d in self.history):
            raise InstanceError("history demands must be non-negative")
        for ell in self.lead_times:
            if ell == LOST:
                continue
            if not (math.isfinite(ell) and ell >= 0 and ell == int(ell)):
                raise InstanceError(f"lead_times entries must be non-negative integers or LOST, got {ell}")
        if self.promised_lead < 0:
            raise InstanceError(f"promised_lead must be non-negative, got {self.promised_lead}")
        if self.profit <= 0:
            raise InstanceError(f"profit must be positive, got {self.profit}")
        if self.holding <= 0:
            raise InstanceError(f"holding must be positive, got {self.holding}")
        if self.context and len(self.context) != self.horizon:
            raise InstanceError(
                f"context has {len(self.context)} entries but horizon is {self.horizon}"
            )


@dataclass(frozen=True)
class OpenOrder:
    """An order on the books.  ``arrival`` is the resolved arrival period, or
    None for a lost order.  Whether the agent may see it depends on the
    observation time."""

    placed: int
    quantity: float
    arrival: Optional[int]


@dataclass(frozen=True)
class PeriodOutcome:
    period: int
    arrivals: float
    demand: int
    sales: float
    ending_inventory: float
    reward: float
    conclude_message: str


@dataclass(frozen=True)
class SimState:
    period: int
    on_hand: float
    open_orders: tuple[OpenOrder, ...]
    cumulative_reward: float
    last_outcome: Optional[PeriodOutcome] = None


@dataclass(frozen=True)
class TrajectoryStep:
    action: float
    outcome: PeriodOutcome
    rationale: Optional[str] = None
    latency_s: Optional[float] = None


@dataclass(frozen=True)
class Trajectory:
    instance_id: str
    steps: tuple[TrajectoryStep, ...]

    @property
    def total_reward(self) -> float:
        return sum(s.outcome.reward for s in self.steps)

    @property
    def actions(self) -> tuple[float, ...]:
        return tuple(s.action for s in self.steps)


@dataclass(frozen=True)
class OrderView:
    """What the agent sees about one order: arrival period only once the
    shipment has actually landed.  Lost orders stay outstanding forever."""

    placed: int
    quantity: float
    arrived: bool
    arrival_period: Optional[int]


@dataclass(frozen=True)
class Observation:
    period: int
    horizon: int
    on_hand: float
    orders: tuple[OrderView, ...]
    pipeline: float
    history: tuple[int, ...]
    realized_demands: tuple[int, ...]
    previous_conclusion: Optional[str]
    context: str
    product_description: str
    profit: float
    holding: float
    promised_lead: int
    cumulative_reward: float

    @property
    def observed_demands(self) -> tuple[int, ...]:
        return self.history + self.realized_demands

    @property
    def critical_fractile(self) -> float:
        return self.profit / (self.profit + self.holding)


def _fmt_qty(x: float) -> str:
    if x == int(x):
        return str(int(x))
    return f"{x:.2f}"


def new_session(instance: Instance) -> SimState:
    """Fresh state: period 1, no on-hand inventory, empty pipeline."""
    instance.validate()
    return SimState(period=1, on_hand=0.0, open_orders=(), cumulative_reward=0.0)


def _conclude_message(outcome_period: int, arrivals: float, demand: int,
                      sales: float, ending: float) -> str:
    return (
        f"Period {outcome_period} conclude: arrivals {_fmt_qty(arrivals)}; "
        f"demand {demand}; sales {_fmt_qty(sales)}; "
        f"ending inventory {_fmt_qty(ending)}."
    )


def observe(state: SimState, instance: Instance) -> Observation:
    """Build the agent-visible observation at the start of the current period.

    Realized lead times stay hidden until an order actually arrives; until
    then the order (lost ones included) is just outstanding pipeline.
    """
    t = state.period
    if t > instance.horizon:
        raise EpisodeFinishedError(
            f"episode finished: horizon {instance.horizon} already played"
        )
    views = []
    pipeline = 0.0
    for order in state.open_orders:
        arrived = order.arrival is not None and order.arrival < t
        views.append(OrderView(
            placed=order.placed,
            quantity=order.quantity,
            arrived=arrived,
            arrival_period=order.arrival if arrived else None,
        ))
        if not arrived:
            pipeline += order.quantity
    context = instance.context[t - 1] if instance.context else ""
    return Observation(
        period=t,
        horizon=instance.horizon,
        on_hand=state.on_hand,
        orders=tuple(views),
        pipeline=pipeline,
        history=instance.history,
        realized_demands=instance.demands[: t - 1],
        previous_conclusion=state.last_outcome.conclude_message if state.last_outcome else None,
        context=context,
        product_description=instance.product_description,
        profit=instance.profit,
        holding=instance.holding,
        promised_lead=instance.promised_lead,
        cumulative_reward=state.cumulative_reward,
    )


def step(state: SimState, instance: Instance, quantity: float) -> tuple[SimState, PeriodOutcome]:
    """Play one period: record the order, receive arrivals (an order placed
    now with zero lead time arrives this very period), realize demand, and
    settle the reward ``p * sales - h * ending_inventory``."""
    t = state.period
    if t > instance.horizon:
        raise EpisodeFinishedError(
            f"episode finished: horizon {instance.horizon} already played"
        )
    if not math.isfinite(quantity) or quantity < 0:
        raise ValueError(f"order quantity must be a non-negative finite number, got {quantity!r}")

    ell = instance.lead_times[t - 1]
    arrival = None if ell == LOST else t + int(ell)
    orders = state.open_orders + (OpenOrder(placed=t, quantity=quantity, arrival=arrival),)

    arrivals = sum(o.quantity for o in orders if o.arrival == t)
    available = state.on_hand + arrivals
    demand = instance.demands[t - 1]
    sales = min(float(demand), available)
    ending = available - sales
    reward = instance.profit * sales - instance.holding * ending

    outcome = PeriodOutcome(
        period=t,
        arrivals=arrivals,
        demand=demand,
        sales=sales,
        ending_inventory=ending,
        reward=reward,
        conclude_message=_conclude_message(t, arrivals, demand, sales, ending),
    )
    next_state = SimState(
        period=t + 1,
        on_hand=ending,
        open_orders=orders,
        cumulative_reward=state.cumulative_reward + reward,
        last_outcome=outcome,
    )
    return next_state, outcome


def run_actions(instance: Instance, actions: Sequence[float]) -> Trajectory:
    """Replay a full action sequence; ``actions`` must cover the horizon."""
    if len(actions) != instance.horizon:
        raise ValueError(
            f"need {instance.horizon} actions, got {len(actions)}"
        )
    state = new_session(instance)
    steps = []
    for q in actions:
        state, outcome = step(state, instance, q)
        steps.append(TrajectoryStep(action=q, outcome=outcome))
    return Trajectory(instance_id=instance.id, steps=tuple(steps))


def _require_complete(traj: Trajectory, instance: Instance) -> None:
    if len(traj.steps) != instance.horizon:
        raise ValueError(
            f"trajectory has {len(traj.steps)} periods, instance horizon is {instance.horizon}"
        )


def normalized_reward(traj: Trajectory, instance: Instance) -> float:
    """Total profit over the optimistic revenue bound ``p * sum(demands)``,
    clipped at zero.  Zero total demand maps to zero by convention."""
    _require_complete(traj, instance)
    total_demand = sum(instance.demands)
    if total_demand == 0:
        return 0.0
    ratio = traj.total_reward / (instance.profit * total_demand)
    return max(ratio, 0.0)


def implicit_critical_fractile(traj: Trajectory) -> float:
    """Fraction of periods ending with strictly positive inventory."""
    if not traj.steps:
        raise ValueError("trajectory is empty")
    excess = sum(1 for s in traj.steps if s.outcome.ending_inventory > 0)
    return excess / len(traj.steps)


# --- Instance JSON schema (shared with the generators and the CLI) ---------

_LOST_TOKEN = "lost"


def _lead_to_json(ell: float):
    return _LOST_TOKEN if ell == LOST else int(ell)


def _lead_from_json(value) -> float:
    if value == _LOST_TOKEN:
        return LOST
    if isinstance(value, int) and value >= 0:
        return value
    raise InstanceError(f"lead_times entries must be non-negative integers or '{_LOST_TOKEN}', got {value!r}")


def instance_to_dict(instance: Instance) -> dict:
    return {
        "id": instance.id,
        "horizon": instance.horizon,
        "demands": list(instance.demands),
        "history": list(instance.history),
        "lead_times": [_lead_to_json(ell) for ell in instance.lead_times],
        "promised_lead": instance.promised_lead,
        "profit": instance.profit,
        "holding": instance.holding,
        "context": list(instance.context),
        "product_description": instance.product_description,
        "provenance": dict(instance.provenance),
    }


def instance_from_dict(data: Mapping[str, Any]) -> Instance:
    try:
        instance = Instance(
            id=str(data["id"]),
            horizon=int(data["horizon"]),
            demands=tuple(int(d) for d in data["demands"]),
            history=tuple(int(d) for d in data["history"]),
            lead_times=tuple(_lead_from_json(v) for v in data["lead_times"]),
            promised_lead=int(data["promised_lead"]),
            profit=float(data["profit"]),
            holding=float(data["holding"]),
            context=tuple(str(c) for c in data.get("context", ())),
            product_description=str(data.get("product_description", "")),
            provenance=dict(data.get("provenance", {})),
        )
    except KeyError as exc:
        raise InstanceError(f"instance document missing field {exc.args[0]!r}") from exc
    instance.validate()
    return instance


def trajectory_to_lines(traj: Trajectory) -> Iterable[dict]:
    """One JSON-friendly record per period, suitable for JSON-lines export."""
    for step_ in traj.steps:
        o = step_.outcome
        yield {
            "instance_id": traj.instance_id,
            "period": o.period,
            "action": step_.action,
            "arrivals": o.arrivals,
            "demand": o.demand,
            "sales": o.sales,
            "ending_inventory": o.ending_inventory,
            "reward": o.reward,
            "rationale": step_.rationale,
            "latency_s": step_.latency_s,
        }
