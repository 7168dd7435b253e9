"""Inventory-control benchmark platform: deterministic simulator, capped
base-stock policy, pluggable decision agents, instance generators, metrics,
human-in-the-loop game service, and complementarity statistics."""

__version__ = "0.1.0"

from .sim import (LOST, Instance, Observation, PeriodOutcome, SimState,
                  Trajectory, implicit_critical_fractile, new_session,
                  normalized_reward, observe, run_actions, step)

__all__ = [
    "LOST",
    "Instance",
    "Observation",
    "PeriodOutcome",
    "SimState",
    "Trajectory",
    "implicit_critical_fractile",
    "new_session",
    "normalized_reward",
    "observe",
    "run_actions",
    "step",
    "__version__",
]
