"""HTTP service hosting live human-in-the-loop sessions.

Three collaboration modes share one session engine:
  A -- the participant sees the baseline recommendation and orders;
  B -- the participant additionally sees the agent proposal and its short
       rationale, then orders;
  C -- the agent orders autonomously; the participant may leave free-form
       guidance at scheduled pauses (before periods 1, 5, 9, ...), which is
       prepended to every subsequent agent prompt.

Every state change is appended to a durable JSON-lines event log before the
response returns; replaying the logged orders through the simulator
reproduces the stored outcomes exactly.
"""

from __future__ import annotations

import hashlib
import itertools
import json
import math
import threading
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

from .agents import AgentConfig, InsightStore, Method, decide, make_transport
from .complementarity import MODE_GUIDED, MODE_HUMAN, MODE_TEAM
from .policy import demand_stats, or_recommendation
from .sim import (Instance, SimState, implicit_critical_fractile, new_session,
                  normalized_reward, observe, step, Trajectory, TrajectoryStep)

MODES = ("A", "B", "C")

#: experiment-log sample labels per collaboration mode
SAMPLE_MODE = {"A": MODE_HUMAN, "B": MODE_TEAM, "C": MODE_GUIDED}

_PERMUTATIONS = tuple(itertools.permutations(MODES))


class ServiceError(Exception):
    def __init__(self, message: str, status: int = 400, **extra):
        super().__init__(message)
        self.status = status
        self.extra = extra


@dataclass(frozen=True)
class Assignment:
    participant: str
    modes: tuple[str, ...]   # modes[i] is the mode for instance index i

    def to_dict(self) -> dict:
        return {"participant": self.participant, "modes": list(self.modes)}


@dataclass
class GameConfig:
    instances: Sequence[Instance]
    agent: AgentConfig
    seed: int = 42
    allocator: str = "hash"              # "hash" | "balanced"
    pause_every: int = 4
    log_path: Optional[Path] = None
    two_stage_feedback: bool = False
    cors_origins: tuple[str, ...] = ("*",)

    def __post_init__(self):
        if len(self.instances) != 3:
            raise ValueError("the experiment uses exactly 3 configured instances")
        if self.agent.method is Method.OR:
            raise ValueError("the game agent must be a model-backed method")


@dataclass
class Session:
    session_id: str
    participant: str
    instance_index: int
    mode: str
    instance: Instance
    state: SimState
    insights: InsightStore
    steps: list[TrajectoryStep] = field(default_factory=list)
    guidance: list[tuple[int, str]] = field(default_factory=list)
    pending_proposal: Optional[dict] = None
    awaiting_guidance: bool = False
    status: str = "active"
    lock: threading.Lock = field(default_factory=threading.Lock)

    @property
    def period(self) -> int:
        return self.state.period

    @property
    def finished(self) -> bool:
        return self.status == "finished"


class GameService:
    """Framework-free core; the FastAPI layer is a thin adapter."""

    def __init__(self, config: GameConfig):
        config.agent.validate()
        self.config = config
        self._assignments: dict[str, Assignment] = {}
        self._sessions: dict[str, Session] = {}
        self._played: set[tuple[str, int]] = set()
        self._events: list[dict] = []
        self._event_seq = 0
        self._session_seq = 0
        self._balanced_counter = 0
        self._lock = threading.Lock()
        self._transport = make_transport(config.agent)
        if config.log_path:
            config.log_path.parent.mkdir(parents=True, exist_ok=True)

    # --- event log -----------------------------------------------------------

    def _log(self, session_id: str, kind: str, payload: dict) -> None:
        with self._lock:
            self._event_seq += 1
            record = {"type": "event", "seq": self._event_seq,
                      "session": session_id, "ts": time.time(),
                      "kind": kind, "payload": payload}
            self._events.append(record)
            if self.config.log_path:
                with self.config.log_path.open("a") as fh:
                    fh.write(json.dumps(record, sort_keys=True) + "\n")
                    fh.flush()

    # --- assignment ----------------------------------------------------------

    def create_assignment(self, participant: str) -> Assignment:
        participant = participant.strip()
        if not participant:
            raise ServiceError("participant token must be non-empty", status=422)
        with self._lock:
            existing = self._assignments.get(participant)
            if existing:
                return existing
            if self.config.allocator == "balanced":
                index = self._balanced_counter % len(_PERMUTATIONS)
                self._balanced_counter += 1
            else:
                digest = hashlib.sha256(
                    f"{self.config.seed}:{participant}".encode()).digest()
                index = int.from_bytes(digest[:8], "big") % len(_PERMUTATIONS)
            assignment = Assignment(participant=participant,
                                    modes=_PERMUTATIONS[index])
            self._assignments[participant] = assignment
        self._log("-", "assignment", assignment.to_dict())
        return assignment

    # --- session lifecycle -----------------------------------------------------

    def _session(self, session_id: str) -> Session:
        session = self._sessions.get(session_id)
        if session is None:
            raise ServiceError(f"unknown session {session_id!r}", status=404)
        return session

    def start_session(self, participant: str, instance_index: int) -> Session:
        assignment = self._assignments.get(participant.strip())
        if assignment is None:
            raise ServiceError("create an assignment first", status=404)
        if not 0 <= instance_index < len(self.config.instances):
            raise ServiceError(f"instance index must be 0..2, got {instance_index}",
                               status=422)
        with self._lock:
            if (participant, instance_index) in self._played:
                raise ServiceError("instance already played by this participant",
                                   status=409)
            self._played.add((participant, instance_index))
            self._session_seq += 1
            session_id = f"sess-{self._session_seq:04d}"
        instance = self.config.instances[instance_index]
        session = Session(
            session_id=session_id,
            participant=participant,
            instance_index=instance_index,
            mode=assignment.modes[instance_index],
            instance=instance,
            state=new_session(instance),
            insights=InsightStore(),
        )
        self._sessions[session_id] = session
        self._log(session_id, "session_started", {
            "participant": participant, "instance": instance.id,
            "instance_index": instance_index, "mode": session.mode})
        if session.mode == "C":
            session.awaiting_guidance = True
        else:
            self._prepare_turn(session)
        return session

    # --- per-period machinery ---------------------------------------------------

    def _or_advice(self, session: Session):
        obs = observe(session.state, session.instance)
        advice = or_recommendation(obs)
        self._log(session.session_id, "or_advice", {
            "period": obs.period,
            "quantity": advice.quantity,
            "base_stock": advice.base_stock,
            "inventory_position": advice.inventory_position,
            "demand_mean": advice.demand_mean,
            "demand_std": advice.demand_std,
            "cap": advice.cap,
        })
        return obs, advice

    def _agent_decision(self, session: Session, obs, advice):
        decision = decide(self.config.agent, session.instance, obs,
                          or_advice=advice, insights=session.insights,
                          guidance=tuple(session.guidance),
                          transport=self._transport)
        session.insights.update(obs.period, decision.carry_over_insight)
        return decision

    def _prepare_turn(self, session: Session) -> None:
        """Modes A/B: log the observation and, for B, compute the proposal."""
        obs, advice = self._or_advice(session)
        self._log(session.session_id, "observe", {
            "period": obs.period, "on_hand": obs.on_hand,
            "pipeline": obs.pipeline})
        session.pending_proposal = None
        if session.mode == "B":
            decision = self._agent_decision(session, obs, advice)
            session.pending_proposal = {
                "period": obs.period,
                "quantity": decision.quantity,
                "displayed_quantity": int(round(decision.quantity)),
                "short_rationale": decision.short_rationale_for_human,
            }
            self._log(session.session_id, "ai_proposal", session.pending_proposal)
        session._last_advice = advice  # type: ignore[attr-defined]

    def _apply_order(self, session: Session, quantity: float, kind: str,
                     rationale: Optional[str] = None) -> dict:
        state, outcome = step(session.state, session.instance, quantity)
        session.state = state
        session.steps.append(TrajectoryStep(action=quantity, outcome=outcome,
                                            rationale=rationale))
        self._log(session.session_id, kind, {
            "period": outcome.period, "quantity": quantity})
        self._log(session.session_id, "outcome", {
            "period": outcome.period,
            "arrivals": outcome.arrivals,
            "demand": outcome.demand,
            "sales": outcome.sales,
            "ending_inventory": outcome.ending_inventory,
            "reward": outcome.reward,
        })
        if state.period > session.instance.horizon:
            self._finish(session)
        return {
            "period": outcome.period,
            "arrivals": outcome.arrivals,
            "demand": outcome.demand,
            "sales": outcome.sales,
            "ending_inventory": outcome.ending_inventory,
            "reward": outcome.reward,
            "cumulative_reward": state.cumulative_reward,
        }

    def _finish(self, session: Session) -> None:
        session.status = "finished"
        traj = Trajectory(instance_id=session.instance.id,
                          steps=tuple(session.steps))
        final = {
            "participant": session.participant,
            "instance": session.instance.id,
            "instance_index": session.instance_index,
            "mode": session.mode,
            "total_reward": traj.total_reward,
            "normalized_reward": normalized_reward(traj, session.instance),
            "implicit_fractile": implicit_critical_fractile(traj),
        }
        session.final = final  # type: ignore[attr-defined]
        self._log(session.session_id, "session_finished", final)

    # --- public actions ----------------------------------------------------------

    def submit_order(self, session_id: str, quantity) -> dict:
        session = self._session(session_id)
        with session.lock:
            if session.finished:
                raise ServiceError("session already finished", status=409)
            if session.mode not in ("A", "B"):
                raise ServiceError("ordering is disabled in mode C", status=405)
            if quantity is None:
                raise ServiceError("order quantity is required", status=422)
            if (isinstance(quantity, bool) or not isinstance(quantity, (int, float))
                    or not math.isfinite(quantity) or quantity < 0
                    or quantity != int(quantity)):
                raise ServiceError(
                    f"order quantity must be a non-negative integer, got {quantity!r}",
                    status=422)
            outcome = self._apply_order(session, float(int(quantity)), "human_order")
            if not session.finished:
                self._prepare_turn(session)
            return self.session_view(session_id, outcome=outcome)

    def submit_feedback(self, session_id: str, text: str) -> dict:
        """Two-stage revision (behind ``two_stage_feedback``): the agent sees
        the human's reaction to its stage-1 proposal and outputs a revised
        proposal; the human still places the final order."""
        if not self.config.two_stage_feedback:
            raise ServiceError("two-stage feedback is disabled", status=405)
        session = self._session(session_id)
        with session.lock:
            if session.finished:
                raise ServiceError("session already finished", status=409)
            if session.mode != "B":
                raise ServiceError("feedback is only available in mode B", status=405)
            if session.pending_proposal is None:
                raise ServiceError("no proposal to revise", status=409)
            text = (text or "").strip()
            self._log(session.session_id, "feedback", {
                "period": session.period, "text": text})
            obs = observe(session.state, session.instance)
            advice = getattr(session, "_last_advice")
            decision = decide(self.config.agent, session.instance, obs,
                              or_advice=advice, insights=session.insights,
                              feedback=(session.pending_proposal["quantity"], text),
                              transport=self._transport)
            session.insights.update(obs.period, decision.carry_over_insight)
            session.pending_proposal = {
                "period": obs.period,
                "quantity": decision.quantity,
                "displayed_quantity": int(round(decision.quantity)),
                "short_rationale": decision.short_rationale_for_human,
                "revised": True,
            }
            self._log(session.session_id, "ai_proposal", session.pending_proposal)
            return self.session_view(session_id)

    def submit_guidance(self, session_id: str, text: str) -> dict:
        session = self._session(session_id)
        with session.lock:
            if session.finished:
                raise ServiceError("session already finished", status=409)
            if session.mode != "C":
                raise ServiceError("guidance is only available in mode C", status=405)
            if not session.awaiting_guidance:
                raise ServiceError(
                    "guidance is accepted only at scheduled pauses",
                    status=409, next_pause_period=self._next_pause(session))
            text = (text or "").strip()
            session.guidance.append((session.period, text))
            session.awaiting_guidance = False
            self._log(session.session_id, "guidance", {
                "period": session.period, "text": text})
            played = []
            block_end = min(session.period + self.config.pause_every - 1,
                            session.instance.horizon)
            while not session.finished and session.period <= block_end:
                obs, advice = self._or_advice(session)
                self._log(session.session_id, "observe", {
                    "period": obs.period, "on_hand": obs.on_hand,
                    "pipeline": obs.pipeline})
                decision = self._agent_decision(session, obs, advice)
                self._log(session.session_id, "ai_proposal", {
                    "period": obs.period,
                    "quantity": decision.quantity,
                    "displayed_quantity": int(round(decision.quantity)),
                    "short_rationale": decision.short_rationale_for_human,
                })
                played.append(self._apply_order(
                    session, decision.quantity, "auto_order",
                    rationale=decision.rationale))
            if not session.finished:
                session.awaiting_guidance = True
            return self.session_view(session_id, autoplayed=played)

    def _next_pause(self, session: Session) -> int:
        period = session.period
        every = self.config.pause_every
        offset = (period - 1) % every
        return period if offset == 0 else period + (every - offset)

    # --- views ---------------------------------------------------------------------

    def assignment_view(self, participant: str) -> dict:
        assignment = self._assignments.get(participant)
        if assignment is None:
            raise ServiceError("no assignment for this participant", status=404)
        played = sorted(i for (p, i) in self._played if p == participant)
        sessions = {s.instance_index: s for s in self._sessions.values()
                    if s.participant == participant}
        return {
            **assignment.to_dict(),
            "instances": [
                {"index": i, "id": inst.id,
                 "product_description": inst.product_description,
                 "mode": assignment.modes[i],
                 "started": i in played,
                 "session_id": sessions[i].session_id if i in sessions else None,
                 "finished": i in sessions and sessions[i].finished,
                 "final": getattr(sessions[i], "final", None) if i in sessions else None}
                for i, inst in enumerate(self.config.instances)
            ],
        }

    def session_view(self, session_id: str, outcome: Optional[dict] = None,
                     autoplayed: Optional[list] = None) -> dict:
        session = self._session(session_id)
        instance = session.instance
        obs = None
        if not session.finished:
            obs = observe(session.state, instance)
        realized = [s.outcome.demand for s in session.steps]
        observed = list(instance.history) + realized
        mean, std = demand_stats(observed)
        inventory_history = [
            {"period": s.outcome.period,
             "ending_inventory": s.outcome.ending_inventory,
             "arrivals": s.outcome.arrivals,
             "action": s.action}
            for s in session.steps
        ]
        view: dict = {
            "session_id": session.session_id,
            "participant": session.participant,
            "instance_id": instance.id,
            "instance_index": session.instance_index,
            "mode": session.mode,
            "status": session.status,
            "horizon": instance.horizon,
            "period": min(session.period, instance.horizon),
            "product_description": instance.product_description,
            "parameters": {
                "profit": instance.profit,
                "holding": instance.holding,
                "promised_lead": instance.promised_lead,
            },
            "cumulative_reward": session.state.cumulative_reward,
            "demand_history": {
                "seed": list(instance.history),
                "realized": realized,
                "mean": mean,
                "std": std,
            },
            "inventory_history": inventory_history,
            "latest_demand": realized[-1] if realized else None,
        }
        if outcome is not None:
            view["last_outcome"] = outcome
        if autoplayed is not None:
            view["autoplayed"] = autoplayed
        if session.finished:
            view["final"] = getattr(session, "final")
            return view

        view["on_hand"] = obs.on_hand
        view["in_transit"] = obs.pipeline
        view["context"] = obs.context
        view["previous_conclusion"] = obs.previous_conclusion
        if session.mode in ("A", "B"):
            advice = getattr(session, "_last_advice")
            view["or_recommendation"] = {
                "quantity": advice.quantity,
                "displayed_quantity": int(round(advice.quantity)),
                "base_stock": advice.base_stock,
                "inventory_position": advice.inventory_position,
                "demand_mean": advice.demand_mean,
                "demand_std": advice.demand_std,
                "cap": advice.cap,
            }
        if session.mode == "B":
            view["ai_proposal"] = session.pending_proposal
        if session.mode == "C":
            view["awaiting_guidance"] = session.awaiting_guidance
            view["next_pause_period"] = self._next_pause(session)
            view["guidance_history"] = [
                {"period": p, "text": t} for p, t in session.guidance]
        return view

    # --- export ----------------------------------------------------------------------

    def export_log(self, participant: Optional[str] = None,
                   instance: Optional[str] = None) -> list[dict]:
        """Event records plus one complementarity sample per finished session."""
        def keep(session: Session) -> bool:
            if participant and session.participant != participant:
                return False
            if instance and session.instance.id != instance:
                return False
            return True

        lines: list[dict] = []
        kept_sessions = {s.session_id for s in self._sessions.values() if keep(s)}
        for event in self._events:
            if event["session"] in kept_sessions or event["session"] == "-":
                lines.append(event)
        for session in self._sessions.values():
            if session.finished and keep(session):
                final = getattr(session, "final")
                lines.append({
                    "type": "sample",
                    "participant": session.participant,
                    "instance": session.instance.id,
                    "mode": SAMPLE_MODE[session.mode],
                    "reward": final["normalized_reward"],
                })
        return lines


# --- default experiment instances ------------------------------------------------

def default_experiment_instances(seed: int = 42) -> list[Instance]:
    """Three bundled stand-in instances mirroring the live experiment's
    lead-time structure: immediate delivery, one-period delay, and a
    stochastic regime where orders arrive next period with probability 75%
    or never.  Demand is seasonal around 100 units over a 47-period horizon."""
    import numpy as np

    from .benchmark import HUMAN_LEAD_CONFIG, LeadTimeConfig

    horizon = 47
    specs = [
        ("swim-brief", "Timeless midrise swim brief, womenswear; fully lined.",
         LeadTimeConfig("fixed", fixed=0, label="L0"), 0),
        ("wool-blazer", "Single-breasted wool-blend blazer with notch lapels.",
         LeadTimeConfig("fixed", fixed=1, label="L1"), 1),
        ("slim-trousers", "Slim-fit suit trousers in stretch twill.",
         HUMAN_LEAD_CONFIG, 2),
    ]
    instances = []
    start = np.datetime64("2019-02-11")
    for name, description, lead_cfg, idx in specs:
        rng = np.random.default_rng([seed, 5000 + idx])
        t = np.arange(1, horizon + 1)
        phase = rng.uniform(0, 2 * np.pi)
        means = 100 + 35 * np.sin(2 * np.pi * t / 26 + phase) + 0.4 * t
        demands = tuple(int(max(0, round(x))) for x in rng.normal(means, 18))
        history = tuple(int(max(0, round(x)))
                        for x in rng.normal(means[0], 18, size=5))
        lead_rng = np.random.default_rng([seed, 6000 + idx])
        context = tuple(
            f"Week starting {start + np.timedelta64(7 * (k - 1), 'D')}"
            for k in t)
        instances.append(Instance(
            id=f"exp-{idx + 1}-{name}",
            horizon=horizon,
            demands=demands,
            history=history,
            lead_times=lead_cfg.draw(horizon, lead_rng),
            promised_lead=lead_cfg.promised_lead,
            profit=4.0,
            holding=1.0,
            context=context,
            product_description=description,
            provenance={"kind": "experiment", "item_id": name,
                        "lead": lead_cfg.label, "lead_kind": lead_cfg.kind},
        ))
    return instances


# --- FastAPI adapter ---------------------------------------------------------------

from pydantic import BaseModel


class AssignmentRequest(BaseModel):
    participant: str


class StartRequest(BaseModel):
    participant: str
    instance_index: int


class OrderRequest(BaseModel):
    quantity: Optional[float] = None


class GuidanceRequest(BaseModel):
    text: str = ""


def create_app(config: GameConfig):
    from fastapi import FastAPI, HTTPException
    from fastapi.middleware.cors import CORSMiddleware
    from fastapi.responses import PlainTextResponse

    service = GameService(config)
    app = FastAPI(title="inventory game service", version="1")
    app.state.service = service
    app.add_middleware(
        CORSMiddleware,
        allow_origins=list(config.cors_origins),
        allow_methods=["*"],
        allow_headers=["*"],
    )

    def run(fn, *args):
        try:
            return fn(*args)
        except ServiceError as exc:
            raise HTTPException(status_code=exc.status,
                                detail={"message": str(exc), **exc.extra})

    @app.get("/api/v1/health")
    def health():
        return {"status": "ok", "instances": [i.id for i in config.instances],
                "agent": config.agent.label}

    @app.post("/api/v1/assignments")
    def create_assignment(body: AssignmentRequest):
        run(service.create_assignment, body.participant)
        return run(service.assignment_view, body.participant)

    @app.get("/api/v1/assignments/{participant}")
    def get_assignment(participant: str):
        return run(service.assignment_view, participant)

    @app.post("/api/v1/sessions")
    def start_session(body: StartRequest):
        session = run(service.start_session, body.participant, body.instance_index)
        return run(service.session_view, session.session_id)

    @app.get("/api/v1/sessions/{session_id}")
    def get_session(session_id: str):
        return run(service.session_view, session_id)

    @app.post("/api/v1/sessions/{session_id}/order")
    def submit_order(session_id: str, body: OrderRequest):
        return run(service.submit_order, session_id, body.quantity)

    @app.post("/api/v1/sessions/{session_id}/guidance")
    def submit_guidance(session_id: str, body: GuidanceRequest):
        return run(service.submit_guidance, session_id, body.text)

    @app.post("/api/v1/sessions/{session_id}/feedback")
    def submit_feedback(session_id: str, body: GuidanceRequest):
        return run(service.submit_feedback, session_id, body.text)

    @app.get("/api/v1/export", response_class=PlainTextResponse)
    def export(participant: Optional[str] = None, instance: Optional[str] = None):
        lines = run(service.export_log, participant, instance)
        return "\n".join(json.dumps(line, sort_keys=True) for line in lines) + "\n"

    return app
