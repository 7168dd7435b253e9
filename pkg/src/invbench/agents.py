"""Decision agents: the pure baseline, model-backed methods, and an offline
scripted mock so every method is testable without a live endpoint.

All model-backed methods make a single stateless chat call per period; the
only cross-period memory is the insight store owned by the episode runner.
On malformed output the caller re-prompts once, then falls back to the
baseline quantity (or zero if there is none).
"""

from __future__ import annotations

import json
import os
import re
import time
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Optional, Protocol, Sequence

from . import prompts
from .parsing import (ParsedDecision, ParsedEstimate, ResponseParseError,
                      parse_decision, parse_param_estimate)
from .policy import ORAdvice, ParamEstimate, apply_param_estimate
from .sim import Instance, Observation


class Method(str, Enum):
    OR = "or"
    LLM = "llm"
    OR_TO_LLM = "or_to_llm"
    LLM_TO_OR = "llm_to_or"

    @property
    def uses_model(self) -> bool:
        return self is not Method.OR

    @property
    def uses_or_advice(self) -> bool:
        return self in (Method.OR, Method.OR_TO_LLM)


class AgentError(RuntimeError):
    """Endpoint failure after retries; carries period context."""

    def __init__(self, message: str, *, instance_id: str = "", period: int = 0):
        super().__init__(message)
        self.instance_id = instance_id
        self.period = period


@dataclass(frozen=True)
class EndpointConfig:
    base_url: str
    model: str
    api_key_env: str = "INVBENCH_API_KEY"
    timeout_s: float = 120.0


@dataclass(frozen=True)
class MockScript:
    """Tiny scripted policy language for offline runs.

    kinds:
      follow_or    -- echo the baseline recommendation found in the prompt
      constant     -- always order ``value``
      by_period    -- order ``values[t-1]`` (last value repeats)
      params       -- return parameter estimates (``estimates`` or per-period
                      ``estimate_list``); empty dict means baseline defaults
      raw          -- verbatim response texts per period (parser fixtures)
    """

    kind: str
    value: float = 0.0
    values: tuple[float, ...] = ()
    estimates: dict = field(default_factory=dict)
    estimate_list: tuple[dict, ...] = ()
    raw_responses: tuple[str, ...] = ()
    insight: str = ""

    @staticmethod
    def from_file(path) -> "MockScript":
        doc = json.loads(Path(path).read_text())
        return MockScript(
            kind=doc["kind"],
            value=float(doc.get("value", 0.0)),
            values=tuple(float(v) for v in doc.get("values", ())),
            estimates=dict(doc.get("estimates", {})),
            estimate_list=tuple(dict(e) for e in doc.get("estimate_list", ())),
            raw_responses=tuple(doc.get("raw_responses", ())),
            insight=str(doc.get("insight", "")),
        )


@dataclass(frozen=True)
class AgentConfig:
    method: Method
    endpoint: Optional[EndpointConfig] = None
    mock: Optional[MockScript] = None
    temperature: float = 0.0
    max_retries: int = 2
    reprompt_on_parse_error: bool = True
    name: Optional[str] = None

    @property
    def label(self) -> str:
        if self.name:
            return self.name
        if self.mock is not None and self.method.uses_model:
            return f"mock-{self.mock.kind}:{self.method.value}"
        return self.method.value

    def validate(self) -> None:
        if self.method.uses_model and self.endpoint is None and self.mock is None:
            raise ValueError(f"method {self.method.value} needs an endpoint or a mock script")


def agent_config_from_spec(spec: str) -> AgentConfig:
    """CLI shorthand: ``or`` | ``mock:follow-or[:method]`` | ``mock-file:PATH[:method]``
    | ``llm:BASE_URL:MODEL[:method]``."""
    parts = spec.split(":")
    head = parts[0].lower()
    if head == "or":
        return AgentConfig(method=Method.OR, name="or")
    if head == "mock":
        kind = parts[1].replace("-", "_") if len(parts) > 1 else "follow_or"
        method = Method(parts[2]) if len(parts) > 2 else (
            Method.LLM_TO_OR if kind == "params" else Method.OR_TO_LLM)
        return AgentConfig(method=method, mock=MockScript(kind=kind), name=spec)
    if head == "mock-file":
        script = MockScript.from_file(parts[1])
        method = Method(parts[2]) if len(parts) > 2 else Method.OR_TO_LLM
        return AgentConfig(method=method, mock=script, name=spec)
    if head == "llm":
        if len(parts) < 3:
            raise ValueError("llm spec is llm:BASE_URL:MODEL[:method]")
        # base URLs contain colons, so resolve the tail from the right
        method_names = {m.value for m in Method}
        if parts[-1].lower() in method_names and len(parts) >= 4:
            method = Method(parts[-1].lower())
            model = parts[-2]
            base_url = ":".join(parts[1:-2])
        else:
            method = Method.OR_TO_LLM
            model = parts[-1]
            base_url = ":".join(parts[1:-1])
        return AgentConfig(method=method,
                           endpoint=EndpointConfig(base_url=base_url, model=model),
                           name=spec)
    raise ValueError(f"unknown agent spec {spec!r}")


@dataclass(frozen=True)
class Decision:
    quantity: float
    rationale: str = ""
    short_rationale_for_human: str = ""
    carry_over_insight: Optional[str] = None
    or_advice: Optional[ORAdvice] = None
    estimate: Optional[ParamEstimate] = None
    fallback: bool = False


class InsightStore:
    """Per-episode memos keyed by origin period.  An agent's non-empty memo
    for the current period is stored; an explicit empty string removes the
    current period's entry."""

    def __init__(self):
        self._memos: dict[int, str] = {}

    def items(self) -> tuple[tuple[int, str], ...]:
        return tuple(sorted(self._memos.items()))

    def update(self, period: int, memo: Optional[str]) -> None:
        if memo is None:
            return
        memo = memo.strip()
        if memo:
            self._memos[period] = memo
        else:
            self._memos.pop(period, None)

    def __len__(self) -> int:
        return len(self._memos)


class ChatTransport(Protocol):
    def complete(self, system: str, user: str) -> str: ...


class HttpChatEndpoint:
    """Chat-completions wire contract: POST ``{base_url}/chat/completions``
    with system/user messages; the reply text lives at
    ``choices[0].message.content``.  Credentials come from the configured
    environment variable."""

    def __init__(self, config: EndpointConfig, temperature: float = 0.0):
        import httpx
        self._config = config
        self._temperature = temperature
        headers = {"Content-Type": "application/json"}
        api_key = os.environ.get(config.api_key_env, "")
        if api_key:
            headers["Authorization"] = f"Bearer {api_key}"
        self._client = httpx.Client(base_url=config.base_url, headers=headers,
                                    timeout=config.timeout_s)

    def complete(self, system: str, user: str) -> str:
        payload = {
            "model": self._config.model,
            "temperature": self._temperature,
            "messages": [
                {"role": "system", "content": system},
                {"role": "user", "content": user},
            ],
        }
        response = self._client.post("/chat/completions", json=payload)
        response.raise_for_status()
        body = response.json()
        return body["choices"][0]["message"]["content"]


_OR_EXACT_RE = re.compile(r"order \d+ units \(exact: ([0-9.eE+-]+)\)")


class MockTransport:
    """Deterministic scripted stand-in for a chat endpoint.  It reads the
    rendered user message like a model would (e.g. to follow the baseline
    recommendation), so the full prompt/parse path is exercised."""

    def __init__(self, script: MockScript):
        self._script = script
        self._calls = 0

    @staticmethod
    def _period_of(user: str) -> int:
        match = re.search(r"OBSERVATION - PERIOD (\d+)", user)
        return int(match.group(1)) if match else 1

    @staticmethod
    def _item_of(system: str) -> str:
        match = re.search(r'single SKU "([^"]+)"', system)
        return match.group(1) if match else "sku"

    def complete(self, system: str, user: str) -> str:
        self._calls += 1
        script = self._script
        period = self._period_of(user)
        item_id = self._item_of(system)
        if script.kind == "raw":
            idx = min(self._calls - 1, len(script.raw_responses) - 1)
            return script.raw_responses[idx]
        if script.kind == "params":
            if script.estimate_list:
                idx = min(period - 1, len(script.estimate_list) - 1)
                estimates = script.estimate_list[idx]
            else:
                estimates = script.estimates
            return json.dumps({
                "rationale": f"scripted parameter estimates for period {period}",
                "short_rationale_for_human": "scripted estimates",
                "carry_over_insight": script.insight,
                "estimates": estimates,
            })
        if script.kind == "follow_or":
            match = _OR_EXACT_RE.search(user)
            if not match:
                raise AgentError("follow_or mock found no baseline recommendation in prompt")
            quantity = float(match.group(1))
            rationale = "Following the baseline recommendation."
        elif script.kind == "constant":
            quantity = float(script.value)
            rationale = f"Scripted constant order of {script.value}."
        elif script.kind == "by_period":
            idx = min(period - 1, len(script.values) - 1)
            quantity = float(script.values[idx])
            rationale = f"Scripted order for period {period}."
        else:
            raise ValueError(f"unknown mock script kind {script.kind!r}")
        return json.dumps({
            "rationale": rationale,
            "short_rationale_for_human": rationale,
            "carry_over_insight": script.insight,
            "action": {item_id: quantity},
        })


def make_transport(config: AgentConfig) -> Optional[ChatTransport]:
    if not config.method.uses_model:
        return None
    if config.mock is not None:
        return MockTransport(config.mock)
    return HttpChatEndpoint(config.endpoint, temperature=config.temperature)


_REPROMPT_SUFFIX = (
    "\n\nYour previous reply could not be parsed ({reason}). "
    "Respond again with a single valid JSON object in the required format."
)


def _call_with_retries(transport: ChatTransport, system: str, user: str,
                       config: AgentConfig, obs: Observation,
                       instance: Instance) -> str:
    last_error: Optional[Exception] = None
    for attempt in range(config.max_retries + 1):
        try:
            return transport.complete(system, user)
        except Exception as exc:  # noqa: BLE001 - endpoint errors are opaque
            last_error = exc
            if attempt < config.max_retries:
                time.sleep(min(2.0 ** attempt * 0.1, 2.0))
    raise AgentError(
        f"model call failed after {config.max_retries + 1} attempts: {last_error}",
        instance_id=instance.id, period=obs.period)


def decide(config: AgentConfig, instance: Instance, obs: Observation,
           or_advice: Optional[ORAdvice] = None,
           insights: Optional[InsightStore] = None,
           guidance: Sequence[tuple[int, str]] = (),
           feedback: Optional[tuple[float, str]] = None,
           transport: Optional[ChatTransport] = None) -> Decision:
    """One period's decision under the configured method.

    ``or_advice`` must be supplied exactly for the methods that consume it
    (pure baseline and baseline-advised model).  ``feedback`` carries the
    two-stage flow's (stage-1 quantity, human message) pair.
    """
    config.validate()
    method = config.method
    if method.uses_or_advice and or_advice is None:
        raise ValueError(f"method {method.value} requires baseline advice")
    if not method.uses_or_advice and or_advice is not None:
        raise ValueError(f"method {method.value} must not receive baseline advice")

    if method is Method.OR:
        return Decision(
            quantity=or_advice.quantity,
            rationale=(
                f"Capped base-stock: target {or_advice.base_stock:.2f}, position "
                f"{or_advice.inventory_position:g}, cap {or_advice.cap:.2f} -> order "
                f"{or_advice.quantity:.2f}."),
            short_rationale_for_human=(
                f"Order up to the base-stock target of {or_advice.base_stock:.0f} "
                f"units, capped at {or_advice.cap:.0f}."),
            or_advice=or_advice,
        )

    if transport is None:
        transport = make_transport(config)
    insight_items = insights.items() if insights is not None else ()
    system, user = prompts.build_prompts(
        method.value, instance, obs, or_advice=or_advice,
        insights=insight_items, guidance=guidance, feedback=feedback,
        guidance_enabled=bool(guidance))

    def attempt(user_text: str):
        raw = _call_with_retries(transport, system, user_text, config, obs, instance)
        if method is Method.LLM_TO_OR:
            return parse_param_estimate(raw)
        return parse_decision(raw, item_id=prompts.item_label(instance))

    try:
        parsed = attempt(user)
    except ResponseParseError as first_error:
        if not config.reprompt_on_parse_error:
            return _fallback_decision(method, obs, or_advice, first_error)
        try:
            parsed = attempt(user + _REPROMPT_SUFFIX.format(reason=first_error.reason))
        except ResponseParseError as second_error:
            return _fallback_decision(method, obs, or_advice, second_error)

    if isinstance(parsed, ParsedEstimate):
        advice = apply_param_estimate(parsed.estimate, obs)
        return Decision(
            quantity=advice.quantity,
            rationale=parsed.rationale,
            short_rationale_for_human=parsed.short_rationale,
            carry_over_insight=parsed.carry_over_insight,
            or_advice=advice,
            estimate=parsed.estimate,
        )
    assert isinstance(parsed, ParsedDecision)
    return Decision(
        quantity=parsed.quantity,
        rationale=parsed.rationale,
        short_rationale_for_human=parsed.short_rationale,
        carry_over_insight=parsed.carry_over_insight,
        or_advice=or_advice,
    )


def _fallback_decision(method: Method, obs: Observation,
                       or_advice: Optional[ORAdvice],
                       error: ResponseParseError) -> Decision:
    if method is Method.LLM_TO_OR:
        advice = apply_param_estimate(ParamEstimate(), obs)
        quantity = advice.quantity
    elif or_advice is not None:
        advice = or_advice
        quantity = or_advice.quantity
    else:
        advice = None
        quantity = 0.0
    return Decision(
        quantity=quantity,
        rationale=f"fallback after unparseable model output ({error.reason}): {error}",
        short_rationale_for_human="Model output could not be parsed; used the baseline.",
        or_advice=advice,
        fallback=True,
    )
