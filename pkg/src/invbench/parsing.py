"""Strict-but-tolerant extraction of structured model output.

Responses may wrap the JSON object in prose or code fences; we scan for the
first parseable object that carries the required key.  Validation failures
raise :class:`ResponseParseError` with a reason code so callers can apply
their fallback policy.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Any, Optional

from .policy import ParamEstimate


class ResponseParseError(ValueError):
    def __init__(self, reason: str, message: str):
        super().__init__(message)
        self.reason = reason


@dataclass(frozen=True)
class ParsedDecision:
    quantity: float
    rationale: str = ""
    short_rationale: str = ""
    carry_over_insight: Optional[str] = None


@dataclass(frozen=True)
class ParsedEstimate:
    estimate: ParamEstimate
    rationale: str = ""
    short_rationale: str = ""
    carry_over_insight: Optional[str] = None


def _json_candidates(text: str):
    decoder = json.JSONDecoder()
    idx = 0
    while True:
        start = text.find("{", idx)
        if start < 0:
            return
        try:
            obj, end = decoder.raw_decode(text[start:])
        except json.JSONDecodeError:
            idx = start + 1
            continue
        if isinstance(obj, dict):
            yield obj
        idx = start + max(end, 1)


def extract_json_object(text: str, required_key: str) -> dict:
    if not text or not text.strip():
        raise ResponseParseError("empty", "response is empty")
    fallback = None
    for obj in _json_candidates(text):
        if required_key in obj:
            return obj
        if fallback is None:
            fallback = obj
    if fallback is not None:
        raise ResponseParseError(
            "missing_key", f"no JSON object with key {required_key!r} found")
    raise ResponseParseError("no_json", "no JSON object found in response")


def _coerce_quantity(value: Any) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ResponseParseError("bad_quantity", f"quantity is not numeric: {value!r}")
    q = float(value)
    if not math.isfinite(q):
        raise ResponseParseError("bad_quantity", f"quantity is not finite: {value!r}")
    if q < 0:
        raise ResponseParseError("bad_quantity", f"quantity is negative: {value!r}")
    return q


def _text_field(obj: dict, key: str) -> str:
    value = obj.get(key, "")
    return value if isinstance(value, str) else ""


def _carry_over(obj: dict) -> Optional[str]:
    # missing key -> None (leave insights untouched); "" -> explicit removal
    if "carry_over_insight" not in obj:
        return None
    value = obj["carry_over_insight"]
    return value.strip() if isinstance(value, str) else ""


def parse_decision(text: str, item_id: Optional[str] = None) -> ParsedDecision:
    obj = extract_json_object(text, "action")
    action = obj["action"]
    if isinstance(action, dict):
        if not action:
            raise ResponseParseError("missing_key", "action object is empty")
        if item_id is not None and item_id in action:
            raw = action[item_id]
        elif len(action) == 1:
            raw = next(iter(action.values()))
        else:
            raise ResponseParseError(
                "missing_key", f"action has no entry for item {item_id!r}")
    else:
        raw = action
    return ParsedDecision(
        quantity=_coerce_quantity(raw),
        rationale=_text_field(obj, "rationale"),
        short_rationale=_text_field(obj, "short_rationale_for_human"),
        carry_over_insight=_carry_over(obj),
    )


_ESTIMATE_KEYS = {
    "lead_time": "lead_time",
    "demand_mean_over_horizon": "horizon_mean",
    "demand_std_over_horizon": "horizon_std",
}


def parse_param_estimate(text: str) -> ParsedEstimate:
    obj = extract_json_object(text, "estimates")
    raw = obj["estimates"]
    if not isinstance(raw, dict):
        raise ResponseParseError("bad_estimates", "estimates must be a JSON object")
    kwargs = {}
    for key, field_name in _ESTIMATE_KEYS.items():
        value = raw.get(key)
        if value is None:
            continue
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ResponseParseError("bad_estimates", f"{key} is not numeric: {value!r}")
        kwargs[field_name] = float(value)
    estimate = ParamEstimate(**kwargs)
    try:
        estimate.validate()
    except ValueError as exc:
        raise ResponseParseError("bad_estimates", str(exc)) from exc
    return ParsedEstimate(
        estimate=estimate,
        rationale=_text_field(obj, "rationale"),
        short_rationale=_text_field(obj, "short_rationale_for_human"),
        carry_over_insight=_carry_over(obj),
    )
