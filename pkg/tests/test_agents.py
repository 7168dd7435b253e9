"""Agent harness: response parsing, mock transports, the decide() contract,
insight threading, and fallback policy."""

from __future__ import annotations

import json
import math

import pytest

from invbench.agents import (AgentConfig, AgentError, InsightStore, Method,
                             MockScript, MockTransport, agent_config_from_spec,
                             decide, make_transport)
from invbench.parsing import (ResponseParseError, parse_decision,
                              parse_param_estimate)
from invbench.policy import ParamEstimate, or_recommendation
from invbench.sim import new_session, observe

from helpers import make_instance


# --- parsing ----------------------------------------------------------------

def test_parse_plain_decision():
    parsed = parse_decision('{"rationale": "r", "action": {"sku-1": 210}}', "sku-1")
    assert parsed.quantity == 210.0
    assert parsed.rationale == "r"


def test_parse_decision_in_code_fence():
    text = """Here is my answer:
```json
{"rationale": "thinking...", "short_rationale_for_human": "short",
 "carry_over_insight": "demand shifted to ~200", "action": {"sku-9": 42.5}}
```
Hope that helps!"""
    parsed = parse_decision(text, "sku-9")
    assert parsed.quantity == 42.5
    assert parsed.carry_over_insight == "demand shifted to ~200"


def test_parse_decision_skips_unrelated_json():
    text = '{"note": "not it"} then the real one {"action": {"x": 7}}'
    assert parse_decision(text, "x").quantity == 7.0


def test_parse_decision_bare_number_action():
    assert parse_decision('{"action": 12}').quantity == 12.0


@pytest.mark.parametrize("payload, reason", [
    ('{"action": {"x": -5}}', "bad_quantity"),
    ('{"action": {"x": "lots"}}', "bad_quantity"),
    ('{"action": {"x": NaN}}', "bad_quantity"),
    ('{"rationale": "no action key"}', "missing_key"),
    ("no json here at all", "no_json"),
    ("", "empty"),
    ('{"action": {}}', "missing_key"),
])
def test_parse_decision_errors(payload, reason):
    with pytest.raises(ResponseParseError) as err:
        parse_decision(payload, "x")
    assert err.value.reason == reason


def test_parse_estimates():
    parsed = parse_param_estimate(
        '{"estimates": {"lead_time": 2, "demand_mean_over_horizon": 300}}')
    assert parsed.estimate == ParamEstimate(lead_time=2.0, horizon_mean=300.0)


def test_parse_estimates_empty_means_defaults():
    parsed = parse_param_estimate('{"estimates": {}}')
    assert parsed.estimate == ParamEstimate()


def test_parse_estimates_rejects_negative_lead():
    with pytest.raises(ResponseParseError):
        parse_param_estimate('{"estimates": {"lead_time": -3}}')


# --- mock transports and decide() --------------------------------------------

def _scenario(lead=0, rho_profit=19.0, demands=(100,) * 4):
    inst = make_instance(demands=demands, lead_times=(lead,) * len(demands),
                         promised_lead=lead, profit=rho_profit, holding=1.0,
                         history=(80, 90, 100, 110, 120), instance_id="agent-test",
                         provenance={"kind": "synthetic"})
    obs = observe(new_session(inst), inst)
    return inst, obs


def test_or_method_passthrough():
    inst, obs = _scenario()
    advice = or_recommendation(obs)
    config = AgentConfig(method=Method.OR)
    decision = decide(config, inst, obs, or_advice=advice)
    assert decision.quantity == advice.quantity
    assert "base-stock" in decision.rationale.lower()


def test_follow_or_mock_equals_or():
    inst, obs = _scenario()
    advice = or_recommendation(obs)
    config = AgentConfig(method=Method.OR_TO_LLM, mock=MockScript(kind="follow_or"))
    decision = decide(config, inst, obs, or_advice=advice)
    assert decision.quantity == advice.quantity


def test_llm_method_rejects_or_advice():
    inst, obs = _scenario()
    advice = or_recommendation(obs)
    config = AgentConfig(method=Method.LLM, mock=MockScript(kind="constant", value=5))
    with pytest.raises(ValueError):
        decide(config, inst, obs, or_advice=advice)
    decision = decide(config, inst, obs)
    assert decision.quantity == 5.0


def test_llm_to_or_with_lead_estimate():
    inst, obs = _scenario(rho_profit=4.0)  # rho = 0.8
    config = AgentConfig(method=Method.LLM_TO_OR,
                         mock=MockScript(kind="params", estimates={"lead_time": 2}))
    decision = decide(config, inst, obs)
    assert decision.estimate == ParamEstimate(lead_time=2.0)
    # defaults: mean 100, std 15.8114; mu=300, sigma=sqrt(3)*15.8114;
    # cap = 100 + 1.6449*15.8114 = 126.01 binds
    assert decision.quantity == pytest.approx(126.01, abs=0.01)


def test_llm_to_or_default_estimate_equals_or():
    inst, obs = _scenario(lead=3, rho_profit=4.0)
    advice = or_recommendation(obs)
    config = AgentConfig(method=Method.LLM_TO_OR,
                         mock=MockScript(kind="params", estimates={}))
    decision = decide(config, inst, obs)
    assert decision.quantity == advice.quantity


def test_by_period_mock():
    inst, obs = _scenario()
    config = AgentConfig(method=Method.LLM,
                         mock=MockScript(kind="by_period", values=(10, 20, 30)))
    assert decide(config, inst, obs).quantity == 10.0


def test_mock_requires_no_network(monkeypatch):
    # constructing a transport for a mock never touches httpx
    config = AgentConfig(method=Method.OR_TO_LLM, mock=MockScript(kind="follow_or"))
    transport = make_transport(config)
    assert isinstance(transport, MockTransport)


def test_reprompt_then_success():
    inst, obs = _scenario()
    advice = or_recommendation(obs)
    raw = MockScript(kind="raw", raw_responses=(
        "sorry, no JSON",
        '{"action": {"sku": 33}}',
    ))
    config = AgentConfig(method=Method.OR_TO_LLM, mock=raw)
    decision = decide(config, inst, obs, or_advice=advice)
    assert decision.quantity == 33.0
    assert not decision.fallback


def test_fallback_to_or_after_two_parse_failures():
    inst, obs = _scenario()
    advice = or_recommendation(obs)
    raw = MockScript(kind="raw", raw_responses=("nope", "still nope"))
    config = AgentConfig(method=Method.OR_TO_LLM, mock=raw)
    decision = decide(config, inst, obs, or_advice=advice)
    assert decision.fallback
    assert decision.quantity == advice.quantity


def test_fallback_to_zero_without_or():
    inst, obs = _scenario()
    raw = MockScript(kind="raw", raw_responses=('{"action": {"x": -1}}',) * 2)
    config = AgentConfig(method=Method.LLM, mock=raw)
    decision = decide(config, inst, obs)
    assert decision.fallback
    assert decision.quantity == 0.0


def test_endpoint_failure_raises_agent_error():
    class Broken:
        def complete(self, system, user):
            raise ConnectionError("down")

    inst, obs = _scenario()
    config = AgentConfig(method=Method.LLM, mock=MockScript(kind="constant"),
                         max_retries=1)
    with pytest.raises(AgentError) as err:
        decide(config, inst, obs, transport=Broken())
    assert err.value.period == 1
    assert err.value.instance_id == inst.id


def test_insight_store_semantics():
    store = InsightStore()
    store.update(3, "demand shifted")
    store.update(5, "lead time is 3")
    assert store.items() == ((3, "demand shifted"), (5, "lead time is 3"))
    store.update(5, "")            # explicit removal of the current entry
    assert store.items() == ((3, "demand shifted"),)
    store.update(3, None)          # missing key leaves things untouched
    assert store.items() == ((3, "demand shifted"),)


def test_agent_spec_parsing():
    assert agent_config_from_spec("or").method is Method.OR
    cfg = agent_config_from_spec("mock:follow-or")
    assert cfg.method is Method.OR_TO_LLM and cfg.mock.kind == "follow_or"
    cfg = agent_config_from_spec("mock:params")
    assert cfg.method is Method.LLM_TO_OR
    cfg = agent_config_from_spec("mock:constant:llm")
    assert cfg.method is Method.LLM
    cfg = agent_config_from_spec("llm:https://api.example.com/v1:big-model")
    assert cfg.endpoint.model == "big-model"
    with pytest.raises(ValueError):
        agent_config_from_spec("wat")


def test_mock_script_roundtrip(tmp_path):
    path = tmp_path / "script.json"
    path.write_text(json.dumps({
        "kind": "by_period", "values": [1, 2, 3], "insight": "steady"}))
    script = MockScript.from_file(path)
    assert script.kind == "by_period"
    assert script.values == (1.0, 2.0, 3.0)
    assert script.insight == "steady"


def test_insights_flow_into_subsequent_prompts():
    from invbench.evaluate import run_episode

    class Capturing:
        def __init__(self):
            self.users = []

        def complete(self, system, user):
            self.users.append(user)
            period = len(self.users)
            return json.dumps({
                "rationale": "r",
                "carry_over_insight": f"note from period {period}",
                "action": {"sku": 10},
            })

    inst = make_instance(demands=(10,) * 3, lead_times=(0,) * 3,
                         history=(10,) * 5)
    transport = Capturing()
    config = AgentConfig(method=Method.LLM, mock=MockScript(kind="constant"))
    run_episode(inst, config, transport=transport)
    assert "CARRY-OVER INSIGHTS" not in transport.users[0]
    assert "Period 1: note from period 1" in transport.users[1]
    assert "Period 1: note from period 1" in transport.users[2]
    assert "Period 2: note from period 2" in transport.users[2]


def test_feedback_block_in_user_message():
    from invbench.prompts import build_prompts
    inst, obs = _scenario()
    advice = or_recommendation(obs)
    system, user = build_prompts("or_to_llm", inst, obs, or_advice=advice,
                                 feedback=(42.0, "order more"))
    assert "STAGE 2 - HUMAN FEEDBACK" in user
    assert "'order more'" in user
    assert "Two-stage interaction" in system
