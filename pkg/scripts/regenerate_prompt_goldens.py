#!/usr/bin/env python3
"""Regenerate the golden prompt snapshots under tests/data/prompts/.

Run after any intentional prompt change, then review the diff."""

from __future__ import annotations

import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "tests"))

from invbench.agents import AgentConfig, Method, decide
from invbench.policy import or_recommendation
from invbench.prompts import build_prompts
from invbench.sim import new_session, observe, step

from helpers import make_instance

OUT = Path(__file__).resolve().parent.parent / "tests" / "data" / "prompts"


def scenario():
    inst = make_instance(
        demands=(95, 130, 102, 88, 117, 104),
        lead_times=(1, 1, 1, 1, 1, 1),
        promised_lead=1,
        profit=4.0,
        holding=1.0,
        history=(80, 90, 100, 110, 120),
        instance_id="golden-scenario",
        context=("", "", "week of 2019-03-11", "", "", ""),
        description="Timeless swim brief, womenswear.",
        provenance={"kind": "synthetic"},
    )
    state = new_session(inst)
    state, _ = step(state, inst, 95)
    state, _ = step(state, inst, 120)
    obs = observe(state, inst)   # period 3, one arrived order, one outstanding
    return inst, obs


def main() -> None:
    OUT.mkdir(parents=True, exist_ok=True)
    inst, obs = scenario()
    advice = or_recommendation(obs)
    insights = ((1, "demand looks stable around 100"),)
    guidance = ((1, "be conservative until the season picks up"),)

    for method in ("llm", "or_to_llm", "llm_to_or"):
        system, user = build_prompts(
            method, inst, obs,
            or_advice=advice if method == "or_to_llm" else None,
            insights=insights)
        (OUT / f"{method}__system.txt").write_text(system)
        (OUT / f"{method}__user.txt").write_text(user)

    system, user = build_prompts("or_to_llm", inst, obs, or_advice=advice,
                                 insights=insights, guidance=guidance,
                                 guidance_enabled=True)
    (OUT / "or_to_llm_guided__system.txt").write_text(system)
    (OUT / "or_to_llm_guided__user.txt").write_text(user)

    decision = decide(AgentConfig(method=Method.OR), inst, obs, or_advice=advice)
    (OUT / "or__rationale.txt").write_text(
        decision.rationale + "\n" + decision.short_rationale_for_human + "\n")

    print(f"wrote goldens to {OUT}")


if __name__ == "__main__":
    main()
