#!/usr/bin/env python3
"""Build the synthetic experiment-log fixture and its expected statistics.

Everything here is computed by brute force with plain loops and explicit
matrix algebra -- deliberately independent of the library implementations,
so the frozen expected.json is a genuine oracle for the analysis pipeline.
"""

from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np

OUT = Path(__file__).resolve().parent.parent / "tests" / "data" / "analysis_fixture"

INSTANCES = ["inst-1", "inst-2", "inst-3"]
N_PARTICIPANTS = 30
N_AUTO_RUNS = 40
SEED = 20240505


def simulate():
    rng = np.random.default_rng(SEED)
    # automated pipeline runs per instance (aligned run indices)
    auto_runs = {}
    base = {"inst-1": 0.47, "inst-2": 0.52, "inst-3": 0.41}
    for z in INSTANCES:
        auto_runs[z] = np.clip(rng.normal(base[z], 0.05, size=N_AUTO_RUNS), 0, 1)
    f_ai = {z: float(np.mean(auto_runs[z])) for z in INSTANCES}
    or_values = {"inst-1": 0.40, "inst-2": 0.44, "inst-3": 0.33}

    # participants rotate through (instance, mode) latin-square style
    samples = []
    modes = ["H", "H_AI", "C"]
    for i in range(N_PARTICIPANTS):
        skill = rng.normal(0.0, 0.06)
        rotation = i % 3
        for j, z in enumerate(INSTANCES):
            mode = modes[(j + rotation) % 3]
            difficulty = {"inst-1": 0.00, "inst-2": 0.05, "inst-3": -0.07}[z]
            noise = rng.normal(0, 0.05)
            level = 0.48 + skill + difficulty + noise
            if mode == "H_AI":
                level += 0.06            # genuine collaboration lift
            elif mode == "C":
                level += 0.01
            samples.append({
                "type": "sample",
                "participant": f"p{i:02d}",
                "instance": z,
                "mode": mode,
                "reward": float(np.clip(level, 0, 1)),
            })
    return samples, auto_runs, f_ai, or_values


# --- brute-force estimators ---------------------------------------------------

def brute_ce(samples, f_ai):
    terms = []
    for z in INSTANCES:
        team = [s["reward"] for s in samples if s["instance"] == z and s["mode"] == "H_AI"]
        solo = [s["reward"] for s in samples if s["instance"] == z and s["mode"] == "H"]
        team_mean = sum(team) / len(team)
        solo_mean = sum(solo) / len(solo)
        terms.append(team_mean - max(solo_mean, f_ai[z]))
    return sum(terms) / len(terms)


def brute_ce_i_avg(samples, f_ai):
    a, b = {}, {}
    for s in samples:
        if s["mode"] == "H_AI":
            a.setdefault(s["participant"], []).append(s["reward"])
        elif s["mode"] == "H":
            b.setdefault(s["participant"], []).append(
                max(s["reward"], f_ai[s["instance"]]))
    e_a = sum(sum(v) / len(v) for v in a.values()) / len(a)
    e_b = sum(sum(v) / len(v) for v in b.values()) / len(b)
    return e_a - e_b


def brute_ks_bound(samples, f_ai, delta=0.0, grid_points=200_001):
    a = [s["reward"] for s in samples if s["mode"] == "H_AI"]
    b = [max(s["reward"], f_ai[s["instance"]]) for s in samples if s["mode"] == "H"]
    lo = min(min(a), min(b)) - 1.0
    hi = max(max(a), max(b)) + 1.0
    best = 0.0
    for t in np.linspace(lo, hi, grid_points):
        f_b = sum(1 for x in b if x <= t) / len(b)
        f_a = sum(1 for x in a if x <= t + delta) / len(a)
        best = max(best, f_b - f_a)
    return best


def cr1_sandwich(X, y, clusters):
    """Explicit normal equations + CR1 sandwich, step by step."""
    X = np.asarray(X, float)
    y = np.asarray(y, float)
    n, k = X.shape
    xtx_inv = np.linalg.inv(X.T @ X)
    beta = xtx_inv @ (X.T @ y)
    resid = y - X @ beta
    meat = np.zeros((k, k))
    for g in sorted(set(clusters)):
        rows = [i for i, c in enumerate(clusters) if c == g]
        s = np.zeros(k)
        for i in rows:
            s += X[i] * resid[i]
        meat += np.outer(s, s)
    G = len(set(clusters))
    cov = (G / (G - 1)) * ((n - 1) / (n - k)) * xtx_inv @ meat @ xtx_inv
    return beta, cov, G


def t_sf(x, df):
    from scipy.stats import t as student_t
    return float(student_t.sf(x, df))


def brute_mode_effects(samples):
    subjects = sorted({s["participant"] for s in samples})
    instances = sorted({s["instance"] for s in samples})
    modes = sorted({s["mode"] for s in samples})
    label = {"H": "A", "H_AI": "B", "C": "C"}
    mode_levels = sorted({label[m] for m in modes})
    # columns: intercept, subjects[1:], instances[1:], modes != A
    names = (["intercept"]
             + [f"subject:{s}" for s in subjects[1:]]
             + [f"instance:{z}" for z in instances[1:]]
             + [f"mode:{m}" for m in mode_levels if m != "A"])
    rows, y, clusters = [], [], []
    for s in samples:
        row = [1.0]
        row += [1.0 if s["participant"] == subj else 0.0 for subj in subjects[1:]]
        row += [1.0 if s["instance"] == z else 0.0 for z in instances[1:]]
        row += [1.0 if label[s["mode"]] == m else 0.0
                for m in mode_levels if m != "A"]
        rows.append(row)
        y.append(s["reward"])
        clusters.append(s["participant"])
    beta, cov, G = cr1_sandwich(rows, y, clusters)
    df = G - 1
    out = {}
    for target in ("mode:B", "mode:C"):
        j = names.index(target)
        se = math.sqrt(cov[j, j])
        tstat = beta[j] / se
        out[target] = {"value": beta[j], "se": se,
                       "p_one_sided": t_sf(tstat, df),
                       "p_two_sided": 2 * t_sf(abs(tstat), df)}
    jb, jc = names.index("mode:B"), names.index("mode:C")
    lam = np.zeros(len(names)); lam[jc] = 1.0; lam[jb] = -1.0
    value = float(lam @ beta)
    se = math.sqrt(float(lam @ cov @ lam))
    tstat = value / se
    out["contrast_C_minus_B"] = {"value": value, "se": se,
                                 "p_one_sided": t_sf(tstat, df),
                                 "p_two_sided": 2 * t_sf(abs(tstat), df)}
    out["n_clusters"] = G
    return out


def brute_human_vs_auto(samples, auto_runs, human_mode):
    instances = sorted(auto_runs)
    rows, y, clusters = [], [], []
    for s in samples:
        if s["mode"] != human_mode:
            continue
        row = [1.0]
        row += [1.0 if s["instance"] == z else 0.0 for z in instances[1:]]
        row.append(1.0)
        rows.append(row); y.append(s["reward"])
        clusters.append("subject-" + s["participant"])
    for z in instances:
        for k, value in enumerate(auto_runs[z]):
            row = [1.0]
            row += [1.0 if z == zz else 0.0 for zz in instances[1:]]
            row.append(0.0)
            rows.append(row); y.append(float(value))
            clusters.append(f"run-{k}")
    beta, cov, G = cr1_sandwich(rows, y, clusters)
    j = len(beta) - 1
    se = math.sqrt(cov[j, j])
    tstat = beta[j] / se
    return {"value": beta[j], "se": se,
            "p_one_sided": t_sf(tstat, G - 1),
            "p_two_sided": 2 * t_sf(abs(tstat), G - 1),
            "n_clusters": G}


def main() -> None:
    OUT.mkdir(parents=True, exist_ok=True)
    samples, auto_runs, f_ai, or_values = simulate()

    with (OUT / "log.jsonl").open("w") as fh:
        for s in samples:
            fh.write(json.dumps(s, sort_keys=True) + "\n")

    ai_doc = {"ai": {z: {"mean": f_ai[z], "runs": [float(x) for x in auto_runs[z]]}
                     for z in INSTANCES},
              "or": or_values}
    (OUT / "ai.json").write_text(json.dumps(ai_doc, indent=1, sort_keys=True) + "\n")

    expected = {
        "ce": brute_ce(samples, f_ai),
        "ce_i_avg": brute_ce_i_avg(samples, f_ai),
        "ks_bound": brute_ks_bound(samples, f_ai),
        "mode_effects": brute_mode_effects(samples),
        "team_vs_auto": brute_human_vs_auto(samples, auto_runs, "H_AI"),
        "solo_vs_baseline": brute_human_vs_auto(
            samples, {z: [v] for z, v in or_values.items()}, "H"),
    }
    (OUT / "expected.json").write_text(json.dumps(expected, indent=1, sort_keys=True) + "\n")
    print(f"fixture written to {OUT}")
    print(json.dumps({k: v for k, v in expected.items() if not isinstance(v, dict)},
                     indent=1))


if __name__ == "__main__":
    main()
