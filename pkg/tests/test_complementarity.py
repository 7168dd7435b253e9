"""Complementarity estimators: hand-computed cases, the grid-scan oracle for
the benefit-fraction bound, Monte-Carlo bound validity, coupling tightness,
and bootstrap determinism."""

from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from invbench.complementarity import (AIBenchmark, ComplementaritySample,
                                      EcdfPair, MissingCellError, bootstrap,
                                      build_ecdf_pair, ce_individual_avg,
                                      ce_population, ks_lower_bound,
                                      load_samples, tightness_coupling)


def S(participant, instance, mode, reward):
    return ComplementaritySample(participant=participant, instance=instance,
                                 mode=mode, reward=reward)


def grid_ks_bound(a, b, delta, points=100_000):
    """Independent dense-grid oracle for sup_t [F_b(t) - F_a(t+delta)]."""
    a = np.asarray(a, float)
    b = np.asarray(b, float)
    lo = min(a.min(), b.min()) - 1.0
    hi = max(a.max(), b.max()) + 1.0
    ts = np.linspace(lo, hi, points)
    f_b = np.searchsorted(np.sort(b), ts, side="right") / len(b)
    f_a = np.searchsorted(np.sort(a), ts + delta, side="right") / len(a)
    return max(float(np.max(f_b - f_a)), 0.0)


# --- CE estimators ------------------------------------------------------------

def test_ce_zero_when_everything_equal():
    samples = []
    for z in ("z1", "z2"):
        samples += [S("p1", z, "H", 0.5), S("p2", z, "H_AI", 0.5)]
    ai = AIBenchmark({"z1": 0.5, "z2": 0.5})
    assert ce_population(samples, ai) == pytest.approx(0.0)


def test_ce_two_scenario_hand_example():
    # scenario means: team 0.6 vs max(solo 0.5, ai 0.4) -> +0.1
    #                 team 0.4 vs max(solo 0.5, ai 0.3) -> -0.1
    samples = [
        S("a", "z1", "H_AI", 0.6), S("b", "z1", "H", 0.5),
        S("c", "z2", "H_AI", 0.4), S("d", "z2", "H", 0.5),
    ]
    ai = AIBenchmark({"z1": 0.4, "z2": 0.3})
    assert ce_population(samples, ai) == pytest.approx(0.0)


def test_ce_missing_cell_names_scenario():
    samples = [S("a", "z1", "H_AI", 0.6)]
    with pytest.raises(MissingCellError) as err:
        ce_population(samples, AIBenchmark({"z1": 0.4}))
    assert "z1" in str(err.value)


def test_ce_individual_collapses_when_ai_dominates():
    samples = [
        S("a", "z1", "H_AI", 0.7), S("a2", "z1", "H_AI", 0.5),
        S("b", "z1", "H", 0.2), S("c", "z1", "H", 0.3),
    ]
    ai = AIBenchmark({"z1": 0.9})
    # every max(solo, ai) = 0.9 -> E[b] = 0.9; E[a] = 0.6
    assert ce_individual_avg(samples, ai) == pytest.approx(0.6 - 0.9)


def test_ce_individual_four_person_brute_force():
    samples = [
        S("p1", "z1", "H_AI", 0.60), S("p1", "z2", "H_AI", 0.70),
        S("p2", "z1", "H_AI", 0.40),
        S("p3", "z1", "H", 0.55), S("p3", "z2", "H", 0.30),
        S("p4", "z2", "H", 0.55),
    ]
    ai = AIBenchmark({"z1": 0.50, "z2": 0.45})
    # E[a] = mean(mean(0.6, 0.7), 0.4) = mean(0.65, 0.40) = 0.525
    # p3: mean(max(.55,.5), max(.30,.45)) = mean(.55,.45) = 0.50 ; p4: 0.55
    # E[b] = 0.525
    assert ce_individual_avg(samples, ai) == pytest.approx(0.0)
    # population CE differs: per-scenario means
    # z1: 0.5 - max(0.55, 0.5) = -0.05 ; z2: 0.7 - max(0.425, 0.45) = 0.25
    assert ce_population(samples, ai) == pytest.approx((-0.05 + 0.25) / 2)


def test_population_equals_individual_when_people_identical():
    # every participant's per-scenario value identical across people
    samples = []
    values = {"z1": (0.6, 0.5), "z2": (0.3, 0.7)}  # (team, solo)
    for z, (team, solo) in values.items():
        for k in range(3):
            samples.append(S(f"t{k}", z, "H_AI", team))
            samples.append(S(f"s{k}", z, "H", solo))
    ai = AIBenchmark({"z1": 0.55, "z2": 0.2})
    assert ce_population(samples, ai) == pytest.approx(
        ce_individual_avg(samples, ai))


def test_mode_c_samples_excluded_from_ce():
    samples = [
        S("a", "z1", "H_AI", 0.6), S("b", "z1", "H", 0.5),
        S("c", "z1", "C", 0.99),
    ]
    ai = AIBenchmark({"z1": 0.4})
    assert ce_population(samples, ai) == pytest.approx(0.1)
    pair = build_ecdf_pair(samples, ai)
    assert len(pair.a) == 1 and len(pair.b) == 1


def test_invalid_mode_rejected():
    with pytest.raises(ValueError):
        S("a", "z1", "X", 0.5)


# --- benefit-fraction lower bound ----------------------------------------------

def test_ks_bound_identical_samples_zero():
    pair = EcdfPair(a=np.array([1.0, 2.0, 3.0]), b=np.array([1.0, 2.0, 3.0]))
    assert ks_lower_bound(pair, 0.0) == 0.0


def test_ks_bound_full_separation():
    pair = EcdfPair(a=np.array([1.0, 1.0]), b=np.array([0.0, 0.0]))
    assert ks_lower_bound(pair, 0.0) == 1.0


def test_ks_bound_negative_delta_rejected():
    pair = EcdfPair(a=np.array([1.0]), b=np.array([0.0]))
    with pytest.raises(ValueError):
        ks_lower_bound(pair, -0.1)


def test_ks_bound_matches_grid_oracle_on_100_random_samples():
    rng = np.random.default_rng(11)
    for trial in range(100):
        n_a = int(rng.integers(1, 51))
        n_b = int(rng.integers(1, 51))
        a = rng.normal(rng.uniform(-1, 1), rng.uniform(0.2, 2), n_a)
        b = rng.normal(rng.uniform(-1, 1), rng.uniform(0.2, 2), n_b)
        delta = float(rng.choice([0.0, 0.05, 0.3]))
        ours = ks_lower_bound(EcdfPair(a=a, b=b), delta)
        oracle = grid_ks_bound(a, b, delta)
        assert abs(ours - oracle) < 1e-12, (trial, delta)


@given(st.floats(0, 0.5), st.floats(0, 0.5))
@settings(max_examples=30)
def test_ks_bound_non_increasing_in_delta(d1, d2):
    rng = np.random.default_rng(5)
    pair = EcdfPair(a=rng.normal(0.2, 1, 40), b=rng.normal(0, 1, 35))
    lo, hi = sorted((d1, d2))
    assert ks_lower_bound(pair, hi) <= ks_lower_bound(pair, lo) + 1e-12


def _random_joint(rng, n):
    """Random dependent (a, b) pairs from a mixture of normals/uniforms."""
    k = int(rng.integers(1, 4))
    weights = rng.dirichlet(np.ones(k))
    comps = rng.integers(0, k, size=n)
    z = rng.normal(size=n)
    a = np.empty(n)
    b = np.empty(n)
    for j in range(k):
        idx = comps == j
        m = int(idx.sum())
        if m == 0:
            continue
        rho = rng.uniform(-1, 1)
        mu_a, mu_b = rng.uniform(-1, 1, size=2)
        if rng.uniform() < 0.5:
            base_a = rng.normal(0, rng.uniform(0.2, 1.5), m)
        else:
            base_a = rng.uniform(-1, 1, m)
        if rng.uniform() < 0.5:
            base_b = rng.normal(0, rng.uniform(0.2, 1.5), m)
        else:
            base_b = rng.uniform(-1, 1, m)
        shared = z[idx]
        a[idx] = mu_a + rho * shared + base_a
        b[idx] = mu_b + rho * shared + base_b
    return a, b


def test_bound_validity_and_tightness_monte_carlo():
    rng = np.random.default_rng(2024)
    n = 5000
    for trial in range(50):
        a, b = _random_joint(rng, n)
        for delta in (0.0, 0.05, 0.1):
            empirical = float(np.mean(a - b > delta))
            bound = ks_lower_bound(EcdfPair(a=a, b=b), delta)
            assert empirical >= bound - 0.02, (trial, delta)
            coupling = tightness_coupling(a, b, delta)
            assert abs(coupling.achieved_fraction - coupling.bound) <= 2.0 / n, (
                trial, delta)


def test_coupling_marginals_preserved():
    rng = np.random.default_rng(3)
    a = rng.normal(0.5, 1, 60)
    b = rng.normal(0.0, 1, 40)
    result = tightness_coupling(a, b, 0.1)
    n = len(result.pairs)
    assert n == np.lcm(60, 40)
    assert np.allclose(np.sort(result.pairs[:, 0]), np.sort(np.repeat(np.sort(a), n // 60)))
    assert np.allclose(np.sort(result.pairs[:, 1]), np.sort(np.repeat(np.sort(b), n // 40)))


def test_coupling_trivial_cases():
    # p* = 0: a stochastically below b
    res = tightness_coupling([0.0, 0.1], [0.5, 0.6], 0.0)
    assert res.bound == 0.0
    assert res.achieved_fraction == 0.0
    # full separation: every pair violates
    res = tightness_coupling([1.0, 1.0], [0.0, 0.0], 0.0)
    assert res.bound == 1.0
    assert res.achieved_fraction == 1.0


# --- bootstrap -----------------------------------------------------------------

def _experiment(rng, lift=0.05, n_per_cell=12):
    samples = []
    ai = {}
    for z in ("z1", "z2", "z3"):
        ai[z] = 0.2
        for k in range(n_per_cell):
            samples.append(S(f"h-{z}-{k}", z, "H", float(rng.normal(0.5, 0.1))))
            samples.append(S(f"t-{z}-{k}", z, "H_AI",
                             float(rng.normal(0.5 + lift, 0.1))))
    return samples, AIBenchmark(ai)


@pytest.mark.parametrize("statistic", ["ce", "ce_i_avg", "ks_bound"])
def test_bootstrap_deterministic_given_seed(statistic):
    samples, ai = _experiment(np.random.default_rng(1))
    r1 = bootstrap(samples, ai, statistic, replicates=500, seed=42)
    r2 = bootstrap(samples, ai, statistic, replicates=500, seed=42)
    assert r1 == r2
    r3 = bootstrap(samples, ai, statistic, replicates=500, seed=43)
    assert r3 != r1


def test_bootstrap_detects_genuine_lift():
    samples, ai = _experiment(np.random.default_rng(7), lift=0.08, n_per_cell=20)
    result = bootstrap(samples, ai, "ce", replicates=2000, seed=0)
    assert result.point > 0.04
    assert result.p_one_sided < 0.01
    assert result.ci_low < result.point < result.ci_high


def test_bootstrap_point_matches_estimators():
    samples, ai = _experiment(np.random.default_rng(9))
    assert bootstrap(samples, ai, "ce", replicates=10, seed=0).point == \
        pytest.approx(ce_population(samples, ai))
    assert bootstrap(samples, ai, "ce_i_avg", replicates=10, seed=0).point == \
        pytest.approx(ce_individual_avg(samples, ai))
    pair = build_ecdf_pair(samples, ai)
    assert bootstrap(samples, ai, "ks_bound", replicates=10, seed=0).point == \
        pytest.approx(ks_lower_bound(pair, 0.0))


def test_bootstrap_unknown_statistic():
    samples, ai = _experiment(np.random.default_rng(1))
    with pytest.raises(ValueError):
        bootstrap(samples, ai, "wat", replicates=10, seed=0)


def test_load_samples_skips_event_lines(tmp_path):
    path = tmp_path / "log.jsonl"
    path.write_text("\n".join([
        '{"type": "event", "kind": "observe", "session": "s1"}',
        '{"type": "sample", "participant": "p1", "instance": "z1", "mode": "H", "reward": 0.5}',
        '{"participant": "p2", "instance": "z1", "mode": "H_AI", "reward": 0.6}',
    ]) + "\n")
    samples = load_samples(path)
    assert len(samples) == 2
    assert samples[0].participant == "p1"
    assert samples[1].mode == "H_AI"


def test_bootstrap_warns_on_single_participant_cell():
    samples = [
        S("solo1", "z1", "H", 0.5),
        S("team1", "z1", "H_AI", 0.6), S("team2", "z1", "H_AI", 0.7),
    ]
    ai = AIBenchmark({"z1": 0.4})
    with pytest.warns(UserWarning, match="single participant"):
        bootstrap(samples, ai, "ce", replicates=50, seed=0)
