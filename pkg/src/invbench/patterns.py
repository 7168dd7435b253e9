"""Synthetic demand pattern families.

Ten families, four parametric variants each.  Normal and uniform draws are
truncated at zero and rounded to the nearest integer (ties away from zero);
the AR(1) chain evolves on unrounded values and each emitted demand is the
truncated, rounded chain value.

Training samples depend on the family: stationary draws i.i.d., changepoint
families draw i.i.d. from the first segment only (no advance notice of the
break), and trend/seasonal/autocorrelated families take sequential samples
at t = 1..5.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence, Union

import numpy as np

TEST_HORIZON = 50
TRAINING_LEN = 5

MuSigma = Union[float, Callable[[int], float]]


def _at(value: MuSigma, t: int) -> float:
    return value(t) if callable(value) else float(value)


def _clip_round(x: float) -> int:
    # truncate at zero, then round half away from zero
    return int(math.floor(max(x, 0.0) + 0.5))


@dataclass(frozen=True)
class Normal:
    mu: MuSigma
    sigma: MuSigma

    def draw(self, t: int, rng: np.random.Generator) -> float:
        return rng.normal(_at(self.mu, t), _at(self.sigma, t))


@dataclass(frozen=True)
class Uniform:
    low: float
    high: float

    def draw(self, t: int, rng: np.random.Generator) -> float:
        return rng.uniform(self.low, self.high)


@dataclass(frozen=True)
class Segment:
    start: int  # inclusive, 1-based
    end: int    # inclusive
    dist: Union[Normal, Uniform]


@dataclass(frozen=True)
class AR1:
    phi: float
    const: float
    sigma: float
    initial: float = 100.0

    def path(self, length: int, rng: np.random.Generator) -> list[float]:
        values = []
        prev = self.initial
        for _ in range(length):
            prev = self.phi * prev + self.const + rng.normal(0.0, self.sigma)
            values.append(prev)
        return values


# Training rules per family.
TRAIN_IID = "iid"
TRAIN_FIRST_SEGMENT = "first_segment"
TRAIN_SEQUENTIAL = "sequential"


@dataclass(frozen=True)
class PatternSpec:
    pattern: str
    variant: str
    training: str
    segments: tuple[Segment, ...] = ()
    ar1: AR1 | None = None

    @property
    def key(self) -> str:
        return f"{self.pattern}/{self.variant}"

    def segment_at(self, t: int) -> Segment:
        for seg in self.segments:
            if seg.start <= t <= seg.end:
                return seg
        raise KeyError(f"{self.key}: no segment covers period {t}")


def _stationary(pattern: str, variant: str, dist) -> PatternSpec:
    return PatternSpec(pattern, variant, TRAIN_IID,
                       segments=(Segment(1, TEST_HORIZON, dist),))


def _changepoint(pattern: str, variant: str, breaks: Sequence[int], dists) -> PatternSpec:
    # breaks are the first periods of each new regime
    starts = [1, *breaks]
    ends = [*(b - 1 for b in breaks), TEST_HORIZON]
    segments = tuple(Segment(s, e, d) for s, e, d in zip(starts, ends, dists))
    return PatternSpec(pattern, variant, TRAIN_FIRST_SEGMENT, segments=segments)


def _shaped(pattern: str, variant: str, mu: MuSigma, sigma: MuSigma) -> PatternSpec:
    return PatternSpec(pattern, variant, TRAIN_SEQUENTIAL,
                       segments=(Segment(1, TEST_HORIZON, Normal(mu, sigma)),))


def _build_registry() -> dict[str, dict[str, PatternSpec]]:
    specs: list[PatternSpec] = []

    # p01: stationary
    specs += [
        _stationary("p01", "v1", Normal(100, 25)),
        _stationary("p01", "v2", Normal(100, 40)),
        _stationary("p01", "v3", Normal(100, 15)),
        _stationary("p01", "v4", Uniform(50, 150)),
    ]

    # p02: mean increase at t=16
    specs += [
        _changepoint("p02", "v1", [16], [Normal(100, 25), Normal(200, 35)]),
        _changepoint("p02", "v2", [16], [Normal(100, 25), Normal(150, 30)]),
        _changepoint("p02", "v3", [16], [Normal(100, 25), Normal(300, 50)]),
        _changepoint("p02", "v4", [16], [Normal(100, 25), Normal(200, 25)]),
    ]

    # p03: mean decrease at t=16
    specs += [
        _changepoint("p03", "v1", [16], [Normal(100, 25), Normal(50, 18)]),
        _changepoint("p03", "v2", [16], [Normal(100, 25), Normal(70, 20)]),
        _changepoint("p03", "v3", [16], [Normal(100, 25), Normal(30, 15)]),
        _changepoint("p03", "v4", [16], [Normal(150, 30), Normal(80, 22)]),
    ]

    # p04: increasing trend
    specs += [
        _shaped("p04", "v1", lambda t: 100.0 * t, lambda t: 25.0 * math.sqrt(t)),
        _shaped("p04", "v2", lambda t: 50.0 + 3.0 * t, 20),
        _shaped("p04", "v3", lambda t: 100.0 * 1.05 ** t, 25),
        _shaped("p04", "v4", lambda t: 100.0 + 2.0 * t, lambda t: 25.0 * math.sqrt(t)),
    ]

    # p05: decreasing trend
    specs += [
        _shaped("p05", "v1", lambda t: max(200.0 - 3.0 * t, 50.0), 25),
        _shaped("p05", "v2", lambda t: 200.0 * 0.97 ** t, 20),
        _shaped("p05", "v3", lambda t: max(150.0 - 2.0 * t, 30.0), 20),
        _shaped("p05", "v4", lambda t: 200.0 / math.sqrt(t), 15),
    ]

    # p06: variance change at t=16
    specs += [
        _changepoint("p06", "v1", [16], [Normal(100, 25), Uniform(0, 200)]),
        _changepoint("p06", "v2", [16], [Normal(100, 25), Normal(100, 50)]),
        _changepoint("p06", "v3", [16], [Normal(100, 50), Normal(100, 20)]),
        _changepoint("p06", "v4", [16], [Uniform(50, 150), Normal(100, 15)]),
    ]

    # p07: seasonal, sigma 25 throughout
    two_pi = 2.0 * math.pi
    specs += [
        _shaped("p07", "v1", lambda t: 100.0 + 30.0 * math.sin(two_pi * t / 10.0), 25),
        _shaped("p07", "v2", lambda t: 100.0 + 50.0 * math.sin(two_pi * t / 5.0), 25),
        _shaped("p07", "v3", lambda t: 100.0 + 40.0 * math.sin(two_pi * t / 25.0), 25),
        _shaped("p07", "v4", lambda t: 100.0 * (1.0 + 0.3 * math.sin(two_pi * t / 10.0)), 25),
    ]

    # p08: two changepoints at t=16 and t=36
    specs += [
        _changepoint("p08", "v1", [16, 36], [Normal(100, 25), Normal(150, 30), Normal(80, 20)]),
        _changepoint("p08", "v2", [16, 36], [Normal(100, 25), Normal(60, 20), Normal(140, 30)]),
        _changepoint("p08", "v3", [16, 36], [Normal(100, 25), Normal(100, 50), Normal(100, 20)]),
        _changepoint("p08", "v4", [16, 36], [Normal(80, 20), Normal(120, 25), Normal(100, 22)]),
    ]

    # p09: temporary spike/dip over t=16..25
    specs += [
        _changepoint("p09", "v1", [16, 26], [Normal(100, 25), Normal(200, 35), Normal(100, 25)]),
        _changepoint("p09", "v2", [16, 26], [Normal(100, 25), Normal(50, 18), Normal(100, 25)]),
        _changepoint("p09", "v3", [16, 26], [Normal(100, 25), Normal(250, 40), Normal(120, 28)]),
        _changepoint("p09", "v4", [16, 26], [Normal(100, 25), Normal(40, 15), Normal(80, 22)]),
    ]

    # p10: AR(1), long-run mean const/(1-phi) = 100 for every variant
    for variant, phi, const, sigma in [
        ("v1", 0.7, 30.0, 20.0),
        ("v2", 0.5, 50.0, 25.0),
        ("v3", 0.3, 70.0, 30.0),
        ("v4", -0.3, 130.0, 25.0),
    ]:
        specs.append(PatternSpec("p10", variant, TRAIN_SEQUENTIAL,
                                 ar1=AR1(phi=phi, const=const, sigma=sigma)))

    registry: dict[str, dict[str, PatternSpec]] = {}
    for spec in specs:
        registry.setdefault(spec.pattern, {})[spec.variant] = spec
    return registry


PATTERNS: dict[str, dict[str, PatternSpec]] = _build_registry()

PATTERN_IDS: tuple[str, ...] = tuple(sorted(PATTERNS))
VARIANT_IDS: tuple[str, ...] = ("v1", "v2", "v3", "v4")


def get_pattern(pattern: str, variant: str) -> PatternSpec:
    try:
        return PATTERNS[pattern][variant]
    except KeyError:
        raise KeyError(f"unknown pattern/variant {pattern}/{variant}") from None


def mean_at(spec: PatternSpec, t: int) -> float:
    """Population mean of the demand draw at period t (before clipping)."""
    if spec.ar1 is not None:
        # conditional chain mean ignoring noise history; long-run mean
        return spec.ar1.const / (1.0 - spec.ar1.phi)
    dist = spec.segment_at(t).dist
    if isinstance(dist, Normal):
        return _at(dist.mu, t)
    return (dist.low + dist.high) / 2.0


def _draw_segments(spec: PatternSpec, periods: Sequence[int], rng: np.random.Generator) -> list[int]:
    return [_clip_round(spec.segment_at(t).dist.draw(t, rng)) for t in periods]


def sample_demand_series(spec: PatternSpec, horizon: int,
                         seed) -> tuple[tuple[int, ...], tuple[int, ...]]:
    """Draw (test demands of length ``horizon``, 5 training demands).

    ``seed`` may be an int or a sequence of ints; test and training use
    independent child streams so either can be regenerated alone.
    """
    test_ss, train_ss = np.random.SeedSequence(seed).spawn(2)
    test_rng = np.random.default_rng(test_ss)
    train_rng = np.random.default_rng(train_ss)

    if spec.ar1 is not None:
        test = tuple(_clip_round(x) for x in spec.ar1.path(horizon, test_rng))
        training = tuple(_clip_round(x) for x in spec.ar1.path(TRAINING_LEN, train_rng))
        return test, training

    test = tuple(_draw_segments(spec, range(1, horizon + 1), test_rng))
    if spec.training == TRAIN_SEQUENTIAL:
        training = tuple(_draw_segments(spec, range(1, TRAINING_LEN + 1), train_rng))
    else:
        # i.i.d. draws; changepoint families use the first segment only
        dist = spec.segments[0].dist
        training = tuple(_clip_round(dist.draw(1, train_rng)) for _ in range(TRAINING_LEN))
    return test, training
