"""Synthetic training-session generator.

The generative model is a stand-in (no quantitative load/HRV relation is
available for real athletes): calories follow a per-activity rate times
duration times an AHR factor, and the post-exercise RR series is shifted
towards higher heart rate and lower variability as the load class rises.
``signal_strength`` scales that shift and ``1 - signal_strength`` scales the
per-session physiological noise. Post-exercise features are always computed
from a synthesized RR series, never written directly.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from .dataset import ACTIVITIES, ActivityType, DataError, LoadClass, SessionRecord
from .hrv import RRSeries, extract_all

RR_LOW_MS = 301.0
RR_HIGH_MS = 1399.0
WINDOW_MS = 60000.0

# calorie range sampled for each load class (kcal)
CLASS_CALORIES = {
    LoadClass.LOW: (150.0, 400.0),
    LoadClass.MEDIUM: (400.0, 1000.0),
    LoadClass.HIGH: (1000.0, 3000.0),
}


@dataclass(frozen=True)
class ActivityProfile:
    kcal_per_min: float  # at AHR 140
    ahr_range: tuple[float, float]
    speed_range: tuple[float, float]  # m/s
    rest_hr: float  # post-exercise baseline, bpm
    rest_rmssd: float  # post-exercise baseline, ms


PROFILES = {
    ActivityType.SWIM: ActivityProfile(8.0, (120.0, 150.0), (0.6, 1.0), 68.0, 40.0),
    ActivityType.CYCLE: ActivityProfile(9.0, (115.0, 155.0), (5.0, 8.0), 72.0, 37.0),
    ActivityType.RUN: ActivityProfile(11.0, (130.0, 170.0), (2.5, 4.0), 76.0, 34.0),
}

# per unit of load score (class index plus position inside the class calorie range);
# activity baselines differ along the same direction, so without the activity
# label a light run and a heavier swim look alike
HR_SHIFT_PER_CLASS = 9.0  # bpm
RMSSD_SHIFT_PER_CLASS = 7.0  # ms
HR_JITTER = 7.0  # bpm, at signal 0
RMSSD_JITTER = 8.0  # ms, at signal 0
RMSSD_FLOOR = 6.0


class SynthError(DataError):
    pass


@dataclass(frozen=True)
class SynthConfig:
    n_sessions: int = 300
    seed: int = 0
    signal_strength: float = 1.0
    class_mix: tuple[float, float, float] = (0.3, 0.4, 0.3)
    calorie_noise: float = 0.02

    def __post_init__(self):
        object.__setattr__(self, "class_mix", tuple(float(v) for v in self.class_mix))
        if int(self.n_sessions) != self.n_sessions or self.n_sessions < 12:
            raise SynthError(f"n_sessions must be an integer >= 12, got {self.n_sessions}")
        if not 0.0 <= self.signal_strength <= 1.0:
            raise SynthError(f"signal_strength must be in [0, 1], got {self.signal_strength}")
        mix = self.class_mix
        if len(mix) != 3 or any(v < 0 for v in mix) or abs(sum(mix) - 1.0) > 1e-9:
            raise SynthError(f"class_mix must be three non-negative fractions summing to 1, got {mix}")
        if not 0.0 <= self.calorie_noise < 0.3:
            raise SynthError(f"calorie_noise must be in [0, 0.3), got {self.calorie_noise}")

    def to_dict(self) -> dict:
        d = asdict(self)
        d["class_mix"] = list(self.class_mix)
        return d

    @classmethod
    def from_dict(cls, doc: dict) -> "SynthConfig":
        known = {"n_sessions", "seed", "signal_strength", "class_mix", "calorie_noise"}
        unknown = set(doc) - known
        if unknown:
            raise SynthError(f"unknown config key(s): {', '.join(sorted(unknown))}")
        return cls(**doc)

    @classmethod
    def from_json(cls, path: str | Path) -> "SynthConfig":
        return cls.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


def class_counts(n: int, mix) -> list[int]:
    """Largest-remainder apportionment of ``n`` sessions over the class mix."""
    raw = [n * m for m in mix]
    counts = [math.floor(r) for r in raw]
    order = sorted(range(len(raw)), key=lambda i: (-(raw[i] - counts[i]), i))
    for i in order[: n - sum(counts)]:
        counts[i] += 1
    return counts


def _truncnorm(rng: np.random.Generator, bound: float = 3.0) -> float:
    while True:
        z = rng.standard_normal()
        if abs(z) <= bound:
            return float(z)


def load_position(calories: float, load_class: LoadClass) -> float:
    """Where ``calories`` sits inside its class range, in [0, 1]."""
    lo, hi = CLASS_CALORIES[load_class]
    return min(max((calories - lo) / (hi - lo), 0.0), 1.0)


def generate_rr(
    load_class: LoadClass, activity: ActivityType, signal: float, seed, position: float = 0.5
) -> RRSeries:
    """Synthesize about one minute of post-exercise RR intervals.

    Mean HR rises and RMSSD falls with the load score ``class + position`` in
    proportion to ``signal``; per-session jitter scales with ``1 - signal``.
    """
    rng = np.random.default_rng(seed)
    prof = PROFILES[activity]
    level = int(load_class) + position
    hr = prof.rest_hr + signal * HR_SHIFT_PER_CLASS * level + (1 - signal) * HR_JITTER * _truncnorm(rng)
    rmssd = prof.rest_rmssd - signal * RMSSD_SHIFT_PER_CLASS * level
    rmssd = max(RMSSD_FLOOR, rmssd + (1 - signal) * RMSSD_JITTER * _truncnorm(rng))
    mean_rr = 60000.0 / hr

    # slow respiratory-like oscillation plus beat-to-beat noise
    amp = 1.2 * rmssd
    period = rng.uniform(8.0, 14.0)
    phase = rng.uniform(0.0, 2 * math.pi)
    beat_sd = rmssd / math.sqrt(2.0)

    intervals: list[float] = []
    total = 0.0
    i = 0
    while total < WINDOW_MS:
        x = mean_rr + amp * math.sin(2 * math.pi * i / period + phase) + beat_sd * rng.standard_normal()
        x = float(np.rint(min(max(x, RR_LOW_MS), RR_HIGH_MS)))
        intervals.append(x)
        total += x
        i += 1
    return RRSeries(tuple(intervals), recording_window=total / 1000.0)


def _in_exercise(rng: np.random.Generator, load_class: LoadClass, activity: ActivityType, noise: float):
    prof = PROFILES[activity]
    lo, hi = CLASS_CALORIES[load_class]
    for _ in range(1000):
        calories = rng.uniform(lo, hi)
        ahr = rng.uniform(*prof.ahr_range)
        eps = noise * _truncnorm(rng)
        minutes = calories / (prof.kcal_per_min * ahr / 140.0 * (1.0 + eps))
        duration_s = minutes * 60.0
        if 600.0 <= duration_s <= 32400.0:
            break
    else:  # pragma: no cover - ranges are chosen so this never triggers
        raise SynthError(f"could not place a {activity.value} session in class {load_class.name}")
    speed = rng.uniform(*prof.speed_range)
    distance = min(max(speed * duration_s, 300.0), 200000.0)
    mhr = min(ahr + rng.uniform(8.0, 30.0), 195.0)
    return distance, duration_s, ahr, mhr, calories


def calories_from_features(activity: ActivityType, duration_s: float, ahr: float) -> float:
    """Noise-free calorie model used by the generator."""
    return PROFILES[activity].kcal_per_min * duration_s / 60.0 * ahr / 140.0


def generate(config: SynthConfig) -> list[SessionRecord]:
    counts = class_counts(config.n_sessions, config.class_mix)
    for c, (m, k) in enumerate(zip(config.class_mix, counts)):
        if m > 0 and k < 2:
            raise SynthError(
                f"class_mix {config.class_mix} leaves class {LoadClass(c).name} with {k} "
                f"session(s) out of {config.n_sessions}; need at least 2"
            )
    labels = np.repeat(np.arange(3), counts)
    labels = np.random.default_rng(config.seed).permutation(labels)

    records = []
    for i, lab in enumerate(labels):
        # independent per-record substream so records can be produced in any order
        rng = np.random.default_rng([config.seed, i])
        load = LoadClass(int(lab))
        activity = ACTIVITIES[int(rng.integers(3))]
        distance, duration, ahr, mhr, calories = _in_exercise(rng, load, activity, config.calorie_noise)
        rr = generate_rr(load, activity, config.signal_strength, [config.seed, i, 1],
                         load_position(calories, load))
        records.append(
            SessionRecord(activity, distance, duration, ahr, mhr, calories, extract_all(rr))
        )
    return records
