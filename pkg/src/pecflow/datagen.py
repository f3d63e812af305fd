"""Seeded synthetic traffic-count generator.

Builds smooth daily intensity curves (overnight floor plus rush-hour bumps),
scales them per location, optionally injects extreme days with a distinct
pattern, and draws per-minute counts as Poisson around the intensity.
"""

import csv
import datetime as dt
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .preprocess import MINUTES_PER_DAY, RawCountSeries

__all__ = ["Bump", "SynthSpec", "generate", "write_ground_truth_csv", "load_spec"]

EXTREME_PATTERNS = ("morning-peak", "evening-peak", "flat-high")


@dataclass
class Bump:
    """Gaussian bump in the daily intensity curve (veh/h)."""

    center_min: float
    width_min: float
    height_vph: float

    def curve(self, minutes):
        if self.width_min <= 0 or self.height_vph <= 0:
            raise ValueError("bump width and height must be positive")
        z = (minutes - self.center_min) / self.width_min
        return self.height_vph * np.exp(-0.5 * z * z)


@dataclass
class SynthSpec:
    """Parameters of one synthetic data set."""

    n_days: int = 60
    n_locations: int = 14
    seed: int = 0
    start_date: dt.date = dt.date(2018, 1, 10)
    base_level_vph: float = 120.0
    amplitudes: list = None  # per-location multipliers; default spreads 0.5..1.5
    bumps: list = field(
        default_factory=lambda: [Bump(480.0, 80.0, 900.0), Bump(1050.0, 110.0, 700.0)]
    )
    noise: float = 1.0  # 0 disables count noise; > 0 draws Poisson counts
    extreme_fraction: float = 0.0
    extreme_pattern: str = "evening-peak"
    extreme_height_vph: float = 1400.0

    def __post_init__(self):
        if isinstance(self.start_date, str):
            self.start_date = dt.date.fromisoformat(self.start_date)
        self.bumps = [Bump(*b) if not isinstance(b, Bump) else b for b in self.bumps]
        if self.n_days < 1 or self.n_locations < 1:
            raise ValueError("need at least one day and one location")
        if not 0.0 <= self.extreme_fraction <= 1.0:
            raise ValueError("extreme_fraction must lie in [0, 1]")
        if self.extreme_pattern not in EXTREME_PATTERNS:
            raise ValueError(f"extreme_pattern must be one of {EXTREME_PATTERNS}")
        if self.extreme_height_vph <= 0 or self.base_level_vph < 0 or self.noise < 0:
            raise ValueError("levels must be non-negative, heights positive")
        if self.amplitudes is None:
            if self.n_locations == 1:
                self.amplitudes = [1.0]
            else:
                self.amplitudes = list(
                    np.linspace(0.5, 1.5, self.n_locations)
                )
        if len(self.amplitudes) != self.n_locations:
            raise ValueError("amplitudes must have one entry per location")
        if any(a <= 0 for a in self.amplitudes):
            raise ValueError("amplitudes must be positive")


def _extreme_curve(spec, minutes):
    if spec.extreme_pattern == "morning-peak":
        return Bump(480.0, 70.0, spec.extreme_height_vph).curve(minutes)
    if spec.extreme_pattern == "evening-peak":
        return Bump(1110.0, 80.0, spec.extreme_height_vph).curve(minutes)
    return np.full_like(minutes, 0.5 * spec.extreme_height_vph)


def generate(spec):
    """Generate the count series and the injected-extreme ground truth.

    Deterministic for a fixed spec (the seed drives a private generator).
    Returns (series_list, truth) where truth is a list of
    (date, location, pattern) tuples for the injected days.
    """
    rng = np.random.default_rng(spec.seed)
    minutes = np.arange(MINUTES_PER_DAY, dtype=float)
    extra = _extreme_curve(spec, minutes)
    n_extreme = math.ceil(spec.extreme_fraction * spec.n_days) if spec.extreme_fraction else 0
    series_list = []
    truth = []
    for loc_idx in range(spec.n_locations):
        location = f"L{loc_idx + 1}"
        base = spec.base_level_vph + sum(b.curve(minutes) for b in spec.bumps)
        intensity = spec.amplitudes[loc_idx] * base
        extreme_days = set()
        if n_extreme:
            extreme_days = set(
                rng.choice(spec.n_days, size=n_extreme, replace=False).tolist()
            )
        for day_idx in range(spec.n_days):
            day = spec.start_date + dt.timedelta(days=day_idx)
            mean_vph = intensity.copy()
            if day_idx in extreme_days:
                mean_vph = mean_vph + extra
                truth.append((day, location, spec.extreme_pattern))
            mean_counts = mean_vph / 60.0
            if spec.noise > 0:
                counts = rng.poisson(mean_counts).astype(float)
            else:
                counts = np.rint(mean_counts)
            series_list.append(
                RawCountSeries(day_id=day, location_id=location, counts=counts)
            )
    return series_list, truth


def write_ground_truth_csv(truth, path):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["date", "location", "pattern"])
        for day, location, pattern in truth:
            writer.writerow([day.isoformat(), location, pattern])


def load_spec(path):
    """Load a SynthSpec from a JSON file of keyword fields."""
    with open(path, encoding="utf-8") as fh:
        raw = json.load(fh)
    if "bumps" in raw:
        raw["bumps"] = [Bump(*b) for b in raw["bumps"]]
    return SynthSpec(**raw)
