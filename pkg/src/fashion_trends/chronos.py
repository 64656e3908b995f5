"""Synthetic weekly calendar, per-theme weekly series and additive decomposition."""

from __future__ import annotations

import csv
import datetime as dt
import io
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources

import numpy as np

N_WEEKS = 104
PERIOD = 13


@dataclass(frozen=True)
class Week:
    index: int
    iso_year: int
    iso_week: int
    monday: dt.date
    thursday: dt.date
    sunday: dt.date


@lru_cache(maxsize=1)
def calendar() -> tuple[Week, ...]:
    """The fixed 104-slot ISO-week table, 2022-W01 through 2023-W52."""
    text = resources.files("fashion_trends").joinpath("data/calendar.csv").read_text("utf-8")
    weeks = []
    for row in csv.DictReader(io.StringIO(text)):
        weeks.append(
            Week(
                int(row["week_index"]),
                int(row["iso_year"]),
                int(row["iso_week"]),
                dt.date.fromisoformat(row["monday"]),
                dt.date.fromisoformat(row["thursday"]),
                dt.date.fromisoformat(row["sunday"]),
            )
        )
    if len(weeks) != N_WEEKS:
        raise RuntimeError(f"calendar table has {len(weeks)} rows, expected {N_WEEKS}")
    return tuple(weeks)


def week_of(day: dt.date) -> int:
    y, w, _ = day.isocalendar()
    for wk in calendar():
        if (wk.iso_year, wk.iso_week) == (y, w):
            return wk.index
    raise ValueError(f"{day} is outside the 2022-2023 calendar")


def default_fashion_weights(fashion_week: float = 1.8, holiday: float = 1.5) -> np.ndarray:
    """Sampling weight per week; a week's month is the month of its Thursday."""
    weights = np.ones(N_WEEKS)
    for wk in calendar():
        th = wk.thursday
        if th.month in (2, 3, 9, 10):
            weights[wk.index] *= fashion_week
        if th.month == 12 or (th.month == 11 and th.day >= 24):
            weights[wk.index] *= holiday
    return weights


def assign_synthetic_timestamps(records, weights, seed: int):
    """Draw a week for every record from the categorical distribution ``weights``."""
    w = np.asarray(weights, dtype=float)
    if w.shape != (N_WEEKS,) or not np.all(w > 0):
        raise ValueError("weights must be 104 positive values")
    rng = np.random.default_rng(int(seed) & 0xFFFFFFFFFFFFFFFF)
    weeks = rng.choice(N_WEEKS, size=len(records), p=w / w.sum())
    for r, wk in zip(records, weeks):
        r.week = int(wk)
    return records


@dataclass
class ThemeSeries:
    theme: str
    counts: np.ndarray
    mean_sentiment: np.ndarray  # nan where counts == 0


def build_weekly_series(records, scores, theme: str, rubric: str = "improved") -> ThemeSeries:
    counts = np.zeros(N_WEEKS, dtype=np.int64)
    sums = np.zeros(N_WEEKS)
    for r in records:
        if theme in r.themes:
            if r.week is None:
                raise ValueError(f"record {r.id} has no week assigned")
            counts[r.week] += 1
            sums[r.week] += scores[r.id].score(rubric)
    with np.errstate(invalid="ignore", divide="ignore"):
        mean = np.where(counts > 0, sums / np.maximum(counts, 1), np.nan)
    return ThemeSeries(theme, counts, mean)


@dataclass
class Decomposition:
    observed: np.ndarray
    trend: np.ndarray
    seasonal: np.ndarray
    residual: np.ndarray
    period: int


def centered_moving_average(y, period):
    y = np.asarray(y, dtype=float)
    if period % 2:
        kernel = np.full(period, 1.0 / period)
    else:
        kernel = np.r_[0.5, np.ones(period - 1), 0.5] / period
    half = len(kernel) // 2
    trend = np.full(y.shape, np.nan)
    trend[half : len(y) - half] = np.convolve(y, kernel, mode="valid")
    return trend


def decompose_additive(values, period: int = PERIOD) -> Decomposition:
    y = np.asarray(values, dtype=float)
    if y.ndim != 1 or len(y) < 2 * period:
        raise ValueError(f"series needs at least {2 * period} points, got {len(y)}")
    if np.isnan(y).any():
        raise ValueError("series contains missing values")
    trend = centered_moving_average(y, period)
    detrended = y - trend
    idx = np.arange(len(y)) % period
    pattern = np.array([np.nanmean(detrended[idx == k]) for k in range(period)])
    pattern -= pattern.mean()
    seasonal = pattern[idx]
    residual = y - trend - seasonal
    return Decomposition(y, trend, seasonal, residual, period)
