"""Direction / significance / confidence labels for theme trajectories."""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from .statcore import ols_line

ALPHA = 0.05
HIGH_CONFIDENCE_P = 0.005
STRONG_R2 = 0.5
MODERATE_R2 = 0.3
MIN_ACTIVE_WEEKS = 20
SMALL_THEME_RECORDS = 300

_CONFIDENCE_ORDER = ("low", "medium", "high")


@dataclass(frozen=True)
class TrendReport:
    theme: str
    slope: float
    p_value: float
    r_squared: float
    direction: str
    significant: bool
    confidence: str

    @property
    def label(self) -> str:
        if self.direction == "stable":
            words = "Stable (No Clear Trend)"
        else:
            words = self.direction.replace("_", " ").title()
        sig = "Significant" if self.significant else "Not Significant"
        return f"{words}, {sig}, {self.confidence.title()}"

    def to_dict(self) -> dict:
        d = asdict(self)
        d["label"] = self.label
        return d


def direction_of(slope: float, p_value: float, r_squared: float) -> str:
    if not p_value < ALPHA or slope == 0:
        return "stable"
    if r_squared >= STRONG_R2:
        band = "strongly"
    elif r_squared >= MODERATE_R2:
        band = "moderately"
    else:
        band = "slightly"
    return f"{band}_{'rising' if slope > 0 else 'falling'}"


def confidence_of(p_value: float, n_records: int | None = None, downgrade_small: bool = False) -> str:
    if p_value < HIGH_CONFIDENCE_P:
        level = 2
    elif p_value < ALPHA:
        level = 1
    else:
        level = 0
    if downgrade_small and n_records is not None and n_records < SMALL_THEME_RECORDS:
        level = max(0, level - 1)
    return _CONFIDENCE_ORDER[level]


def classify_stats(theme, slope, p_value, r_squared, n_records=None, downgrade_small=False) -> TrendReport:
    direction = direction_of(slope, p_value, r_squared)
    return TrendReport(
        theme=theme,
        slope=float(slope),
        p_value=float(p_value),
        r_squared=float(r_squared),
        direction=direction,
        significant=direction != "stable",
        confidence=confidence_of(p_value, n_records, downgrade_small),
    )


def classify_trend(series, downgrade_small: bool = True) -> TrendReport:
    """OLS of weekly counts on week index, then the rubric."""
    counts = np.asarray(series.counts, dtype=float)
    active = int(np.count_nonzero(counts))
    if active < MIN_ACTIVE_WEEKS:
        raise ValueError(f"theme {series.theme!r}: {active} active weeks, need {MIN_ACTIVE_WEEKS}")
    fit = ols_line(np.arange(len(counts), dtype=float), counts)
    return classify_stats(
        series.theme, fit.slope, fit.p_value, fit.r_squared,
        n_records=int(counts.sum()), downgrade_small=downgrade_small,
    )
