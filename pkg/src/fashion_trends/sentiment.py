"""Compound scores, five-class rubrics and category distributions."""

from __future__ import annotations

import math
from dataclasses import dataclass

EPS = 0.001
NEUTRAL_DAMPING = 0.7

CATEGORIES = ("very_negative", "negative", "neutral", "positive", "very_positive")
THREE_CLASSES = ("negative", "neutral", "positive")
COLLAPSE = {
    "very_negative": "negative",
    "negative": "negative",
    "neutral": "neutral",
    "positive": "positive",
    "very_positive": "positive",
}


def compound(pos: float, neg: float) -> float:
    return (pos - neg) / (pos + neg + EPS)


def improved_compound(pos: float, neg: float, neu: float) -> float:
    return math.tanh(2.0 * (pos - neg)) * (1.0 - neu * NEUTRAL_DAMPING)


def _categorize(c, inner, outer=0.5):
    if c >= outer:
        return "very_positive"
    if c >= inner:
        return "positive"
    if c > -inner:
        return "neutral"
    if c > -outer:
        return "negative"
    return "very_negative"


def categorize_original(c: float) -> str:
    return _categorize(c, 0.05)


def categorize_improved(c: float) -> str:
    return _categorize(c, 0.15)


RUBRICS = {"original": categorize_original, "improved": categorize_improved}


@dataclass(frozen=True)
class CompoundScores:
    compound: float
    improved: float
    category_original: str
    category_improved: str

    def category(self, rubric: str) -> str:
        return self.category_original if rubric == "original" else self.category_improved

    def score(self, rubric: str) -> float:
        return self.compound if rubric == "original" else self.improved


def score_triple(triple) -> CompoundScores:
    c = compound(triple.pos, triple.neg)
    ic = improved_compound(triple.pos, triple.neg, triple.neu)
    return CompoundScores(c, ic, categorize_original(c), categorize_improved(ic))


def score_records(records) -> dict[str, CompoundScores]:
    return {r.id: score_triple(r.sentiment) for r in records}


def distribution(categories) -> tuple[dict[str, float], dict[str, float]]:
    """Five-class fractions and their three-class collapse.

    ``categories`` is an iterable of five-class labels.
    """
    labels = list(categories)
    if not labels:
        raise ValueError("cannot compute a distribution of zero records")
    n = len(labels)
    five = dict.fromkeys(CATEGORIES, 0)
    for lab in labels:
        five[lab] += 1
    three = dict.fromkeys(THREE_CLASSES, 0)
    for lab, k in five.items():
        three[COLLAPSE[lab]] += k
    return {k: v / n for k, v in five.items()}, {k: v / n for k, v in three.items()}


def record_distribution(scores, rubric: str = "improved"):
    if rubric not in RUBRICS:
        raise ValueError(f"unknown rubric {rubric!r}")
    return distribution(s.category(rubric) for s in scores.values())
