"""Theme tagging and hashtag statistics."""

from __future__ import annotations

from collections import Counter, defaultdict
from importlib import resources
from itertools import combinations
from pathlib import Path
from typing import NamedTuple

from .ingest import match_keywords

THEMES = (
    "vintage",
    "luxury",
    "accessories",
    "seasonal",
    "sustainability",
    "streetwear",
    "minimalist",
)


class CooccurrencePair(NamedTuple):
    tag_a: str
    tag_b: str
    count: int


def parse_taxonomy(text: str) -> dict[str, frozenset[str]]:
    taxonomy = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        theme, sep, rest = line.partition(":")
        theme = theme.strip().lower()
        if not sep:
            raise ValueError(f"taxonomy line {lineno}: expected 'theme: kw, kw'")
        if theme not in THEMES:
            raise ValueError(f"taxonomy line {lineno}: unknown theme {theme!r}")
        kws = frozenset(k.strip().lower() for k in rest.split(",") if k.strip())
        if not kws:
            raise ValueError(f"taxonomy line {lineno}: theme {theme!r} has no keywords")
        taxonomy[theme] = taxonomy.get(theme, frozenset()) | kws
    return taxonomy


def load_taxonomy(path=None) -> dict[str, frozenset[str]]:
    if path is None:
        text = resources.files("fashion_trends").joinpath("data/taxonomy.txt").read_text("utf-8")
    else:
        text = Path(path).read_text("utf-8")
    return parse_taxonomy(text)


def tag_themes(clean_text: str, taxonomy, hashtag_substring: bool = False) -> frozenset[str]:
    all_kws = set().union(*taxonomy.values()) if taxonomy else set()
    hits = match_keywords(clean_text, all_kws, hashtag_substring)
    return frozenset(t for t, kws in taxonomy.items() if hits & kws)


def tag_records(records, taxonomy, hashtag_substring: bool = False):
    for r in records:
        r.themes = tag_themes(r.clean_text, taxonomy, hashtag_substring)
    return records


def theme_counts(records, themes=THEMES) -> dict[str, int]:
    counts = dict.fromkeys(themes, 0)
    for r in records:
        for t in r.themes:
            if t in counts:
                counts[t] += 1
    return counts


def _ranked(counter, top_k):
    return sorted(counter.items(), key=lambda kv: (-kv[1], kv[0]))[:top_k]


def hashtag_frequency(records, top_k: int = 20) -> list[tuple[str, int]]:
    if top_k < 1:
        raise ValueError("top_k must be >= 1")
    c = Counter()
    for r in records:
        c.update(set(r.hashtags))
    return _ranked(c, top_k)


def cooccurrence_pairs(records, top_k: int = 20) -> list[CooccurrencePair]:
    if top_k < 1:
        raise ValueError("top_k must be >= 1")
    c = Counter()
    for r in records:
        c.update(combinations(sorted(set(r.hashtags)), 2))
    return [CooccurrencePair(a, b, n) for (a, b), n in _ranked(c, top_k)]


def hashtag_sentiment_ranking(records, scores, min_count: int = 5, score_field: str = "improved", top_k: int = 5):
    """Mean score per hashtag, as (most positive, most negative) lists.

    ``scores`` maps record id to an object exposing ``compound`` and
    ``improved``. Tags seen in fewer than ``min_count`` records are dropped.
    """
    if min_count < 1:
        raise ValueError("min_count must be >= 1")
    attr = {"compound": "compound", "improved": "improved", "improved_compound": "improved"}.get(score_field)
    if attr is None:
        raise ValueError(f"unknown score field {score_field!r}")
    sums = defaultdict(float)
    counts = Counter()
    for r in records:
        value = getattr(scores[r.id], attr)
        for tag in set(r.hashtags):
            sums[tag] += value
            counts[tag] += 1
    means = {t: sums[t] / n for t, n in counts.items() if n >= min_count}
    top = sorted(means.items(), key=lambda kv: (-kv[1], kv[0]))[:top_k]
    bottom = sorted(means.items(), key=lambda kv: (kv[1], kv[0]))[:top_k]
    return top, bottom
