"""Synthetic platform and brand sentiment panels, and brand attribution."""

from __future__ import annotations

import csv
import io
import math
from collections import defaultdict
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import numpy as np
from scipy.optimize import brentq
from scipy.stats import norm

from .ingest import clean_text, tokens
from .themes import THEMES

PLATFORMS = ("twitter", "instagram", "pinterest", "tiktok", "reddit")
BRAND_CATEGORIES = ("luxury", "fast_fashion", "sportswear", "sustainable")
DEFAULT_DISPERSION = 0.15
MIN_CELL = 30


@dataclass(frozen=True)
class PlatformProfile:
    platform: str
    targets: dict  # theme -> target mean sentiment
    dispersion: float = DEFAULT_DISPERSION

    def __post_init__(self):
        if self.platform not in PLATFORMS:
            raise ValueError(f"unknown platform {self.platform!r}")
        if not self.dispersion > 0:
            raise ValueError("dispersion must be positive")
        for theme, t in self.targets.items():
            if not -1.0 <= t <= 1.0:
                raise ValueError(f"{self.platform}/{theme}: target {t} outside [-1, 1]")


@dataclass(frozen=True)
class Brand:
    name: str
    category: str
    aliases: tuple
    target: float
    dispersion: float


@dataclass(frozen=True)
class PanelRecord:
    group: str
    theme: str
    score: float


def _read_data(name, path):
    if path is None:
        return resources.files("fashion_trends").joinpath(f"data/{name}").read_text("utf-8")
    return Path(path).read_text("utf-8")


def load_platform_profiles(path=None, dispersion: float = DEFAULT_DISPERSION) -> list[PlatformProfile]:
    rows = csv.DictReader(io.StringIO(_read_data("platforms.csv", path)))
    return [
        PlatformProfile(r["platform"], {t: float(r[t]) for t in THEMES if t in r}, dispersion)
        for r in rows
    ]


def load_brand_lexicon(path=None) -> list[Brand]:
    brands = []
    seen = {}
    for r in csv.DictReader(io.StringIO(_read_data("brands.csv", path))):
        if r["category"] not in BRAND_CATEGORIES:
            raise ValueError(f"brand {r['brand']!r}: unknown category {r['category']!r}")
        if r["brand"] in seen:
            raise ValueError(f"brand {r['brand']!r} listed twice")
        aliases = tuple(clean_text(a) for a in r["aliases"].split("|") if a.strip())
        brand = Brand(r["brand"], r["category"], aliases, float(r["target"]), float(r["dispersion"]))
        seen[brand.name] = brand
        brands.append(brand)
    return brands


def clipped_normal_mean(loc: float, scale: float, lo: float = -1.0, hi: float = 1.0) -> float:
    a, b = (lo - loc) / scale, (hi - loc) / scale
    inside = loc * (norm.cdf(b) - norm.cdf(a)) + scale * (norm.pdf(a) - norm.pdf(b))
    return lo * norm.cdf(a) + hi * norm.sf(b) + inside


def location_for_mean(target: float, scale: float) -> float:
    """Location whose [-1, 1]-clipped normal has mean ``target``."""
    if not -1.0 < target < 1.0:
        raise ValueError("target must lie strictly inside (-1, 1)")
    return brentq(lambda m: clipped_normal_mean(m, scale) - target, -1.0 - 10 * scale, 1.0 + 10 * scale, xtol=1e-12)


def _draw(rng, target, scale, n):
    loc = location_for_mean(target, scale)
    return np.clip(rng.normal(loc, scale, n), -1.0, 1.0)


def generate_platform_panel(profiles, n_per_cell: int, seed: int) -> list[PanelRecord]:
    if n_per_cell < MIN_CELL:
        raise ValueError(f"n_per_cell must be >= {MIN_CELL}")
    cells = [(prof, theme) for prof in profiles for theme in THEMES if theme in prof.targets]
    out = []
    for (prof, theme), child in zip(cells, np.random.SeedSequence(seed).spawn(len(cells))):
        rng = np.random.default_rng(child)
        for s in _draw(rng, prof.targets[theme], prof.dispersion, n_per_cell):
            out.append(PanelRecord(prof.platform, theme, float(s)))
    return out


def cell_means(panel) -> dict:
    sums, counts = defaultdict(float), defaultdict(int)
    for r in panel:
        sums[(r.group, r.theme)] += r.score
        counts[(r.group, r.theme)] += 1
    return {k: sums[k] / counts[k] for k in sums}


def heatmap(panel, platforms=PLATFORMS, themes=THEMES) -> np.ndarray:
    means = cell_means(panel)
    return np.array([[means.get((p, t), np.nan) for t in themes] for p in platforms])


def generate_brand_panel(lexicon, n_per_brand: int, seed: int):
    """Synthetic (clean_text, score) mentions, one alias per mention."""
    if n_per_brand < MIN_CELL:
        raise ValueError(f"n_per_brand must be >= {MIN_CELL}")
    out = []
    for brand, child in zip(lexicon, np.random.SeedSequence(seed).spawn(len(lexicon))):
        rng = np.random.default_rng(child)
        scores = _draw(rng, brand.target, brand.dispersion, n_per_brand)
        alias_ix = rng.integers(0, len(brand.aliases), n_per_brand)
        for s, a in zip(scores, alias_ix):
            out.append((f"new look from {brand.aliases[a]} today", float(s)))
    return out


@dataclass(frozen=True)
class BrandSummary:
    brand_means: dict
    brand_counts: dict
    category_means: dict


def attribute_brands(text: str, lexicon) -> list[str]:
    """Brands with an alias appearing as a whole word or word sequence."""
    padded = f" {' '.join(tokens(text))} "
    return [b.name for b in lexicon if any(f" {a} " in padded for a in b.aliases)]


def brand_sentiment(mentions, lexicon) -> BrandSummary:
    """Per-brand means and category means (mean of brand means).

    ``mentions`` yields (clean_text, score); a text naming two brands counts
    for both.
    """
    if not lexicon:
        raise ValueError("brand lexicon is empty")
    sums, counts = defaultdict(float), defaultdict(int)
    for text, score in mentions:
        for name in attribute_brands(text, lexicon):
            sums[name] += score
            counts[name] += 1
    brand_means = {b.name: sums[b.name] / counts[b.name] for b in lexicon if b.name in counts}
    by_cat = defaultdict(list)
    for b in lexicon:
        if b.name in brand_means:
            by_cat[b.category].append(brand_means[b.name])
    category_means = {c: math.fsum(v) / len(v) for c, v in sorted(by_cat.items())}
    return BrandSummary(brand_means, dict(counts), category_means)
