"""Stage orchestration and on-disk artifacts.

Every stage reads the artifacts written by earlier stages from the output
directory and writes its own, so any stage can be re-run on cached
intermediates.
"""

from __future__ import annotations

import csv
import json
import logging
import math
import os
import zlib
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from . import causality, chronos, classify, forecast, ingest, panels, sentiment, themes, trends
from .ingest import MergedRecord, SentimentTriple

log = logging.getLogger(__name__)

STAGES = (
    "ingest",
    "themes",
    "sentiment",
    "series",
    "decompose",
    "trends",
    "forecast",
    "causality",
    "classify",
    "panels",
    "report",
)


class StageError(RuntimeError):
    def __init__(self, stage, message):
        super().__init__(f"stage {stage}: {message}")
        self.stage = stage


@dataclass
class RunConfig:
    input: str | None = None
    t4sa: str | None = None
    keywords: str | None = None
    taxonomy: str | None = None
    seed: int = 42
    rubric: str = "improved"
    out: str = "out"
    jobs: int = field(default_factory=lambda: os.cpu_count() or 1)
    stages: tuple = STAGES
    hashtag_substring: bool = False
    seasonal_themes: tuple = tuple(sorted(forecast.SEASONAL_THEMES))
    decompose_field: str = "count"
    min_hashtag_count: int = 5
    top_k: int = 20
    panel_n: int = 1000
    cv_folds: int = 5
    n_estimators: int = 100
    max_tfidf_features: int = 2000
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.rubric not in sentiment.RUBRICS:
            raise ValueError(f"rubric must be one of {sorted(sentiment.RUBRICS)}")
        if self.decompose_field not in ("count", "sentiment"):
            raise ValueError("decompose_field must be 'count' or 'sentiment'")
        unknown = [s for s in self.stages if s not in STAGES]
        if unknown:
            raise ValueError(f"unknown stage(s): {', '.join(unknown)}")
        if self.jobs < 1:
            raise ValueError("jobs must be >= 1")


def stage_seed(root: int, stage: str) -> int:
    """Independent per-stage seed derived from the root seed and stage name."""
    ss = np.random.SeedSequence([int(root) & 0xFFFFFFFF, zlib.crc32(stage.encode())])
    return int(ss.generate_state(1, dtype=np.uint64)[0])


# --------------------------------------------------------------------------
# file helpers
# --------------------------------------------------------------------------


def fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        x = float(x)
        return "" if math.isnan(x) else repr(x)
    return str(x)


def write_csv(path: Path, header, rows):
    with path.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([fmt(v) for v in row])


def read_csv(path: Path, stage: str):
    if not path.is_file():
        raise StageError(stage, f"missing upstream artifact {path}")
    with path.open(newline="", encoding="utf-8") as fh:
        return list(csv.DictReader(fh))


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return None if math.isnan(x) or math.isinf(x) else x
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def write_json(path: Path, obj):
    path.write_text(json.dumps(_jsonable(obj), indent=2, sort_keys=True) + "\n", encoding="utf-8")


def read_json(path: Path, stage: str):
    if not path.is_file():
        raise StageError(stage, f"missing upstream artifact {path}")
    return json.loads(path.read_text(encoding="utf-8"))


def _opt_float(s):
    return float(s) if s not in ("", None) else math.nan


# --------------------------------------------------------------------------
# record (de)serialisation
# --------------------------------------------------------------------------

RECORD_HEADER = ("id", "raw_text", "clean_text", "hashtags", "pos", "neg", "neu", "themes")


def _write_records(path, records):
    write_csv(
        path,
        RECORD_HEADER,
        (
            (r.id, r.raw_text, r.clean_text, " ".join(r.hashtags), r.sentiment.pos,
             r.sentiment.neg, r.sentiment.neu, " ".join(sorted(r.themes)))
            for r in records
        ),
    )


def _read_records(path, stage):
    out = []
    for row in read_csv(path, stage):
        out.append(
            MergedRecord(
                id=row["id"],
                raw_text=row["raw_text"],
                clean_text=row["clean_text"],
                hashtags=row["hashtags"].split(),
                sentiment=SentimentTriple(float(row["pos"]), float(row["neg"]), float(row["neu"])),
                themes=frozenset(row["themes"].split()),
            )
        )
    return out


def _read_scores(path, stage):
    return {
        row["id"]: sentiment.CompoundScores(
            float(row["compound"]), float(row["improved"]), row["category_original"], row["category_improved"]
        )
        for row in read_csv(path, stage)
    }


def _read_series(path, stage):
    rows = read_csv(path, stage)
    out = {}
    for theme in themes.THEMES:
        sel = [r for r in rows if r["theme"] == theme]
        if not sel:
            continue
        sel.sort(key=lambda r: int(r["week"]))
        out[theme] = chronos.ThemeSeries(
            theme,
            np.array([int(r["count"]) for r in sel], dtype=np.int64),
            np.array([_opt_float(r["mean_sentiment"]) for r in sel]),
        )
    return out


# --------------------------------------------------------------------------
# stages
# --------------------------------------------------------------------------


def stage_ingest(cfg: RunConfig, out: Path):
    for label, p in (("--input", cfg.input), ("--t4sa", cfg.t4sa)):
        if not p:
            raise StageError("ingest", f"{label} is required")
    texts = ingest.load_text_corpus(cfg.input)
    scores = ingest.load_t4sa(cfg.t4sa)
    merged, summary = ingest.merge_by_id(texts, scores)
    keywords = ingest.load_keywords(cfg.keywords)
    kept, fraction = ingest.filter_fashion(merged, keywords, cfg.hashtag_substring)
    _write_records(out / "fashion.csv", kept)
    write_json(out / "join_summary.json", {**summary.__dict__, "fashion_kept": len(kept), "fashion_fraction": fraction})
    return {"merged": len(merged), "fashion": len(kept)}


def stage_themes(cfg: RunConfig, out: Path):
    records = _read_records(out / "fashion.csv", "themes")
    taxonomy = themes.load_taxonomy(cfg.taxonomy)
    themes.tag_records(records, taxonomy, cfg.hashtag_substring)
    _write_records(out / "tagged.csv", records)
    counts = themes.theme_counts(records)
    write_csv(out / "theme_counts.csv", ("theme", "count"), counts.items())
    write_csv(out / "hashtag_frequency.csv", ("tag", "count"), themes.hashtag_frequency(records, cfg.top_k))
    write_csv(out / "cooccurrence.csv", ("tag_a", "tag_b", "count"), themes.cooccurrence_pairs(records, cfg.top_k))
    return counts


def stage_sentiment(cfg: RunConfig, out: Path):
    records = _read_records(out / "tagged.csv", "sentiment")
    scores = sentiment.score_records(records)
    write_csv(
        out / "scored.csv",
        ("id", "compound", "improved", "category_original", "category_improved"),
        ((rid, s.compound, s.improved, s.category_original, s.category_improved) for rid, s in scores.items()),
    )
    dist = {}
    if scores:
        for rubric in sentiment.RUBRICS:
            five, three = sentiment.record_distribution(scores, rubric)
            dist[rubric] = {"five_class": five, "three_class": three}
    write_json(out / "sentiment_distribution.json", dist)
    field_name = "improved" if cfg.rubric == "improved" else "compound"
    top, bottom = themes.hashtag_sentiment_ranking(records, scores, cfg.min_hashtag_count, field_name, cfg.top_k)
    write_csv(
        out / "hashtag_sentiment.csv",
        ("list", "rank", "tag", "mean_score"),
        [("positive", i + 1, t, v) for i, (t, v) in enumerate(top)]
        + [("negative", i + 1, t, v) for i, (t, v) in enumerate(bottom)],
    )
    return dist


def stage_series(cfg: RunConfig, out: Path):
    records = _read_records(out / "tagged.csv", "series")
    scores = _read_scores(out / "scored.csv", "series")
    chronos.assign_synthetic_timestamps(records, chronos.default_fashion_weights(), stage_seed(cfg.seed, "series"))
    write_csv(out / "weeks.csv", ("id", "week"), ((r.id, r.week) for r in records))
    cal = chronos.calendar()
    rows = []
    for theme in themes.THEMES:
        s = chronos.build_weekly_series(records, scores, theme, cfg.rubric)
        for w in range(chronos.N_WEEKS):
            rows.append((theme, w, cal[w].iso_year, cal[w].iso_week, s.counts[w], s.mean_sentiment[w]))
    write_csv(out / "series.csv", ("theme", "week", "iso_year", "iso_week", "count", "mean_sentiment"), rows)


def stage_decompose(cfg: RunConfig, out: Path):
    series = _read_series(out / "series.csv", "decompose")
    rows = []
    for theme, s in series.items():
        values = s.counts if cfg.decompose_field == "count" else np.nan_to_num(s.mean_sentiment, nan=0.0)
        d = chronos.decompose_additive(values, chronos.PERIOD)
        for w in range(len(values)):
            rows.append((theme, w, d.observed[w], d.trend[w], d.seasonal[w], d.residual[w]))
    write_csv(out / "decomposition.csv", ("theme", "week", "observed", "trend", "seasonal", "residual"), rows)


def stage_trends(cfg: RunConfig, out: Path):
    series = _read_series(out / "series.csv", "trends")
    reports, skipped = [], {}
    for theme, s in series.items():
        try:
            reports.append(trends.classify_trend(s))
        except ValueError as exc:
            skipped[theme] = str(exc)
    write_json(out / "trends.json", {"trends": [r.to_dict() for r in reports], "skipped": skipped})
    return reports


def _forecast_theme(theme, counts, seasonal_themes):
    fit = forecast.grid_search(counts, theme, seasonal_themes)
    fc = forecast.forecast(fit, counts)
    return theme, fit, fc


def stage_forecast(cfg: RunConfig, out: Path):
    series = _read_series(out / "series.csv", "forecast")
    args = [(t, s.counts.astype(float), frozenset(cfg.seasonal_themes)) for t, s in series.items()]
    if cfg.jobs > 1 and len(args) > 1:
        with ProcessPoolExecutor(max_workers=cfg.jobs) as ex:
            results = list(ex.map(_forecast_theme, *zip(*args)))
    else:
        results = [_forecast_theme(*a) for a in args]
    models, fc_rows, hist_rows = {}, [], []
    for theme, fit, fc in results:
        hist = series[theme].counts.astype(float)
        models[theme] = fit.to_dict()
        peak = hist.max()
        mean = np.maximum(fc.mean, 0.0)
        lower = np.maximum(fc.lower95, 0.0)
        upper = np.maximum(fc.upper95, 0.0)
        pct = forecast.normalize_to_peak(hist, mean) if peak > 0 else np.full(len(mean), np.nan)
        for h in range(fc.horizon):
            fc_rows.append((theme, chronos.N_WEEKS + h, mean[h], lower[h], upper[h], pct[h]))
        hist_pct = forecast.normalize_to_peak(hist, hist) if peak > 0 else np.full(len(hist), np.nan)
        for w, v in enumerate(hist_pct):
            hist_rows.append((theme, w, hist[w], v))
    write_json(out / "models.json", models)
    write_csv(out / "forecasts.csv", ("theme", "week", "mean", "lower95", "upper95", "pct_of_peak"), fc_rows)
    write_csv(out / "normalized_history.csv", ("theme", "week", "count", "pct_of_peak"), hist_rows)
    write_json(out / "forecasts.json", {
        t: {"mean": [r[2] for r in fc_rows if r[0] == t],
            "lower95": [r[3] for r in fc_rows if r[0] == t],
            "upper95": [r[4] for r in fc_rows if r[0] == t]}
        for t in models
    })
    return models


def stage_causality(cfg: RunConfig, out: Path):
    series = _read_series(out / "series.csv", "causality")
    models = read_json(out / "models.json", "causality")
    orders = {t: models[t]["spec"]["d"] for t in series if t in models}
    stationary = causality.stationarize({t: s.counts.astype(float) for t, s in series.items()}, orders)
    names = [t for t in themes.THEMES if t in stationary]
    edges = causality.all_edges(names, stationary)
    network = causality.network_from_edges(names, edges)
    write_csv(
        out / "causality_lags.csv",
        ("source", "target", "lag", "p_value", "significant"),
        ((e.source, e.target, lag, p, p < causality.ALPHA) for e in edges for lag, p in e.p_by_lag.items()),
    )
    (out / "causality.json").write_text(network.to_json(), encoding="utf-8")
    (out / "network.dot").write_text(causality.export_dot(network), encoding="utf-8")
    return network


def stage_classify(cfg: RunConfig, out: Path):
    records = _read_records(out / "tagged.csv", "classify")
    scores = _read_scores(out / "scored.csv", "classify")
    docs = [r.clean_text for r in records]
    labels = [sentiment.COLLAPSE[scores[r.id].category_improved] for r in records]
    seed = stage_seed(cfg.seed, "classify")
    present = sorted(set(labels))
    counts = {c: labels.count(c) for c in present}
    if len(present) < 2 or min(counts.values()) < cfg.cv_folds:
        raise StageError("classify", f"need >= {cfg.cv_folds} records in at least two classes, got {counts}")
    classes = tuple(c for c in sentiment.THREE_CLASSES if c in present)
    report, _, _ = classify.cross_validate(
        docs, labels, cfg.cv_folds, seed, classes=classes,
        max_features=cfg.max_tfidf_features, n_estimators=cfg.n_estimators,
    )
    vocab = classify.fit_tfidf(docs, cfg.max_tfidf_features)
    model = classify.train_forest(
        classify.transform_matrix(vocab, docs), labels, seed=seed, classes=classes, n_estimators=cfg.n_estimators
    )
    (out / "classifier_model.json").write_text(model.to_json() + "\n", encoding="utf-8")
    write_json(out / "classify_report.json", report.to_dict())
    write_csv(
        out / "confusion.csv",
        ("truth",) + tuple(report.classes),
        ((c,) + tuple(report.confusion[i]) for i, c in enumerate(report.classes)),
    )
    return report


def stage_panels(cfg: RunConfig, out: Path):
    seed = stage_seed(cfg.seed, "panels")
    profiles = panels.load_platform_profiles()
    panel = panels.generate_platform_panel(profiles, cfg.panel_n, seed)
    write_csv(out / "platform_panel.csv", ("platform", "theme", "score"), ((r.group, r.theme, r.score) for r in panel))
    hm = panels.heatmap(panel)
    write_csv(out / "platform_heatmap.csv", ("platform",) + themes.THEMES,
              ((p,) + tuple(hm[i]) for i, p in enumerate(panels.PLATFORMS)))
    lexicon = panels.load_brand_lexicon()
    mentions = panels.generate_brand_panel(lexicon, cfg.panel_n, stage_seed(cfg.seed, "panels/brands"))
    summary = panels.brand_sentiment(mentions, lexicon)
    category = {b.name: b.category for b in lexicon}
    brand_rows = []
    for text, score in mentions:
        for name in panels.attribute_brands(text, lexicon):
            brand_rows.append((name, category[name], score))
    write_csv(out / "brand_panel.csv", ("brand", "category", "score"), brand_rows)
    result = {"synthetic": summary.__dict__}
    tagged = out / "tagged.csv"
    scored = out / "scored.csv"
    if tagged.is_file() and scored.is_file():
        records = _read_records(tagged, "panels")
        scores = _read_scores(scored, "panels")
        corpus = panels.brand_sentiment(
            ((r.clean_text, scores[r.id].score(cfg.rubric)) for r in records), lexicon
        )
        result["corpus"] = corpus.__dict__
    write_json(out / "brand_summary.json", result)
    return result


def emit_plot_data(out: Path) -> list[Path]:
    """One tidy CSV per figure family under ``out/plots``."""
    plots = out / "plots"
    plots.mkdir(exist_ok=True)
    written = []

    def need(name):
        p = out / name
        if not p.is_file():
            raise StageError("report", f"missing upstream artifact {p}")
        return p

    scored = read_csv(need("scored.csv"), "report")
    write_csv(plots / "sentiment_distributions.csv", ("id", "compound", "improved"),
              ((r["id"], float(r["compound"]), float(r["improved"])) for r in scored))
    written.append(plots / "sentiment_distributions.csv")

    dec = read_csv(need("decomposition.csv"), "report")
    for theme in sorted({r["theme"] for r in dec}):
        p = plots / f"decomposition_{theme}.csv"
        write_csv(p, ("week", "observed", "trend", "seasonal", "residual"),
                  ((int(r["week"]), _opt_float(r["observed"]), _opt_float(r["trend"]),
                    _opt_float(r["seasonal"]), _opt_float(r["residual"])) for r in dec if r["theme"] == theme))
        written.append(p)

    tr = read_json(need("trends.json"), "report")
    p = plots / "validated_trends.csv"
    write_csv(p, ("theme", "slope", "p_value", "r_squared", "direction", "significant", "confidence"),
              ((t["theme"], t["slope"], t["p_value"], t["r_squared"], t["direction"], t["significant"],
                t["confidence"]) for t in tr["trends"]))
    written.append(p)

    fc = read_csv(need("forecasts.csv"), "report")
    hist = read_csv(need("normalized_history.csv"), "report")
    p = plots / "normalized_forecasts.csv"
    write_csv(p, ("theme", "week", "kind", "pct_of_peak"),
              [(r["theme"], int(r["week"]), "history", _opt_float(r["pct_of_peak"])) for r in hist]
              + [(r["theme"], int(r["week"]), "forecast", _opt_float(r["pct_of_peak"])) for r in fc])
    written.append(p)

    net = read_json(need("causality.json"), "report")
    p = plots / "causal_network.csv"
    write_csv(p, ("source", "target", "strength", "min_p", "significant_lags", "bidirectional"),
              ((e["source"], e["target"], e["strength"], e["min_p"],
                " ".join(str(x) for x in e["significant_lags"]), e["bidirectional"]) for e in net["edges"]))
    written.append(p)

    heat = read_csv(need("platform_heatmap.csv"), "report")
    p = plots / "platform_heatmap.csv"
    write_csv(p, ("platform",) + themes.THEMES,
              ((r["platform"],) + tuple(_opt_float(r[t]) for t in themes.THEMES) for r in heat))
    written.append(p)

    brands = read_csv(need("brand_panel.csv"), "report")
    p = plots / "brand_boxplot.csv"
    write_csv(p, ("brand", "category", "score"), ((r["brand"], r["category"], float(r["score"])) for r in brands))
    written.append(p)

    cm = read_csv(need("confusion.csv"), "report")
    p = plots / "confusion_matrix.csv"
    cols = [c for c in cm[0] if c != "truth"] if cm else []
    write_csv(p, ("truth",) + tuple(cols), ((r["truth"],) + tuple(int(r[c]) for c in cols) for r in cm))
    written.append(p)
    return written


def stage_report(cfg: RunConfig, out: Path):
    emit_plot_data(out)
    summary = {
        "seed": cfg.seed,
        "rubric": cfg.rubric,
        "join": read_json(out / "join_summary.json", "report"),
        "theme_counts": {r["theme"]: int(r["count"]) for r in read_csv(out / "theme_counts.csv", "report")},
        "sentiment_distribution": read_json(out / "sentiment_distribution.json", "report"),
        "trends": read_json(out / "trends.json", "report"),
        "models": {t: m["label"] for t, m in read_json(out / "models.json", "report").items()},
        "causality": read_json(out / "causality.json", "report"),
        "classifier": read_json(out / "classify_report.json", "report"),
        "brands": read_json(out / "brand_summary.json", "report"),
    }
    write_json(out / "summary.json", summary)
    return summary


STAGE_FUNCS = {
    "ingest": stage_ingest,
    "themes": stage_themes,
    "sentiment": stage_sentiment,
    "series": stage_series,
    "decompose": stage_decompose,
    "trends": stage_trends,
    "forecast": stage_forecast,
    "causality": stage_causality,
    "classify": stage_classify,
    "panels": stage_panels,
    "report": stage_report,
}


def run_stage(name: str, cfg: RunConfig):
    out = Path(cfg.out)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise StageError(name, f"cannot create output directory {out}: {exc}") from exc
    log.info("running stage %s", name)
    try:
        return STAGE_FUNCS[name](cfg, out)
    except StageError:
        raise
    except FileNotFoundError as exc:
        raise StageError(name, str(exc)) from exc
    except (ValueError, KeyError) as exc:
        raise StageError(name, f"{type(exc).__name__}: {exc}") from exc


def run_pipeline(cfg: RunConfig) -> dict:
    results = {}
    for name in STAGES:
        if name in cfg.stages:
            results[name] = run_stage(name, cfg)
    return results


def with_overrides(cfg: RunConfig, **kw) -> RunConfig:
    return replace(cfg, **kw)
