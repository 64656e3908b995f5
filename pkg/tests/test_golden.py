"""Pipeline artifacts over the committed fixture against oracle-frozen golden values."""

import csv
import json

import numpy as np
import pytest

from conftest import GOLDEN


def rows(path):
    with path.open(newline="") as fh:
        return list(csv.DictReader(fh))


def test_record_count(bundle, golden):
    assert json.loads((bundle / "join_summary.json").read_text())["fashion_kept"] == golden["n_records"]


def test_theme_counts(bundle, golden):
    got = {r["theme"]: int(r["count"]) for r in rows(bundle / "theme_counts.csv")}
    assert got == golden["theme_counts"]


def test_hashtag_frequency(bundle, golden):
    got = [[r["tag"], int(r["count"])] for r in rows(bundle / "hashtag_frequency.csv")]
    assert got == golden["hashtag_frequency"]


def test_cooccurrence(bundle, golden):
    got = [[r["tag_a"], r["tag_b"], int(r["count"])] for r in rows(bundle / "cooccurrence.csv")]
    assert got == golden["cooccurrence"]


def test_hashtag_sentiment_ranking(bundle, golden):
    got = rows(bundle / "hashtag_sentiment.csv")
    for side in ("positive", "negative"):
        mine = [(r["tag"], float(r["mean_score"])) for r in got if r["list"] == side]
        want = golden["hashtag_sentiment"][side]
        assert [t for t, _ in mine] == [t for t, _ in want]
        assert np.allclose([v for _, v in mine], [v for _, v in want], atol=1e-12)


def test_sentiment_fractions(bundle, golden):
    got = json.loads((bundle / "sentiment_distribution.json").read_text())["improved"]
    for part in ("five_class", "three_class"):
        for k, v in golden["sentiment_improved"][part].items():
            assert got[part][k] == pytest.approx(v, abs=1e-12)


def test_weekly_series(bundle, golden):
    got = rows(bundle / "series.csv")
    for theme, want in golden["series"].items():
        mine = [r for r in got if r["theme"] == theme]
        assert [int(r["count"]) for r in mine] == want["counts"]
        for r, m in zip(mine, want["mean_sentiment"]):
            if m is None:
                assert r["mean_sentiment"] == ""
            else:
                assert float(r["mean_sentiment"]) == pytest.approx(m, abs=1e-12)


@pytest.mark.parametrize("name", ["network.dot", "theme_counts.csv", "cooccurrence.csv", "hashtag_frequency.csv"])
def test_snapshots(bundle, name):
    assert (bundle / name).read_text() == (GOLDEN / name).read_text()


def test_normalized_curve_recomputed_from_fit(bundle):
    hist = rows(bundle / "normalized_history.csv")
    fc = rows(bundle / "forecasts.csv")
    for theme in {r["theme"] for r in fc}:
        counts = np.array([float(r["count"]) for r in hist if r["theme"] == theme])
        mean = np.array([float(r["mean"]) for r in fc if r["theme"] == theme])
        pct = np.array([float(r["pct_of_peak"]) for r in fc if r["theme"] == theme])
        assert len(mean) == 12 and np.all(mean >= 0)
        assert np.allclose(pct, mean / counts.max() * 100, rtol=1e-12)
        hpct = np.array([float(r["pct_of_peak"]) for r in hist if r["theme"] == theme])
        assert hpct.max() == 100.0


def test_models_cover_every_theme(bundle):
    models = json.loads((bundle / "models.json").read_text())
    assert len(models) == 7
    assert models["seasonal"]["spec"]["s"] in (0, 13)
    for m in models.values():
        assert m["sigma2"] > 0 and m["aic"] == pytest.approx(2 * (m_k(m) + 1) - 2 * m["log_likelihood"])


def m_k(m):
    s = m["spec"]
    return s["p"] + s["q"] + s["P"] + s["Q"] + 1
