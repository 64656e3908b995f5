import datetime as dt

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

import oracles
from fashion_trends.chronos import (
    N_WEEKS,
    PERIOD,
    assign_synthetic_timestamps,
    build_weekly_series,
    calendar,
    centered_moving_average,
    decompose_additive,
    default_fashion_weights,
    week_of,
)
from fashion_trends.ingest import MergedRecord, SentimentTriple
from fashion_trends.sentiment import CompoundScores

T = SentimentTriple(0.3, 0.3, 0.4)


def recs(n, themes=("vintage",)):
    return [MergedRecord(str(i), "", "", [], T, frozenset(themes)) for i in range(n)]


def test_calendar_table_matches_iso_rule():
    cal = calendar()
    assert len(cal) == N_WEEKS
    for wk, (i, monday, thursday) in zip(cal, oracles.iso_weeks()):
        assert (wk.index, wk.monday, wk.thursday) == (i, monday, thursday)
        assert wk.sunday == monday + dt.timedelta(days=6)
    assert (cal[0].iso_year, cal[0].iso_week) == (2022, 1)
    assert (cal[-1].iso_year, cal[-1].iso_week) == (2023, 52)


def test_weights_examples():
    w = default_fashion_weights()
    assert w[week_of(dt.date(2022, 2, 15))] == 1.8
    assert w[week_of(dt.date(2022, 7, 1))] == 1.0
    assert w[week_of(dt.date(2022, 12, 10))] == 1.5
    np.testing.assert_array_equal(w, oracles.fashion_weights())
    assert (w > 0).all()


def test_uniform_assignment_concentrates():
    r = assign_synthetic_timestamps(recs(10_000), np.ones(N_WEEKS), seed=1)
    counts = np.bincount([x.week for x in r], minlength=N_WEEKS)
    mean = 10_000 / N_WEEKS
    sigma = np.sqrt(10_000 * (1 / N_WEEKS) * (1 - 1 / N_WEEKS))
    assert np.all(np.abs(counts - mean) <= 4 * sigma)


def test_degenerate_weights():
    w = np.full(N_WEEKS, 1e-12)
    w[0] = 1.0
    r = assign_synthetic_timestamps(recs(1000), w, seed=3)
    assert sum(x.week == 0 for x in r) >= 990


def test_seed_sensitivity_and_reproducibility():
    w = default_fashion_weights()
    a = [x.week for x in assign_synthetic_timestamps(recs(200), w, 1)]
    b = [x.week for x in assign_synthetic_timestamps(recs(200), w, 1)]
    c = [x.week for x in assign_synthetic_timestamps(recs(200), w, 2)]
    assert a == b and a != c


def test_invalid_weights():
    with pytest.raises(ValueError):
        assign_synthetic_timestamps(recs(3), np.zeros(N_WEEKS), 1)


def test_weekly_series_examples():
    rs = recs(2, themes=("a",))
    for r in rs:
        r.week = 3
    scores = {"0": CompoundScores(0.0, 0.2, "neutral", "positive"),
              "1": CompoundScores(0.0, 0.4, "neutral", "positive")}
    s = build_weekly_series(rs, scores, "a")
    assert s.counts[3] == 2 and s.mean_sentiment[3] == pytest.approx(0.3)
    assert s.counts.sum() == 2 and np.isnan(s.mean_sentiment[np.arange(N_WEEKS) != 3]).all()
    empty = build_weekly_series(rs, scores, "b")
    assert empty.counts.sum() == 0 and np.isnan(empty.mean_sentiment).all()


def test_decompose_constant():
    d = decompose_additive(np.full(N_WEEKS, 5.0))
    ok = ~np.isnan(d.trend)
    assert np.allclose(d.trend[ok], 5) and np.allclose(d.seasonal, 0, atol=1e-12)
    assert np.allclose(d.residual[ok], 0, atol=1e-12)
    assert ok.sum() == N_WEEKS - 12 and np.isnan(d.trend[:6]).all() and np.isnan(d.trend[-6:]).all()


def test_decompose_line():
    t = np.arange(N_WEEKS, dtype=float)
    d = decompose_additive(t)
    ok = ~np.isnan(d.trend)
    assert np.abs(d.trend[ok] - t[ok]).max() < 1e-9
    assert np.abs(d.seasonal).max() < 1e-9 and np.abs(d.residual[ok]).max() < 1e-9


def test_decompose_sinusoid_recovered():
    t = np.arange(N_WEEKS)
    s = 2 * np.sin(2 * np.pi * t / 13)
    d = decompose_additive(3 + 0.1 * t + s)
    ok = ~np.isnan(d.trend)
    assert np.corrcoef(d.seasonal[ok], s[ok])[0, 1] > 0.99


def test_moving_average_matches_loop():
    y = np.random.default_rng(0).normal(size=40)
    got = centered_moving_average(y, 13)
    want = oracles.centered_ma_loop(list(y), 13)
    for g, w in zip(got, want):
        assert (np.isnan(g) and w is None) or abs(g - w) < 1e-12


def test_even_period_supported():
    d = decompose_additive(np.arange(48, dtype=float), period=12)
    assert np.isnan(d.trend[:6]).all() and np.isnan(d.trend[-6:]).all()
    assert np.allclose(d.trend[6:-6], np.arange(6, 42))


def test_decompose_too_short():
    with pytest.raises(ValueError):
        decompose_additive(np.ones(25))


@settings(max_examples=100, deadline=None)
@given(arrays(np.float64, N_WEEKS, elements=st.floats(-1e3, 1e3)))
def test_recomposition_and_periodicity(y):
    d = decompose_additive(y)
    ok = ~np.isnan(d.trend)
    assert np.abs(d.trend[ok] + d.seasonal[ok] + d.residual[ok] - y[ok]).max() <= 1e-9 * max(1, np.abs(y).max())
    assert np.allclose(d.seasonal[PERIOD:], d.seasonal[:-PERIOD], atol=0)
    for start in range(0, N_WEEKS - PERIOD + 1, 7):
        assert abs(d.seasonal[start : start + PERIOD].sum()) < 1e-6
