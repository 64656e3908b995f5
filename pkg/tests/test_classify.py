from collections import Counter

import numpy as np
import pytest

import oracles
from corpora import separable_corpus
from fashion_trends.classify import (
    ForestModel,
    balanced_accuracy,
    balanced_class_weights,
    cross_validate,
    evaluate,
    fit_tfidf,
    predict,
    stratified_kfold,
    train_forest,
    transform,
    transform_matrix,
)

CLASSES = ("negative", "neutral", "positive")


def test_tfidf_single_doc():
    v = fit_tfidf(["a b"])
    assert set(v.index) == {"a", "b", "a b"} and v.df.tolist() == [1, 1, 1]


def test_idf_of_ubiquitous_term():
    v = fit_tfidf(["x a", "x b", "x c"])
    assert v.idf[v.index["x"]] == pytest.approx(1.0)


def test_tfidf_matches_hand_computation():
    docs = ["red dress red", "blue dress", "red shoes and blue dress", "shoes"]
    v = fit_tfidf(docs)
    idf, vecs = oracles.tfidf_by_hand(docs)
    for term, i in v.index.items():
        assert v.idf[i] == pytest.approx(idf[term], rel=1e-12)
    for doc, want in zip(docs, vecs):
        got = {t: transform(v, doc).get(i, 0.0) for t, i in v.index.items()}
        for t in v.index:
            assert got[t] == pytest.approx(want.get(t, 0.0), abs=1e-12)


def test_unit_norm_and_unseen_terms():
    v = fit_tfidf(["new dress day", "old shoes"])
    for doc in ["new dress", "shoes shoes unknown", "day"]:
        vec = transform(v, doc)
        assert np.sqrt(sum(x * x for x in vec.values())) == pytest.approx(1.0)
    assert transform(v, "totally unseen") == {} and transform(v, "") == {}


def test_max_features_keeps_most_frequent():
    v = fit_tfidf(["a b", "a c", "a d"], max_features=1)
    assert list(v.index) == ["a"]


def test_empty_corpus():
    with pytest.raises(ValueError):
        fit_tfidf([])


def test_kfold_exact_divisibility():
    labels = ["A"] * 10 + ["B"] * 5
    folds = stratified_kfold(labels, 5, seed=1)
    for _, test in folds:
        c = Counter(labels[i] for i in test)
        assert c == {"A": 2, "B": 1}


def test_kfold_deterministic_and_partition():
    labels = ["A"] * 7 + ["B"] * 5
    a, b = stratified_kfold(labels, 5, 3), stratified_kfold(labels, 5, 3)
    assert all((x[1] == y[1]).all() for x, y in zip(a, b))
    tests = np.concatenate([t for _, t in a])
    assert sorted(tests.tolist()) == list(range(12))
    for cls in "AB":
        per_fold = [sum(labels[i] == cls for i in t) for _, t in a]
        assert max(per_fold) - min(per_fold) <= 1
    for train, test in a:
        assert not set(train) & set(test)


def test_kfold_small_class():
    with pytest.raises(ValueError, match="fewer than"):
        stratified_kfold(["A"] * 10 + ["B"] * 3, 5, 0)


def test_forest_separable_training_accuracy():
    rng = np.random.default_rng(4)
    X = rng.uniform(-1, 1, (200, 2))
    y = ["positive" if a + b > 0 else "negative" for a, b in X]
    model = train_forest(X, y, seed=1)
    acc = np.mean(np.array(model.predict(X)) == np.array(y))
    assert acc >= 0.99 and len(model.trees) == 100
    for t in model.trees:
        assert np.allclose(t.value.sum(axis=1), 1.0)


def test_forest_constant_features_predict_weighted_majority():
    X = np.ones((30, 4))
    y = ["neutral"] * 20 + ["positive"] * 10
    model = train_forest(X, y, class_weights=None, seed=0, n_estimators=10)
    assert set(model.predict(X)) == {"neutral"}
    weights = balanced_class_weights(y, ("neutral", "positive"))
    assert weights == {"neutral": 30 / 40, "positive": 30 / 20}


def test_forest_deterministic_and_round_trip():
    docs, labels = separable_corpus(120, seed=2)
    v = fit_tfidf(docs)
    X = transform_matrix(v, docs)
    a = train_forest(X, labels, seed=5, n_estimators=20)
    b = train_forest(X, labels, seed=5, n_estimators=20)
    probe = X[:30]
    assert a.predict(probe) == b.predict(probe)
    c = ForestModel.from_json(a.to_json())
    assert np.array_equal(c.predict_proba(probe), a.predict_proba(probe))
    assert predict(a, X[0]) == a.predict(X[:1])[0]


def test_forest_single_class_rejected():
    with pytest.raises(ValueError):
        train_forest(np.ones((5, 2)), ["a"] * 5)


def test_empty_doc_gets_prior_prediction():
    docs, labels = separable_corpus(100, seed=3)
    v = fit_tfidf(docs)
    model = train_forest(transform_matrix(v, docs), labels, seed=0, n_estimators=10)
    assert model.predict(transform_matrix(v, [""]))[0] in CLASSES


def test_balanced_accuracy_from_recalls():
    assert balanced_accuracy([0.53, 0.97, 0.85]) == pytest.approx(0.7833, abs=5e-4)


def test_perfect_predictions():
    truth = ["negative", "neutral", "positive", "neutral"]
    r = evaluate(truth, truth)
    assert r.accuracy == r.balanced_accuracy == r.macro_f1 == 1.0
    assert np.array_equal(r.confusion, np.diag([1, 2, 1]))


def test_single_class_predictor():
    truth = ["negative"] * 3 + ["neutral"] * 5 + ["positive"] * 2
    r = evaluate(["neutral"] * 10, truth)
    assert r.balanced_accuracy == pytest.approx(1 / 3)
    assert r.confusion.sum(axis=1).tolist() == [3, 5, 2]


def test_length_mismatch():
    with pytest.raises(ValueError):
        evaluate(["neutral"], [])


def test_f1_identity_and_duplication_invariance():
    rng = np.random.default_rng(0)
    truth = list(rng.choice(CLASSES, 60))
    preds = list(rng.choice(CLASSES, 60))
    r = evaluate(preds, truth)
    for c in CLASSES:
        p, rc = r.precision[c], r.recall[c]
        assert r.f1[c] == pytest.approx(2 * p * rc / (p + rc) if p + rc else 0.0)
    assert r.macro_f1 == pytest.approx(np.mean([r.f1[c] for c in CLASSES]))
    dup_t, dup_p = list(truth), list(preds)
    for t, p in zip(truth, preds):
        if t == "positive":
            dup_t += [t] * 3
            dup_p += [p] * 3
    assert evaluate(dup_p, dup_t).balanced_accuracy == pytest.approx(r.balanced_accuracy)


def test_cross_validate_small():
    docs, labels = separable_corpus(150, priors=(0.2, 0.5, 0.3), seed=9)
    report, oof, folds = cross_validate(docs, labels, k=5, seed=1, n_estimators=25)
    assert report.balanced_accuracy >= 0.9
    assert None not in oof and len(folds) == 5
