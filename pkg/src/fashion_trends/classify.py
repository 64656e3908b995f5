"""TF-IDF features, class-weighted random forest and balanced evaluation."""

from __future__ import annotations

import json
import math
from collections import Counter
from dataclasses import dataclass, field

import numpy as np

from ._kernels import apply_tree, best_split

MODEL_FORMAT_VERSION = 1


# --------------------------------------------------------------------------
# TF-IDF
# --------------------------------------------------------------------------


def doc_terms(doc: str) -> list[str]:
    toks = doc.split()
    return toks + [f"{a} {b}" for a, b in zip(toks, toks[1:])]


@dataclass
class TfidfVocabulary:
    index: dict
    df: np.ndarray
    n_docs: int
    ngram_range: tuple = (1, 2)

    @property
    def idf(self) -> np.ndarray:
        return np.log((1.0 + self.n_docs) / (1.0 + self.df)) + 1.0

    def __len__(self):
        return len(self.index)


def fit_tfidf(docs, max_features: int | None = None) -> TfidfVocabulary:
    docs = list(docs)
    if not docs:
        raise ValueError("cannot fit TF-IDF on an empty corpus")
    df = Counter()
    for doc in docs:
        df.update(set(doc_terms(doc)))
    terms = sorted(df)
    if max_features is not None and len(terms) > max_features:
        terms = sorted(sorted(terms, key=lambda t: (-df[t], t))[:max_features])
    index = {t: i for i, t in enumerate(terms)}
    return TfidfVocabulary(index, np.array([df[t] for t in terms], dtype=float), len(docs))


def transform(vocab: TfidfVocabulary, doc: str) -> dict[int, float]:
    """Sparse L2-normalised TF-IDF vector as {feature index: weight}."""
    tf = Counter(t for t in doc_terms(doc) if t in vocab.index)
    if not tf:
        return {}
    idf = vocab.idf
    vec = {vocab.index[t]: n * idf[vocab.index[t]] for t, n in tf.items()}
    norm = math.sqrt(sum(v * v for v in vec.values()))
    return {i: v / norm for i, v in sorted(vec.items())}


def transform_matrix(vocab: TfidfVocabulary, docs) -> np.ndarray:
    docs = list(docs)
    X = np.zeros((len(docs), len(vocab)))
    for r, doc in enumerate(docs):
        for i, v in transform(vocab, doc).items():
            X[r, i] = v
    return X


# --------------------------------------------------------------------------
# cross-validation folds
# --------------------------------------------------------------------------


def stratified_kfold(labels, k: int = 5, seed: int = 0):
    """Shuffle each class and deal it round-robin into ``k`` folds."""
    labels = np.asarray(labels)
    counts = Counter(labels.tolist())
    small = sorted(c for c, n in counts.items() if n < k)
    if small:
        raise ValueError(f"classes with fewer than k={k} members: {small}")
    rng = np.random.default_rng(seed)
    fold_of = np.empty(len(labels), dtype=np.int64)
    start = 0
    for cls in sorted(counts):
        idx = rng.permutation(np.flatnonzero(labels == cls))
        fold_of[idx] = (start + np.arange(len(idx))) % k
        start = (start + len(idx)) % k
    folds = []
    for f in range(k):
        test = np.flatnonzero(fold_of == f)
        train = np.flatnonzero(fold_of != f)
        folds.append((train, test))
    return folds


# --------------------------------------------------------------------------
# random forest
# --------------------------------------------------------------------------


@dataclass
class Tree:
    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    value: np.ndarray  # per-node class distribution, rows sum to 1

    def apply(self, X) -> np.ndarray:
        return apply_tree(X, self.feature, self.threshold, self.left, self.right)

    def to_dict(self):
        return {
            "feature": self.feature.tolist(),
            "threshold": self.threshold.tolist(),
            "left": self.left.tolist(),
            "right": self.right.tolist(),
            "value": self.value.tolist(),
        }

    @classmethod
    def from_dict(cls, d):
        return cls(
            np.array(d["feature"], dtype=np.int64),
            np.array(d["threshold"], dtype=float),
            np.array(d["left"], dtype=np.int64),
            np.array(d["right"], dtype=np.int64),
            np.array(d["value"], dtype=float).reshape(len(d["feature"]), -1),
        )


@dataclass
class ForestModel:
    trees: list
    classes: tuple
    class_weights: dict
    seed: int
    n_features: int
    params: dict = field(default_factory=dict)

    def predict_proba(self, X) -> np.ndarray:
        X = np.ascontiguousarray(X, dtype=float)
        acc = np.zeros((X.shape[0], len(self.classes)))
        for tree in self.trees:
            acc += tree.value[tree.apply(X)]
        return acc / len(self.trees)

    def predict(self, X) -> list:
        proba = self.predict_proba(X)
        return [self.classes[i] for i in np.argmax(proba, axis=1)]

    def to_json(self) -> str:
        return json.dumps(
            {
                "format_version": MODEL_FORMAT_VERSION,
                "classes": list(self.classes),
                "class_weights": self.class_weights,
                "seed": self.seed,
                "n_features": self.n_features,
                "params": self.params,
                "trees": [t.to_dict() for t in self.trees],
            },
            sort_keys=True,
        )

    @classmethod
    def from_json(cls, text: str) -> "ForestModel":
        d = json.loads(text)
        if d.get("format_version") != MODEL_FORMAT_VERSION:
            raise ValueError(f"unsupported model format {d.get('format_version')!r}")
        return cls(
            [Tree.from_dict(t) for t in d["trees"]],
            tuple(d["classes"]),
            d["class_weights"],
            d["seed"],
            d["n_features"],
            d["params"],
        )


def balanced_class_weights(y, classes) -> dict:
    counts = Counter(y)
    n, k = len(y), len(classes)
    return {c: n / (k * counts[c]) for c in classes if counts[c]}


def _grow_tree(X, y, w, n_classes, rows, rng, mtry, max_depth, min_samples_split):
    n_features = X.shape[1]
    feature, threshold, left, right, value = [], [], [], [], []

    def new_node(node_rows):
        dist = np.bincount(y[node_rows], weights=w[node_rows], minlength=n_classes)
        feature.append(-1)
        threshold.append(0.0)
        left.append(-1)
        right.append(-1)
        value.append(dist / dist.sum())
        return len(feature) - 1

    stack = [(new_node(rows), rows, 0)]
    while stack:
        node, node_rows, depth = stack.pop()
        if (
            depth >= max_depth
            or len(node_rows) < min_samples_split
            or np.count_nonzero(value[node]) <= 1
        ):
            continue
        order = rng.permutation(n_features)
        f = -1
        for start in range(0, n_features, mtry):
            f, thr, _ = best_split(X, node_rows, order[start : start + mtry], y, w, n_classes)
            if f >= 0:
                break
        if f < 0:
            continue
        go_left = X[node_rows, f] <= thr
        lrows, rrows = node_rows[go_left], node_rows[~go_left]
        feature[node] = int(f)
        threshold[node] = float(thr)
        left[node] = new_node(lrows)
        right[node] = new_node(rrows)
        stack.append((right[node], rrows, depth + 1))
        stack.append((left[node], lrows, depth + 1))
    return Tree(
        np.array(feature, dtype=np.int64),
        np.array(threshold, dtype=float),
        np.array(left, dtype=np.int64),
        np.array(right, dtype=np.int64),
        np.array(value, dtype=float),
    )


def train_forest(
    X,
    y,
    class_weights="balanced",
    seed: int = 0,
    n_estimators: int = 100,
    max_depth: int = 30,
    min_samples_split: int = 5,
    max_features="sqrt",
    classes=None,
) -> ForestModel:
    """Bootstrap-aggregated Gini trees with per-class sample weights."""
    X = np.ascontiguousarray(X, dtype=float)
    y = list(y)
    if classes is None:
        classes = tuple(sorted(set(y)))
    classes = tuple(classes)
    if len(set(y)) < 2:
        raise ValueError("training labels contain a single class")
    if class_weights == "balanced":
        class_weights = balanced_class_weights(y, classes)
    elif class_weights is None:
        class_weights = {c: 1.0 for c in classes}
    code = {c: i for i, c in enumerate(classes)}
    yi = np.array([code[v] for v in y], dtype=np.int64)
    w = np.array([class_weights.get(v, 0.0) for v in y], dtype=float)
    n, n_features = X.shape
    if max_features == "sqrt":
        mtry = max(1, int(math.sqrt(n_features)))
    else:
        mtry = max(1, min(n_features, int(max_features)))

    trees = []
    for child in np.random.SeedSequence(seed).spawn(n_estimators):
        rng = np.random.default_rng(child)
        rows = np.sort(rng.integers(0, n, n))
        trees.append(_grow_tree(X, yi, w, len(classes), rows, rng, mtry, max_depth, min_samples_split))
    params = {
        "n_estimators": n_estimators,
        "max_depth": max_depth,
        "min_samples_split": min_samples_split,
        "max_features": mtry,
    }
    return ForestModel(trees, classes, {str(k): float(v) for k, v in class_weights.items()}, seed, n_features, params)


def predict(model: ForestModel, x):
    x = np.asarray(x, dtype=float)
    if x.ndim == 1:
        return model.predict(x[None, :])[0]
    return model.predict(x)


# --------------------------------------------------------------------------
# evaluation
# --------------------------------------------------------------------------


@dataclass
class EvalReport:
    classes: tuple
    confusion: np.ndarray
    precision: dict
    recall: dict
    f1: dict
    support: dict
    accuracy: float
    balanced_accuracy: float
    macro_f1: float

    def to_dict(self) -> dict:
        return {
            "classes": list(self.classes),
            "confusion": self.confusion.tolist(),
            "precision": self.precision,
            "recall": self.recall,
            "f1": self.f1,
            "support": self.support,
            "accuracy": self.accuracy,
            "balanced_accuracy": self.balanced_accuracy,
            "macro_f1": self.macro_f1,
        }


def balanced_accuracy(recalls) -> float:
    recalls = list(recalls)
    return sum(recalls) / len(recalls)


def evaluate(preds, truth, classes=("negative", "neutral", "positive")) -> EvalReport:
    preds, truth = list(preds), list(truth)
    if len(preds) != len(truth):
        raise ValueError(f"{len(preds)} predictions for {len(truth)} labels")
    if not truth:
        raise ValueError("nothing to evaluate")
    classes = tuple(classes)
    code = {c: i for i, c in enumerate(classes)}
    cm = np.zeros((len(classes), len(classes)), dtype=np.int64)
    for p, t in zip(preds, truth):
        cm[code[t], code[p]] += 1
    precision, recall, f1, support = {}, {}, {}, {}
    for c, i in code.items():
        tp = cm[i, i]
        col, row = cm[:, i].sum(), cm[i, :].sum()
        pr = tp / col if col else 0.0
        rc = tp / row if row else 0.0
        precision[c] = float(pr)
        recall[c] = float(rc)
        f1[c] = float(2 * pr * rc / (pr + rc)) if pr + rc else 0.0
        support[c] = int(row)
    present = [c for c in classes if support[c]]
    return EvalReport(
        classes=classes,
        confusion=cm,
        precision=precision,
        recall=recall,
        f1=f1,
        support=support,
        accuracy=float(np.trace(cm) / cm.sum()),
        balanced_accuracy=balanced_accuracy(recall[c] for c in present),
        macro_f1=sum(f1.values()) / len(classes),
    )


def cross_validate(docs, labels, k: int = 5, seed: int = 0, classes=("negative", "neutral", "positive"),
                   max_features: int | None = None, **forest_kwargs):
    """Pooled out-of-fold predictions; TF-IDF is refit inside every fold."""
    docs, labels = list(docs), list(labels)
    folds = stratified_kfold(labels, k, seed)
    oof = [None] * len(docs)
    fold_seeds = np.random.SeedSequence(seed).spawn(k)
    for (train, test), fs in zip(folds, fold_seeds):
        vocab = fit_tfidf([docs[i] for i in train], max_features)
        Xtr = transform_matrix(vocab, [docs[i] for i in train])
        Xte = transform_matrix(vocab, [docs[i] for i in test])
        fold_seed = int(fs.generate_state(1)[0])
        model = train_forest(Xtr, [labels[i] for i in train], seed=fold_seed, classes=classes, **forest_kwargs)
        for i, p in zip(test, model.predict(Xte)):
            oof[i] = p
    return evaluate(oof, labels, classes), oof, folds
