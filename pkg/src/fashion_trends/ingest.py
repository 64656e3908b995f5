"""Corpus loading, id join, text cleaning, hashtag extraction and filtering."""

from __future__ import annotations

import csv
import json
import re
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

SIMPLEX_LOW, SIMPLEX_HIGH = 0.99, 1.01

_URL = re.compile(r"(?:https?://|www\.)\S*", re.IGNORECASE)
_MENTION = re.compile(r"@\w+")
_DISALLOWED = re.compile(r"[^a-z0-9 #]")
_SPACE = re.compile(r"\s+")
_HASHTAG = re.compile(r"#(\w+)")


class IngestError(ValueError):
    """Malformed or inconsistent input table."""


@dataclass(frozen=True)
class RawText:
    id: str
    text: str


@dataclass(frozen=True)
class SentimentTriple:
    pos: float
    neg: float
    neu: float

    def __post_init__(self):
        for name in ("pos", "neg", "neu"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise IngestError(f"{name}={v!r} outside [0, 1]")
        total = self.pos + self.neg + self.neu
        if not SIMPLEX_LOW <= total <= SIMPLEX_HIGH:
            raise IngestError(f"pos+neg+neu={total!r} outside [{SIMPLEX_LOW}, {SIMPLEX_HIGH}]")


@dataclass
class MergedRecord:
    id: str
    raw_text: str
    clean_text: str
    hashtags: list[str]
    sentiment: SentimentTriple
    themes: frozenset[str] = field(default_factory=frozenset)
    week: int | None = None


@dataclass(frozen=True)
class JoinSummary:
    texts: int
    scores: int
    kept: int
    dropped_texts: int
    dropped_scores: int

    def to_json(self) -> str:
        return json.dumps(self.__dict__, indent=2, sort_keys=True) + "\n"


def _read_rows(path, required):
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"input file not found: {path}")
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        missing = [c for c in required if c not in header]
        if missing:
            raise IngestError(f"{path}: missing required column(s) {', '.join(missing)}")
        yield from reader


def load_text_corpus(path) -> list[RawText]:
    out = []
    seen = set()
    for row in _read_rows(path, ("id", "text")):
        rid = (row["id"] or "").strip()
        if not rid:
            raise IngestError(f"{path}: empty id")
        if rid in seen:
            raise IngestError(f"duplicate id {rid!r}")
        seen.add(rid)
        out.append(RawText(rid, row["text"] or ""))
    return out


def load_t4sa(path) -> dict[str, SentimentTriple]:
    out: dict[str, SentimentTriple] = {}
    for row in _read_rows(path, ("TWID", "NEG", "NEU", "POS")):
        rid = (row["TWID"] or "").strip()
        if rid in out:
            raise IngestError(f"duplicate TWID {rid!r}")
        vals = {}
        for col in ("NEG", "NEU", "POS"):
            try:
                vals[col] = float(row[col])
            except (TypeError, ValueError):
                raise IngestError(f"TWID {rid}: non-numeric {col}={row[col]!r}") from None
            if not 0.0 <= vals[col] <= 1.0:
                raise IngestError(f"TWID {rid}: {col}={vals[col]!r} outside [0, 1]")
        out[rid] = SentimentTriple(pos=vals["POS"], neg=vals["NEG"], neu=vals["NEU"])
    return out


def clean_text(raw: str) -> str:
    s = _URL.sub(" ", raw)
    s = _MENTION.sub(" ", s)
    s = _SPACE.sub(" ", s.lower())
    s = _DISALLOWED.sub("", s)
    return _SPACE.sub(" ", s).strip()


def extract_hashtags(raw: str) -> list[str]:
    tags = []
    for m in _HASHTAG.finditer(raw):
        tag = m.group(1).lower()
        if tag not in tags:
            tags.append(tag)
    return tags


def merge_by_id(texts, scores) -> tuple[list[MergedRecord], JoinSummary]:
    """Inner join of text rows with sentiment triples, in text order."""
    merged = []
    for rt in texts:
        triple = scores.get(rt.id)
        if triple is None:
            continue
        merged.append(
            MergedRecord(
                id=rt.id,
                raw_text=rt.text,
                clean_text=clean_text(rt.text),
                hashtags=extract_hashtags(rt.text),
                sentiment=triple,
            )
        )
    summary = JoinSummary(
        texts=len(texts),
        scores=len(scores),
        kept=len(merged),
        dropped_texts=len(texts) - len(merged),
        dropped_scores=len(scores) - len(merged),
    )
    return merged, summary


_TOKEN_SPLIT = re.compile(r"[\s#]+")


def tokens(text: str) -> list[str]:
    """Words of a cleaned text; '#' acts as a separator."""
    return [t for t in _TOKEN_SPLIT.split(text) if t]


def _phrase_in(phrase, toks, start_index):
    first = phrase[0]
    for i in start_index.get(first, ()):
        if toks[i : i + len(phrase)] == phrase:
            return True
    return False


def match_keywords(text: str, keywords, hashtag_substring: bool = False) -> set[str]:
    """Keywords occurring in ``text`` as whole tokens (or token sequences).

    With ``hashtag_substring`` a keyword also matches when it is a substring
    of a hashtag token.
    """
    toks = tokens(text)
    start_index: dict[str, list[int]] = {}
    for i, t in enumerate(toks):
        start_index.setdefault(t, []).append(i)
    tags = re.findall(r"#(\w+)", text) if hashtag_substring else ()
    hits = set()
    for kw in keywords:
        phrase = kw.split()
        if not phrase:
            continue
        if len(phrase) == 1 and phrase[0] in start_index:
            hits.add(kw)
        elif len(phrase) > 1 and _phrase_in(phrase, toks, start_index):
            hits.add(kw)
        elif hashtag_substring and any(kw in tag for tag in tags):
            hits.add(kw)
    return hits


def filter_fashion(records, keywords, hashtag_substring: bool = False):
    """Records whose clean text contains any keyword; returns (kept, fraction)."""
    keywords = {k.strip().lower() for k in keywords if k.strip()}
    if not keywords:
        raise IngestError("keyword set is empty")
    kept = [r for r in records if match_keywords(r.clean_text, keywords, hashtag_substring)]
    fraction = len(kept) / len(records) if records else 0.0
    return kept, fraction


def load_keywords(path=None) -> set[str]:
    """One keyword per line; blank lines and '#' comments skipped."""
    if path is None:
        text = resources.files("fashion_trends").joinpath("data/keywords.txt").read_text("utf-8")
    else:
        text = Path(path).read_text("utf-8")
    out = set()
    for line in text.splitlines():
        line = line.strip().lower()
        if line and not line.startswith("#"):
            out.add(line)
    return out
