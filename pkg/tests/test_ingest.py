import re

import pytest
from hypothesis import given
from hypothesis import strategies as st

import oracles
from fashion_trends.ingest import (
    IngestError,
    RawText,
    SentimentTriple,
    clean_text,
    extract_hashtags,
    filter_fashion,
    load_keywords,
    load_t4sa,
    load_text_corpus,
    merge_by_id,
    tokens,
)


def _write(path, text):
    path.write_text(text, encoding="utf-8")
    return path


def _rec(rid, text, triple=(0.3, 0.3, 0.4)):
    recs, _ = merge_by_id([RawText(rid, text)], {rid: SentimentTriple(*triple)})
    return recs[0]


# ---- load_text_corpus ---------------------------------------------------


def test_corpus_rows_in_order(tmp_path):
    p = _write(tmp_path / "t.csv", 'id,text\n1,"hello"\n2,"world"\n')
    assert load_text_corpus(p) == [RawText("1", "hello"), RawText("2", "world")]


def test_corpus_duplicate_id_is_named(tmp_path):
    p = _write(tmp_path / "t.csv", "id,text\n7,a\n7,b\n")
    with pytest.raises(IngestError, match="'7'"):
        load_text_corpus(p)


def test_corpus_header_only_is_empty(tmp_path):
    assert load_text_corpus(_write(tmp_path / "t.csv", "id,text\n")) == []


def test_corpus_missing_column(tmp_path):
    with pytest.raises(IngestError, match="text"):
        load_text_corpus(_write(tmp_path / "t.csv", "id,body\n1,a\n"))


def test_corpus_missing_file(tmp_path):
    with pytest.raises(FileNotFoundError, match="nope.csv"):
        load_text_corpus(tmp_path / "nope.csv")


def test_corpus_quoted_fields_with_commas(tmp_path):
    p = _write(tmp_path / "t.csv", 'id,text\n1,"a, b and ""c"""\n')
    assert load_text_corpus(p)[0].text == 'a, b and "c"'


# ---- load_t4sa ----------------------------------------------------------


def test_t4sa_maps_columns(tmp_path):
    p = _write(tmp_path / "s.csv", "TWID,NEG,NEU,POS\n42,0.1,0.2,0.7\n")
    assert load_t4sa(p) == {"42": SentimentTriple(pos=0.7, neg=0.1, neu=0.2)}


def test_t4sa_range_error(tmp_path):
    p = _write(tmp_path / "s.csv", "TWID,NEG,NEU,POS\n1,1.5,0.0,0.0\n")
    with pytest.raises(IngestError, match="outside"):
        load_t4sa(p)


def test_t4sa_parse_error(tmp_path):
    p = _write(tmp_path / "s.csv", "TWID,NEG,NEU,POS\n1,0.1,0.2,abc\n")
    with pytest.raises(IngestError, match="non-numeric"):
        load_t4sa(p)


def test_t4sa_duplicate(tmp_path):
    p = _write(tmp_path / "s.csv", "TWID,NEG,NEU,POS\n1,0.1,0.2,0.7\n1,0.1,0.2,0.7\n")
    with pytest.raises(IngestError, match="duplicate"):
        load_t4sa(p)


def test_t4sa_simplex_tolerance():
    SentimentTriple(0.5, 0.2, 0.305)  # sum 1.005 accepted
    with pytest.raises(IngestError):
        SentimentTriple(0.5, 0.2, 0.4)


# ---- merge_by_id --------------------------------------------------------

T = SentimentTriple(0.2, 0.2, 0.6)


def test_merge_inner_join():
    texts = [RawText("a", "x"), RawText("b", "y"), RawText("c", "z")]
    recs, summary = merge_by_id(texts, {"a": T, "c": T})
    assert [r.id for r in recs] == ["a", "c"]
    assert (summary.kept, summary.dropped_texts, summary.dropped_scores) == (2, 1, 0)


def test_merge_disjoint():
    recs, summary = merge_by_id([RawText("a", "x")], {"b": T})
    assert recs == [] and summary.dropped_texts == 1 and summary.dropped_scores == 1


def test_merge_identical_sets():
    ids = [str(i) for i in range(25)]
    recs, _ = merge_by_id([RawText(i, "t") for i in ids], {i: T for i in ids})
    assert len(recs) == 25


@given(st.sets(st.integers(0, 40)), st.sets(st.integers(0, 40)))
def test_merge_is_intersection(a, b):
    recs, summary = merge_by_id([RawText(str(i), "t") for i in sorted(a)], {str(i): T for i in b})
    assert {r.id for r in recs} == {str(i) for i in a & b}
    assert summary.kept == len(a & b) <= min(len(a), len(b))


# ---- clean_text / extract_hashtags --------------------------------------


def test_clean_examples():
    assert clean_text("Check https://x.co @bob NEW Dress!!") == "check new dress"
    assert clean_text("#Vintage STYLE") == "#vintage style"
    assert clean_text("") == ""


def test_clean_whitespace_variants():
    assert clean_text("a\tb\nc  d") == "a b c d"
    assert clean_text("www.shop.com/x great") == "great"


@given(st.text())
def test_clean_idempotent_and_alphabet(s):
    c = clean_text(s)
    assert clean_text(c) == c
    assert re.fullmatch(r"[a-z0-9 #]*", c)
    assert "  " not in c and c == c.strip()


@given(st.text(alphabet=st.characters(codec="ascii")))
def test_clean_matches_oracle_on_ascii(s):
    assert clean_text(s) == oracles.clean(s)


HASHTAG_CASES = [
    "love #Fashion and #fashion week",
    "#boho#style",
    "no tags here",
    "#a",
    "# spaced",
    "end with #",
    "##double",
    "#under_score ok",
    "#MiXeD #mixed #MIXED",
    "mid#word tag",
    "#tag1,#tag2;#tag3",
    "#émigré chic",
    "#2023 trends",
    "@user #ootd http://x.co/#frag",
    "#one #two #three #one",
    "(#paren)",
    "#dash-ed",
    "#x#y#z",
    "tabs\t#tab",
    "#Ünïcode #unicode",
]


@pytest.mark.parametrize("raw", HASHTAG_CASES)
def test_hashtags_against_regex_oracle(raw):
    expected = []
    for t in re.findall(r"#(\w+)", raw):
        if t.lower() not in expected:
            expected.append(t.lower())
    assert extract_hashtags(raw) == expected


def test_hashtag_examples():
    assert extract_hashtags("love #Fashion and #fashion week") == ["fashion"]
    assert extract_hashtags("#boho#style") == ["boho", "style"]
    assert extract_hashtags("no tags here") == []


def test_tokens_split_on_hash():
    assert tokens("#boho#style look") == ["boho", "style", "look"]


# ---- filter_fashion -----------------------------------------------------


def test_filter_basic():
    recs = [_rec("1", "new dress day"), _rec("2", "stock market")]
    kept, frac = filter_fashion(recs, {"dress"})
    assert [r.id for r in kept] == ["1"] and frac == 0.5


@pytest.mark.parametrize("text,kw,expected", [
    ("hairstyle tips", "style", False),
    ("style tips", "style", True),
    ("#style tips", "style", True),
    ("#streetstyle now", "style", False),
    ("red carpet couture", "red carpet", True),
    ("carpet red", "red carpet", False),
])
def test_filter_whole_word_matches_tokenizer_oracle(text, kw, expected):
    kept, _ = filter_fashion([_rec("1", text)], {kw})
    assert bool(kept) is expected
    assert oracles.has_phrase(clean_text(text), kw) is expected


def test_hashtag_substring_flag():
    recs = [_rec("1", clean_text("love my #streetstyle"))]
    assert filter_fashion(recs, {"style"})[0] == []
    assert len(filter_fashion(recs, {"style"}, hashtag_substring=True)[0]) == 1


def test_filter_empty_keywords():
    with pytest.raises(IngestError):
        filter_fashion([], set())


words = st.sampled_from(["dress", "style", "shoes", "market", "news", "denim", "chic", "tips"])


@given(st.lists(st.lists(words, max_size=5), max_size=12), st.sets(words), st.sets(words))
def test_filter_monotone_in_keywords(docs, k1, k2):
    recs = [_rec(str(i), " ".join(d)) for i, d in enumerate(docs)]
    if not k1:
        return
    small = {r.id for r in filter_fashion(recs, k1)[0]}
    big = {r.id for r in filter_fashion(recs, k1 | k2)[0]}
    assert small <= big


def test_default_keyword_list():
    kws = load_keywords()
    assert len(kws) == 23
    assert {"fashion", "style", "outfit", "dress"} <= kws
