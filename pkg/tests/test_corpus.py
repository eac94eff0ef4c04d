from collections import Counter

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from semrerank.corpus import (
    Corpus,
    NormalizeConfig,
    default_stopwords,
    load_corpus,
    make_document,
    normalize_word,
    split_chunk,
    tokenize,
    words_of,
)
from semrerank.candidates import CandidateSet, CandidateTerm
from semrerank.errors import DataError
from semrerank.lemmatizer import lemmatize

CFG = NormalizeConfig()


def test_two_files_give_two_documents(tmp_path):
    (tmp_path / "alpha.txt").write_text("Gene expression in cells.")
    (tmp_path / "beta.txt").write_text("Protein binding.")
    c = load_corpus(tmp_path)
    assert [d.id for d in c.docs] == ["alpha", "beta"]


def test_tagged_line_maps_to_token(tmp_path):
    (tmp_path / "d.tsv").write_text("cells\tNNS\n\nbind\tVBP\n")
    c = load_corpus(tmp_path, "tagged")
    tok = c.docs[0].tokens[0]
    assert (tok.surface, tok.pos, tok.norm) == ("cells", "NNS", "cell")
    assert c.tagged


def test_malformed_tagged_line_reports_location(tmp_path):
    (tmp_path / "d.tsv").write_text("cells\tNNS\nbroken line\n")
    with pytest.raises(DataError, match=r"d.tsv:2"):
        load_corpus(tmp_path, "tagged")


@pytest.mark.parametrize("problem", ["missing", "file", "empty"])
def test_bad_corpus_paths(tmp_path, problem):
    target = tmp_path / "x"
    if problem == "file":
        target.write_text("hi")
    elif problem == "empty":
        target.mkdir()
    with pytest.raises(DataError):
        load_corpus(target)


def test_duplicate_ids_rejected():
    d = make_document("a", ["cell"], CFG)
    with pytest.raises(DataError, match="duplicate"):
        Corpus.from_documents([d, d], CFG)


@pytest.mark.parametrize("word,expected", [("the", None), ("%%%", None), ("Cells", "cell"), ("a", None), ("x1", "x1")])
def test_normalize_word(word, expected):
    assert normalize_word(word, CFG) == expected


def test_stopword_list_is_pinned():
    sw = default_stopwords()
    assert len(sw) == 182
    assert {"the", "of", "and"} <= sw


@pytest.mark.parametrize(
    "word,lemma",
    [
        ("cells", "cell"),
        ("analyses", "analysis"),
        ("studies", "study"),
        ("parsing", "parse"),
        ("changed", "change"),
        ("classes", "class"),
        ("boxes", "box"),
        ("species", "species"),
        ("status", "status"),
        ("running", "run"),
        ("edge-detections", "edge-detection"),
        ("children", "child"),
    ],
)
def test_lemmatizer_table(word, lemma):
    assert lemmatize(word) == lemma


def test_tokenizer_keeps_plus_and_inner_hyphen():
    assert tokenize("(CD45RA+ cells), edge-detection.") == ["(", "CD45RA+", "cells", "),", "edge-detection", "."]
    assert split_chunk("...") == ["..."]


def test_words_of_examples():
    t = CandidateTerm("acoustic edge-detection", ("acoustic", "edge-detection"), 1, {"d": 1})
    assert words_of(t) == {"acoustic", "edge-detection"}
    assert words_of("cell cell interaction") == {"cell", "interaction"}
    doc = make_document("d", ["t", "cell", "of", "cells"], CFG)
    assert words_of(doc) == {"cell"}


word_st = st.text(alphabet=st.characters(min_codepoint=33, max_codepoint=0x24F), min_size=1, max_size=14)


@settings(max_examples=400, deadline=None)
@given(word_st)
def test_normalize_is_idempotent(w):
    once = normalize_word(w, CFG)
    if once is not None:
        assert normalize_word(once, CFG) == once


@settings(max_examples=60, deadline=None)
@given(st.lists(st.lists(st.sampled_from(["cell", "gene", "binding", "the", "of"]), min_size=1, max_size=4), min_size=1, max_size=20, unique_by=tuple))
def test_words_of_union(term_words):
    terms = [CandidateTerm(" ".join(w), tuple(w), 1, {"d": 1}) for w in {tuple(x) for x in term_words}]
    cs = CandidateSet(terms)
    expected = set()
    for t in terms:
        expected |= words_of(t)
    assert words_of(cs) == expected


@settings(max_examples=40, deadline=None)
@given(st.lists(st.lists(st.sampled_from(["cells", "gene", "of", "Binding", "x", "protein", "."]), max_size=30), min_size=1, max_size=100))
def test_tf_df_match_naive_counter(docs):
    corpus = Corpus.from_documents([make_document(f"d{i}", w, CFG) for i, w in enumerate(docs)], CFG)
    tf, df = Counter(), Counter()
    for words in docs:
        seen = set()
        for w in words:
            n = normalize_word(w, CFG)
            if n is not None:
                tf[n] += 1
                seen.add(n)
        for n in seen:
            df[n] += 1
    assert corpus.tf == dict(tf)
    assert corpus.df == dict(df)
