from __future__ import annotations

import pytest

from recallkit.text import PIPELINE_EMBEDDING, PIPELINE_TFIDF, load_stopwords, tokenize


def test_default_stopwords_nonempty_and_cached():
    words = load_stopwords()
    assert "the" in words and "and" in words
    assert load_stopwords() is words


def test_stopword_file_comments_and_blanks(tmp_path):
    path = tmp_path / "stops.txt"
    path.write_text("# header\nfoo\n\nBAR\n")
    assert load_stopwords(path) == frozenset({"foo", "bar"})


def test_tfidf_pipeline_lowercases_and_drops_noise():
    tokens = tokenize("The QUICK fox, 42 times; gehen the", PIPELINE_TFIDF)
    assert tokens == ["quick", "fox", "times", "gehen"]


def test_embedding_pipeline_keeps_case_drops_digits():
    tokens = tokenize("The Quick fox 42!", PIPELINE_EMBEDDING)
    assert tokens == ["The", "Quick", "fox"]


def test_tfidf_pipeline_custom_stopwords():
    tokens = tokenize("alpha beta gamma", PIPELINE_TFIDF, stopwords=frozenset({"beta"}))
    assert tokens == ["alpha", "gamma"]


def test_unknown_pipeline_rejected():
    with pytest.raises(ValueError):
        tokenize("x", "stem")
