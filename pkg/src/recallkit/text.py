"""Tokenization and the two preprocessing pipelines.

Both pipelines split on Unicode whitespace and then filter characters per
token. The sparse pipeline lowercases, drops stop words and digit-only
tokens; the embedding pipeline keeps case and only drops digit-only tokens
and special characters.
"""
from __future__ import annotations

from importlib import resources
from pathlib import Path

PIPELINE_TFIDF = "tfidf"
PIPELINE_EMBEDDING = "embedding"

_DEFAULT_STOPWORDS: frozenset[str] | None = None


def load_stopwords(path: str | Path | None = None) -> frozenset[str]:
    """Load a stop word file: UTF-8, one token per line, ``#`` comments ignored.

    With no path, returns the bundled English list.
    """
    global _DEFAULT_STOPWORDS
    if path is None:
        if _DEFAULT_STOPWORDS is None:
            text = (
                resources.files("recallkit.data")
                .joinpath("stopwords_en.txt")
                .read_text(encoding="utf-8")
            )
            _DEFAULT_STOPWORDS = _parse_stopwords(text)
        return _DEFAULT_STOPWORDS
    return _parse_stopwords(Path(path).read_text(encoding="utf-8"))


def _parse_stopwords(text: str) -> frozenset[str]:
    words = set()
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        words.add(line.lower())
    return frozenset(words)


def _strip_special(token: str) -> str:
    return "".join(ch for ch in token if ch.isalnum())


def tokenize(text: str, pipeline: str, stopwords: frozenset[str] | None = None) -> list[str]:
    """Run one preprocessing pipeline over raw text, returning ordered tokens."""
    if pipeline == PIPELINE_TFIDF:
        if stopwords is None:
            stopwords = load_stopwords()
        out = []
        for raw in text.split():
            token = _strip_special(raw).lower()
            if not token or token.isdigit() or token in stopwords:
                continue
            out.append(token)
        return out
    if pipeline == PIPELINE_EMBEDDING:
        out = []
        for raw in text.split():
            token = _strip_special(raw)
            if not token or token.isdigit():
                continue
            out.append(token)
        return out
    raise ValueError(f"unknown pipeline: {pipeline!r}")
