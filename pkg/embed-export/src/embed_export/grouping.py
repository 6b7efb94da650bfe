"""Corpus reading and paragraph grouping.

Kept deliberately in sync with the retrieval engine's segmentation rules:
consecutive sentences are grouped three at a time (remainder kept as a
shorter final paragraph), paragraph ids are ``<doc_id>#<ordinal>``, and
embedders see at most the first 384 words of a paragraph.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Iterator

from .errors import ExportError

WORD_LIMIT = 384
GROUP_SIZE = 3


@dataclass(frozen=True)
class ParagraphText:
    para_id: str
    text: str

    @property
    def word_count(self) -> int:
        return len(self.text.split())

    @property
    def truncated(self) -> bool:
        return self.word_count > WORD_LIMIT

    def embedder_text(self) -> str:
        """What the model actually encodes: at most WORD_LIMIT words."""
        if not self.truncated:
            return self.text
        return " ".join(self.text.split()[:WORD_LIMIT])


def iter_documents(path: str | Path) -> Iterator[tuple[str, list[str]]]:
    """Yield (doc_id, sentences) from a jsonl corpus, aborting on bad records."""
    seen: set[str] = set()
    with open(path) as handle:
        for lineno, line in enumerate(handle, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ExportError(f"{path}:{lineno}: malformed JSON: {exc}") from exc
            if not isinstance(record, dict) or "id" not in record or "sentences" not in record:
                raise ExportError(f"{path}:{lineno}: record needs 'id' and 'sentences'")
            doc_id = record["id"]
            sentences = record["sentences"]
            if not isinstance(doc_id, str) or not doc_id:
                raise ExportError(f"{path}:{lineno}: 'id' must be a non-empty string")
            if doc_id in seen:
                raise ExportError(f"{path}:{lineno}: duplicate document id {doc_id!r}")
            if not isinstance(sentences, list) or not all(isinstance(s, str) for s in sentences):
                raise ExportError(f"{path}:{lineno}: 'sentences' must be a list of strings")
            seen.add(doc_id)
            yield doc_id, sentences


def paragraphs_of(doc_id: str, sentences: list[str]) -> list[ParagraphText]:
    out = []
    for ordinal, start in enumerate(range(0, len(sentences), GROUP_SIZE)):
        text = " ".join(sentences[start : start + GROUP_SIZE])
        out.append(ParagraphText(para_id=f"{doc_id}#{ordinal}", text=text))
    return out


def iter_paragraphs(path: str | Path) -> Iterator[ParagraphText]:
    for doc_id, sentences in iter_documents(path):
        yield from paragraphs_of(doc_id, sentences)
