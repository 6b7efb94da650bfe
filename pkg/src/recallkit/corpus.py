"""Corpus ingestion, paragraph segmentation, and topic sampling.

Documents arrive either as newswire-style XML (sentences in ``<p>`` elements,
topic codes in ``bip:topics`` code lists) or as one JSON object per line:
``{"id": str, "topics": [str], "parent_topics": [str]?, "sentences": [str]}``.
"""
from __future__ import annotations

import json
import logging
import random
import xml.etree.ElementTree as ET
from dataclasses import dataclass, field
from pathlib import Path
from typing import IO, Iterable, Iterator

from .errors import IngestError, SamplingError, UnknownIdError

log = logging.getLogger(__name__)

# Mean-pooled sentence embedders truncate beyond this many words.
EMBED_WORD_LIMIT = 384

FORMAT_XML = "rcv1-xml"
FORMAT_JSONL = "jsonl"


@dataclass(frozen=True)
class Document:
    doc_id: str
    topics: frozenset[str]
    sentences: tuple[str, ...]
    parent_topics: frozenset[str] = frozenset()


@dataclass(frozen=True)
class Paragraph:
    para_id: str
    parent_id: str
    ordinal: int
    text: str
    word_count: int

    @property
    def truncated(self) -> bool:
        return self.word_count > EMBED_WORD_LIMIT

    def embedding_text(self, limit: int = EMBED_WORD_LIMIT) -> str:
        """Text as seen by an embedder: truncated to the first `limit` words."""
        if self.word_count <= limit:
            return self.text
        return " ".join(self.text.split()[:limit])


def parent_of(unit_id: str) -> str:
    """Parent document of a unit id (paragraph ids are ``<doc_id>#<ordinal>``)."""
    return unit_id.rsplit("#", 1)[0]


def build_paragraphs(doc: Document, group_size: int = 3) -> list[Paragraph]:
    """Group consecutive sentences into paragraphs; the remainder stays separate."""
    if group_size < 1:
        raise ValueError("group_size must be >= 1")
    if not doc.sentences:
        log.warning("document %s has no sentences; no paragraphs built", doc.doc_id)
        return []
    paragraphs = []
    for ordinal, start in enumerate(range(0, len(doc.sentences), group_size)):
        text = " ".join(doc.sentences[start : start + group_size])
        para = Paragraph(
            para_id=f"{doc.doc_id}#{ordinal}",
            parent_id=doc.doc_id,
            ordinal=ordinal,
            text=text,
            word_count=len(text.split()),
        )
        if para.truncated:
            log.warning(
                "paragraph %s has %d words; embedders see the first %d",
                para.para_id, para.word_count, EMBED_WORD_LIMIT,
            )
        paragraphs.append(para)
    return paragraphs


class CorpusStore:
    """Immutable collection of documents with topic lookups."""

    def __init__(self, documents: Iterable[Document]):
        self._docs: dict[str, Document] = {}
        self._by_topic: dict[str, list[str]] = {}
        self._topic_parents: dict[str, set[str]] = {}
        for doc in documents:
            if doc.doc_id in self._docs:
                raise IngestError(f"duplicate document id {doc.doc_id!r}")
            if "#" in doc.doc_id:
                raise IngestError(
                    f"document id {doc.doc_id!r} contains '#', reserved for paragraph ids"
                )
            self._docs[doc.doc_id] = doc
            for topic in doc.topics:
                self._by_topic.setdefault(topic, []).append(doc.doc_id)
                self._topic_parents.setdefault(topic, set()).update(doc.parent_topics)
        for ids in self._by_topic.values():
            ids.sort()

    def __len__(self) -> int:
        return len(self._docs)

    def __contains__(self, doc_id: str) -> bool:
        return doc_id in self._docs

    def doc_ids(self) -> list[str]:
        return list(self._docs)

    def get(self, doc_id: str) -> Document:
        try:
            return self._docs[doc_id]
        except KeyError:
            raise UnknownIdError(f"unknown document id {doc_id!r}") from None

    def documents(self) -> Iterator[Document]:
        return iter(self._docs.values())

    def topics(self) -> list[str]:
        return sorted(self._by_topic)

    def topic_docs(self, topic: str) -> list[str]:
        return list(self._by_topic.get(topic, []))

    def topic_parents(self, topic: str) -> frozenset[str]:
        return frozenset(self._topic_parents.get(topic, ()))

    def children_of(self, parent_topic: str) -> list[str]:
        return sorted(
            t for t, parents in self._topic_parents.items() if parent_topic in parents
        )

    def paragraphs(self, group_size: int = 3) -> Iterator[Paragraph]:
        for doc in self._docs.values():
            yield from build_paragraphs(doc, group_size)

    def save_jsonl(self, path: str | Path) -> None:
        with open(path, "w", encoding="utf-8") as handle:
            for doc in self._docs.values():
                record = {
                    "id": doc.doc_id,
                    "topics": sorted(doc.topics),
                    "sentences": list(doc.sentences),
                }
                if doc.parent_topics:
                    record["parent_topics"] = sorted(doc.parent_topics)
                handle.write(json.dumps(record, ensure_ascii=False) + "\n")


def ingest_corpus(source: str | Path | IO[str], format: str = FORMAT_JSONL) -> CorpusStore:
    """Parse a corpus source into a store, aborting on the first bad record."""
    if format == FORMAT_JSONL:
        return CorpusStore(_iter_jsonl(source))
    if format == FORMAT_XML:
        return CorpusStore(_iter_xml(source))
    raise ValueError(f"unknown corpus format: {format!r}")


def _iter_jsonl(source: str | Path | IO[str]) -> Iterator[Document]:
    if hasattr(source, "read"):
        yield from _parse_jsonl_lines(source, "<stream>")
        return
    path = Path(source)
    with open(path, encoding="utf-8") as handle:
        yield from _parse_jsonl_lines(handle, str(path))


def _parse_jsonl_lines(handle: IO[str], name: str) -> Iterator[Document]:
    for lineno, line in enumerate(handle, start=1):
        line = line.strip()
        if not line:
            continue
        try:
            record = json.loads(line)
            doc = Document(
                doc_id=str(record["id"]),
                topics=frozenset(str(t) for t in record.get("topics", [])),
                parent_topics=frozenset(str(t) for t in record.get("parent_topics", [])),
                sentences=tuple(str(s) for s in record["sentences"]),
            )
        except (json.JSONDecodeError, KeyError, TypeError) as exc:
            raise IngestError(f"{name}:{lineno}: malformed record: {exc}") from exc
        yield doc


def _iter_xml(source: str | Path | IO[str]) -> Iterator[Document]:
    if hasattr(source, "read"):
        yield from _parse_xml_text(source.read(), "<stream>")
        return
    path = Path(source)
    if path.is_dir():
        for file in sorted(path.glob("*.xml")):
            yield from _parse_xml_text(file.read_text(encoding="utf-8"), str(file))
    else:
        yield from _parse_xml_text(path.read_text(encoding="utf-8"), str(path))


def _parse_xml_text(text: str, name: str) -> Iterator[Document]:
    # Files may hold one <newsitem> or several; wrap so both parse.
    try:
        root = ET.fromstring(f"<corpus>{text}</corpus>")
    except ET.ParseError:
        try:
            root = ET.fromstring(text)
        except ET.ParseError as exc:
            raise IngestError(f"{name}: malformed XML: {exc}") from exc
    items = root.iter("newsitem") if root.tag != "newsitem" else [root]
    found = False
    for item in items:
        found = True
        doc_id = item.get("itemid")
        if not doc_id:
            raise IngestError(f"{name}: <newsitem> without itemid attribute")
        sentences = tuple(
            "".join(p.itertext()).strip() for p in item.iter("p") if "".join(p.itertext()).strip()
        )
        topics = frozenset(
            code.get("code", "")
            for codes in item.iter("codes")
            if (codes.get("class") or "").endswith("topics:1.0")
            for code in codes.iter("code")
            if code.get("code")
        )
        yield Document(doc_id=doc_id, topics=topics, sentences=sentences)
    if not found:
        raise IngestError(f"{name}: no <newsitem> elements found")


@dataclass
class SplitAssignment:
    split_name: str
    topics: dict[str, list[str]] = field(default_factory=dict)
    seed: int = 0

    def doc_ids(self) -> list[str]:
        seen: dict[str, None] = {}
        for ids in self.topics.values():
            for doc_id in ids:
                seen[doc_id] = None
        return list(seen)

    def to_json(self) -> str:
        payload = {
            "split_name": self.split_name,
            "seed": self.seed,
            "topics": {t: self.topics[t] for t in sorted(self.topics)},
        }
        return json.dumps(payload, sort_keys=True, ensure_ascii=False)

    @classmethod
    def from_json(cls, text: str) -> "SplitAssignment":
        payload = json.loads(text)
        return cls(
            split_name=payload["split_name"],
            topics={t: list(ids) for t, ids in payload["topics"].items()},
            seed=int(payload["seed"]),
        )


def save_splits(splits: dict[str, SplitAssignment], path: str | Path) -> None:
    payload = {name: json.loads(split.to_json()) for name, split in sorted(splits.items())}
    Path(path).write_text(json.dumps(payload, sort_keys=True, indent=2) + "\n", encoding="utf-8")


def load_splits(path: str | Path) -> dict[str, SplitAssignment]:
    payload = json.loads(Path(path).read_text(encoding="utf-8"))
    return {
        name: SplitAssignment(
            split_name=entry["split_name"],
            topics={t: list(ids) for t, ids in entry["topics"].items()},
            seed=int(entry["seed"]),
        )
        for name, entry in payload.items()
    }


def sample_splits(
    store: CorpusStore,
    per_topic: int = 300,
    seed: int = 0,
    unrelated_topics: int = 15,
    ambiguous_parent: str | None = None,
    ambiguous_children: int = 4,
    topic_selection: dict[str, list[str]] | None = None,
    allow_short: bool = False,
) -> dict[str, SplitAssignment]:
    """Sample per-topic document sets into train/validation/test (+ ambiguous) splits.

    Topic membership per split may be pinned via `topic_selection`
    ({split_name: [topic, ...]}); otherwise eligible topics are chosen by a
    seeded shuffle and split evenly. Deterministic under (store, seed, config).
    """
    rng = random.Random(seed)
    splits: dict[str, SplitAssignment] = {}

    if topic_selection is None:
        ambiguous_set = set(store.children_of(ambiguous_parent)) if ambiguous_parent else set()
        eligible = [t for t in store.topics() if t not in ambiguous_set]
        if ambiguous_parent:
            eligible = [t for t in eligible if t != ambiguous_parent]
        if not allow_short:
            eligible = [t for t in eligible if len(store.topic_docs(t)) >= per_topic]
        if len(eligible) < unrelated_topics:
            raise SamplingError(
                f"need {unrelated_topics} eligible topics with >= {per_topic} documents, "
                f"found {len(eligible)}"
            )
        rng.shuffle(eligible)
        chosen = eligible[:unrelated_topics]
        third = unrelated_topics // 3
        topic_selection = {
            "train": sorted(chosen[:third]),
            "validation": sorted(chosen[third : 2 * third]),
            "test": sorted(chosen[2 * third : unrelated_topics]),
        }
        if ambiguous_parent:
            children = store.children_of(ambiguous_parent)
            if len(children) < ambiguous_children:
                raise SamplingError(
                    f"need {ambiguous_children} child topics of {ambiguous_parent!r}, "
                    f"found {len(children)}"
                )
            rng.shuffle(children)
            topic_selection["ambiguous"] = sorted(children[:ambiguous_children])

    for split_name, topics in topic_selection.items():
        assignment = SplitAssignment(split_name=split_name, seed=seed)
        for topic in topics:
            ids = store.topic_docs(topic)
            if not ids:
                raise SamplingError(f"topic {topic!r} has no documents")
            if len(ids) < per_topic:
                if not allow_short:
                    raise SamplingError(
                        f"topic {topic!r} has {len(ids)} documents, need {per_topic}"
                    )
                sampled = list(ids)
            else:
                topic_rng = random.Random(f"{seed}:{topic}")
                sampled = sorted(topic_rng.sample(ids, per_topic))
            assignment.topics[topic] = sampled
        splits[split_name] = assignment
    return splits
