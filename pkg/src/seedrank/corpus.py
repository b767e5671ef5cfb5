"""Corpora, topics, qrels, lexicons, embeddings and TREC run files.

File formats:
  corpus      UTF-8 JSON lines, one document per line with exactly the
              fields ``doc_id``, ``title``, ``abstract``.
  topics      whitespace-separated ``topic_id doc_id``, one candidate per
              line; line order defines the candidate order of each topic.
  qrels       whitespace-separated ``topic_id 0 doc_id grade`` (TREC qrels).
  run         ``topic_id Q0 doc_id rank score tag`` (TREC run).
  lexicon     one token per line.
  embeddings  word2vec text format: header ``vocab_size dimension``, then
              ``token v1 ... vd`` per line.

All loaders are pure functions of the file contents; the returned objects
are treated as immutable afterwards.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np
import requests

from .errors import (
    DuplicateIdError,
    MissingTopicError,
    ParseError,
    ProtocolError,
    RunValidationError,
    TransportError,
)


@dataclass(frozen=True)
class Document:
    """One candidate or seed study. Any document may serve either role."""

    doc_id: str
    title: str
    abstract: str


@dataclass
class Topic:
    """A review topic: ordered candidate pool plus relevance judgments.

    ``judgments`` preserves qrels file order, which fixes the order of the
    seed pool (``relevant_ids``) for the sliding-window grouping.
    """

    topic_id: str
    candidate_ids: list[str] = field(default_factory=list)
    judgments: dict[str, int] = field(default_factory=dict)

    @property
    def relevant_ids(self) -> list[str]:
        """Judged-relevant doc_ids in order of first appearance in the qrels."""
        return [d for d, g in self.judgments.items() if g >= 1]

    @property
    def irrelevant_ids(self) -> list[str]:
        """Candidates not judged relevant (explicit grade 0 or unjudged)."""
        relevant = set(self.relevant_ids)
        return [d for d in self.candidate_ids if d not in relevant]


@dataclass(frozen=True)
class Lexicon:
    """Set of lowercase single-token clinical terms."""

    terms: frozenset[str]

    def __contains__(self, token: str) -> bool:
        return token in self.terms

    def __len__(self) -> int:
        return len(self.terms)


@dataclass(frozen=True)
class RunEntry:
    """One line of a TREC run file."""

    topic_id: str
    doc_id: str
    rank: int
    score: float
    tag: str


@dataclass(frozen=True)
class EmbeddingTable:
    """Token -> dense vector map with a single shared dimension."""

    dimension: int
    vectors: dict[str, np.ndarray]

    def lookup(self, token: str) -> np.ndarray | None:
        """Raw-cased lookup first, lowercase as fallback."""
        vec = self.vectors.get(token)
        if vec is None:
            vec = self.vectors.get(token.lower())
        return vec


def load_corpus(path) -> dict[str, Document]:
    """Load a JSON-lines corpus keyed by doc_id.

    Raises ParseError with the offending line number on malformed JSON or
    missing fields, DuplicateIdError when a doc_id repeats. Empty abstracts
    are accepted.
    """
    docs: dict[str, Document] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ParseError(path, lineno, f"invalid JSON: {exc.msg}") from exc
            if not isinstance(record, dict):
                raise ParseError(path, lineno, "expected a JSON object")
            try:
                doc_id = record["doc_id"]
                title = record["title"]
                abstract = record["abstract"]
            except KeyError as exc:
                raise ParseError(path, lineno, f"missing field {exc.args[0]!r}") from exc
            if not isinstance(doc_id, str) or not doc_id:
                raise ParseError(path, lineno, "doc_id must be a non-empty string")
            if doc_id in docs:
                raise DuplicateIdError(path, lineno, f"duplicate doc_id {doc_id!r}")
            docs[doc_id] = Document(doc_id, str(title), str(abstract))
    return docs


def load_topics(topics_path, qrels_path) -> list[Topic]:
    """Load topics and attach qrels judgments.

    Judged doc_ids missing from a topic's candidate list are appended to it
    (they were retrieved by the original search and must be rankable).
    A topic that appears only in the qrels raises MissingTopicError.
    """
    topics: dict[str, Topic] = {}
    seen: dict[str, set[str]] = {}
    with open(topics_path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            parts = line.split()
            if not parts:
                continue
            if len(parts) != 2:
                raise ParseError(
                    topics_path, lineno, f"expected 'topic_id doc_id', got {len(parts)} fields"
                )
            topic_id, doc_id = parts
            topic = topics.setdefault(topic_id, Topic(topic_id))
            ids = seen.setdefault(topic_id, set())
            if doc_id not in ids:
                ids.add(doc_id)
                topic.candidate_ids.append(doc_id)

    with open(qrels_path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            parts = line.split()
            if not parts:
                continue
            if len(parts) != 4:
                raise ParseError(
                    qrels_path, lineno, f"expected 'topic_id 0 doc_id grade', got {len(parts)} fields"
                )
            topic_id, _, doc_id, grade_str = parts
            try:
                grade = int(grade_str)
            except ValueError as exc:
                raise ParseError(qrels_path, lineno, f"grade {grade_str!r} is not an integer") from exc
            if grade < 0:
                raise ParseError(qrels_path, lineno, f"grade must be >= 0, got {grade}")
            if topic_id not in topics:
                raise MissingTopicError(
                    f"qrels reference topic {topic_id!r} which the topic file does not define"
                )
            topic = topics[topic_id]
            topic.judgments.setdefault(doc_id, grade)
            ids = seen[topic_id]
            if doc_id not in ids:
                ids.add(doc_id)
                topic.candidate_ids.append(doc_id)

    return list(topics.values())


def load_qrels(path) -> dict[str, dict[str, int]]:
    """Parse a qrels file alone: topic_id -> doc_id -> grade."""
    qrels: dict[str, dict[str, int]] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            parts = line.split()
            if not parts:
                continue
            if len(parts) != 4:
                raise ParseError(
                    path, lineno, f"expected 'topic_id 0 doc_id grade', got {len(parts)} fields"
                )
            topic_id, _, doc_id, grade_str = parts
            try:
                grade = int(grade_str)
            except ValueError as exc:
                raise ParseError(path, lineno, f"grade {grade_str!r} is not an integer") from exc
            if grade < 0:
                raise ParseError(path, lineno, f"grade must be >= 0, got {grade}")
            qrels.setdefault(topic_id, {}).setdefault(doc_id, grade)
    return qrels


def filter_topics(topics: list[Topic], min_relevant: int) -> list[Topic]:
    """Keep topics with at least ``min_relevant`` relevant studies, order preserved."""
    return [t for t in topics if len(t.relevant_ids) >= min_relevant]


def _format_score(score: float) -> str:
    """Shortest representation with >= 6 significant digits that round-trips."""
    padded = format(score, "#.6g")
    if float(padded) == score:
        return padded
    return repr(score)


def write_run(entries: list[RunEntry], path) -> None:
    """Write a TREC run file, validating the per-topic invariants first.

    Within each topic, ranks must be 1..n without gaps and scores must be
    non-increasing with rank; otherwise RunValidationError.
    """
    by_topic: dict[str, list[RunEntry]] = {}
    for entry in entries:
        by_topic.setdefault(entry.topic_id, []).append(entry)
    for topic_id, group in by_topic.items():
        ordered = sorted(group, key=lambda e: e.rank)
        ranks = [e.rank for e in ordered]
        if ranks != list(range(1, len(ordered) + 1)):
            raise RunValidationError(f"topic {topic_id!r}: ranks are not 1..n without gaps: {ranks}")
        scores = [e.score for e in ordered]
        if any(a < b for a, b in zip(scores, scores[1:])):
            raise RunValidationError(f"topic {topic_id!r}: scores increase with rank")

    with open(path, "w", encoding="utf-8") as fh:
        for entry in entries:
            fh.write(
                f"{entry.topic_id} Q0 {entry.doc_id} {entry.rank} "
                f"{_format_score(entry.score)} {entry.tag}\n"
            )


def load_run(path) -> list[RunEntry]:
    """Load a TREC run file; malformed lines raise ParseError."""
    entries: list[RunEntry] = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            parts = line.split()
            if not parts:
                continue
            if len(parts) != 6:
                raise ParseError(path, lineno, f"expected 6 fields, got {len(parts)}")
            topic_id, _, doc_id, rank_str, score_str, tag = parts
            try:
                rank = int(rank_str)
                score = float(score_str)
            except ValueError as exc:
                raise ParseError(path, lineno, str(exc)) from exc
            if rank < 1:
                raise ParseError(path, lineno, f"rank must be positive, got {rank}")
            entries.append(RunEntry(topic_id, doc_id, rank, score, tag))
    return entries


def load_lexicon(path) -> Lexicon:
    """One token per line; lowercased and deduplicated. Empty files are accepted."""
    terms = set()
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            token = line.strip()
            if not token:
                continue
            if any(ch.isspace() for ch in token):
                raise ParseError(path, lineno, f"lexicon entries must be single tokens: {token!r}")
            terms.add(token.lower())
    return Lexicon(frozenset(terms))


def load_embeddings(path) -> EmbeddingTable:
    """Load word2vec text-format embeddings."""
    vectors: dict[str, np.ndarray] = {}
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().split()
        if len(header) != 2:
            raise ParseError(path, 1, "expected header 'vocab_size dimension'")
        try:
            dimension = int(header[1])
        except ValueError as exc:
            raise ParseError(path, 1, f"dimension {header[1]!r} is not an integer") from exc
        if dimension < 1:
            raise ParseError(path, 1, f"dimension must be positive, got {dimension}")
        for lineno, line in enumerate(fh, start=2):
            parts = line.split()
            if not parts:
                continue
            if len(parts) != dimension + 1:
                raise ParseError(
                    path, lineno,
                    f"expected token plus {dimension} values, got {len(parts) - 1} values",
                )
            try:
                vec = np.array([float(v) for v in parts[1:]], dtype=np.float64)
            except ValueError as exc:
                raise ParseError(path, lineno, str(exc)) from exc
            vectors[parts[0]] = vec
    return EmbeddingTable(dimension, vectors)


def fetch_annotations(endpoint: str, documents: list[Document], timeout: float = 30.0) -> Lexicon:
    """Ask an annotator service for the clinical terms in each document.

    POSTs ``{"texts": [...]}`` and expects ``{"tokens": [[...], ...]}`` back,
    one token list per input text. The union of all returned tokens becomes
    the lexicon (sorted union, so merging is deterministic).

    The offline lexicon file is the canonical source; this client exists for
    refreshing it. Network failures raise TransportError so callers can fall
    back to load_lexicon.
    """
    texts = [f"{d.title} {d.abstract}" for d in documents]
    try:
        response = requests.post(endpoint, json={"texts": texts}, timeout=timeout)
        response.raise_for_status()
    except requests.RequestException as exc:
        raise TransportError(f"annotator request failed: {exc}") from exc
    try:
        payload = response.json()
    except ValueError as exc:
        raise ProtocolError("annotator response is not JSON") from exc
    token_lists = payload.get("tokens") if isinstance(payload, dict) else None
    if not isinstance(token_lists, list) or len(token_lists) != len(texts):
        raise ProtocolError("annotator response must carry one token list per input text")
    terms = set()
    for token_list in token_lists:
        if not isinstance(token_list, list):
            raise ProtocolError("annotator token lists must be JSON arrays")
        for token in token_list:
            if not isinstance(token, str) or not token or any(ch.isspace() for ch in token):
                raise ProtocolError(f"annotator returned a non-token value: {token!r}")
            terms.add(token.lower())
    return Lexicon(frozenset(sorted(terms)))
