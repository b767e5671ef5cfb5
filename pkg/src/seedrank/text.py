"""Turn raw study text into bag-of-words / bag-of-clinical-words counts.

Two tokenization pipelines are supported:

  ``ours``  strip every Unicode punctuation character, split on
            non-alphanumeric boundaries, lowercase, drop stopwords.
  ``lee``   split on whitespace only (punctuation stays glued to tokens),
            lowercase, drop stopwords.

Neither pipeline stems. Stopword matching always happens on the lowercased
token, so the case-preserving mode used for embedding lookup removes the
same stopwords as the default mode.
"""

from __future__ import annotations

import re
import unicodedata
from collections import Counter
from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources

from .corpus import Document, Lexicon

OURS = "ours"
LEE = "lee"

_WORD_RE = re.compile(r"[^\W_]+")


class _PunctuationTable(dict):
    """str.translate table mapping punctuation to space, lazily per codepoint."""

    def __missing__(self, codepoint: int) -> int:
        replacement = 0x20 if unicodedata.category(chr(codepoint)).startswith("P") else codepoint
        self[codepoint] = replacement
        return replacement


_PUNCT_TO_SPACE = _PunctuationTable()


@lru_cache(maxsize=1)
def default_stopwords() -> frozenset[str]:
    """The bundled 179-word English stopword list."""
    data = resources.files("seedrank.data").joinpath("stopwords_english.txt").read_text("utf-8")
    return frozenset(line.strip() for line in data.splitlines() if line.strip())


@dataclass(frozen=True)
class PipelineConfig:
    """Pre-processing settings, fixed for the duration of an experiment.

    ``lowercase=False`` is meant only for building embedding-lookup token
    streams; every counting representation lowercases.
    ``include_title`` controls whether ranking text is title+abstract or
    abstract alone.
    """

    variant: str = OURS
    stopwords: frozenset[str] = field(default_factory=default_stopwords)
    lowercase: bool = True
    include_title: bool = True

    def __post_init__(self):
        if self.variant not in (OURS, LEE):
            raise ValueError(f"unknown pipeline variant {self.variant!r}")


@dataclass(frozen=True)
class TermCounts:
    """Sparse term -> count map plus the document length (sum of counts)."""

    counts: dict[str, int]
    length: int

    @classmethod
    def from_tokens(cls, tokens: list[str]) -> "TermCounts":
        counts = dict(Counter(tokens))
        return cls(counts, sum(counts.values()))

    def __contains__(self, term: str) -> bool:
        return term in self.counts

    def get(self, term: str, default: int = 0) -> int:
        return self.counts.get(term, default)


def tokenize(text: str, config: PipelineConfig) -> list[str]:
    """Tokenize one text under the configured pipeline. Empty text -> []."""
    if config.variant == OURS:
        raw = _WORD_RE.findall(text.translate(_PUNCT_TO_SPACE))
    else:
        raw = text.split()
    stopwords = config.stopwords
    if config.lowercase:
        return [lowered for t in raw if (lowered := t.lower()) not in stopwords]
    return [t for t in raw if t.lower() not in stopwords]


def document_text(doc: Document, config: PipelineConfig) -> str:
    """The text a document is ranked by: title+abstract, or abstract only."""
    if config.include_title:
        return f"{doc.title} {doc.abstract}"
    return doc.abstract


def bow(doc: Document, config: PipelineConfig) -> TermCounts:
    """Bag-of-words counts for one document."""
    return TermCounts.from_tokens(tokenize(document_text(doc, config), config))


def boc(bow_counts: TermCounts, lexicon: Lexicon) -> TermCounts:
    """Restrict bag-of-words counts to lexicon terms; counts are preserved."""
    counts = {t: c for t, c in bow_counts.counts.items() if t in lexicon}
    return TermCounts(counts, sum(counts.values()))
