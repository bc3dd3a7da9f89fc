"""Tokenization, stopword removal, and the bag-of-words corpus.

Tokens are NFC-normalized, lowercased runs of letters and digits; everything
else splits. Single-character tokens are dropped unless they are digits, and
pure numbers are kept on purpose: counts like "103" carry meaning in illness
narratives.
"""

from __future__ import annotations

import re
import unicodedata
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

from .annotate import DaySegment
from .errors import ConfigError

_TOKEN_RE = re.compile(r"[^\W_]+")

DEFAULT_STOPWORDS_RESOURCE = "stopwords_en.txt"


def tokenize(text: str) -> list[str]:
    """Lowercased alphanumeric tokens in reading order."""
    normalized = unicodedata.normalize("NFC", text).lower()
    tokens = _TOKEN_RE.findall(normalized)
    return [t for t in tokens if len(t) > 1 or t.isdigit()]


def load_stopwords(path: str | Path | None = None) -> frozenset[str]:
    """Stopword set from a one-word-per-line file, or the bundled English list."""
    if path is None:
        text = (
            resources.files("daycourse")
            .joinpath(f"data/{DEFAULT_STOPWORDS_RESOURCE}")
            .read_text(encoding="utf-8")
        )
    else:
        path = Path(path)
        if not path.is_file():
            raise ConfigError(f"stopword list not found: {path}")
        text = path.read_text(encoding="utf-8")
    words = {line.strip().lower() for line in text.splitlines()}
    words.discard("")
    return frozenset(words)


def remove_stopwords(tokens: list[str], stopwords: frozenset[str]) -> list[str]:
    """Filter stopwords, preserving order and duplicates of the survivors."""
    return [t for t in tokens if t not in stopwords]


@dataclass(frozen=True)
class Vocabulary:
    """Token ids assigned lexicographically, with per-token document frequency."""

    tokens: tuple[str, ...]
    index: dict[str, int]
    document_frequency: dict[str, int]

    def __len__(self) -> int:
        return len(self.tokens)


@dataclass(frozen=True)
class BagOfWords:
    """Sparse token-id counts for one segment."""

    segment_index: int
    counts: dict[int, int]

    def total(self) -> int:
        return sum(self.counts.values())


@dataclass(frozen=True)
class Corpus:
    vocabulary: Vocabulary
    bags: tuple[BagOfWords, ...]
    n_dropped_empty: int


def build_corpus(
    segments: list[DaySegment],
    stopwords: frozenset[str],
) -> Corpus:
    """Tokenize every segment and assemble the bag-of-words corpus.

    Segments left without tokens are dropped and counted; bag segment_index
    values refer to positions in the input list, so the caller can recover
    each bag's day and author.
    """
    token_lists: list[tuple[int, list[str]]] = []
    for i, segment in enumerate(segments):
        tokens = remove_stopwords(tokenize(segment.text), stopwords)
        if tokens:
            token_lists.append((i, tokens))

    vocab_tokens = tuple(sorted({t for _, tokens in token_lists for t in tokens}))
    index = {t: i for i, t in enumerate(vocab_tokens)}

    df: dict[str, int] = {t: 0 for t in vocab_tokens}
    bags = []
    for segment_index, tokens in token_lists:
        counts: dict[int, int] = {}
        for t in tokens:
            counts[index[t]] = counts.get(index[t], 0) + 1
        for t in set(tokens):
            df[t] += 1
        bags.append(BagOfWords(segment_index=segment_index, counts=counts))

    vocabulary = Vocabulary(tokens=vocab_tokens, index=index, document_frequency=df)
    return Corpus(
        vocabulary=vocabulary,
        bags=tuple(bags),
        n_dropped_empty=len(segments) - len(bags),
    )
