"""Emotion scoring against a word-emotion association lexicon.

The lexicon format is tab-separated ``term<TAB>category<TAB>flag`` with flag
1 marking an association, the format used by the NRC word-emotion lexicon.
Ten categories are recognized: eight basic emotions plus the two polarity
classes. A few terms are excluded by default because they dominate illness
narratives without discriminating between days: "feeling" carries every
category at once, and "positive"/"negative" mostly refer to test results
rather than mood.

Per-day proportions divide each category count by the total number of
category memberships that day, so the ten proportions sum to 1. An
alternative denominator (distinct emotion-carrying token occurrences) is
available for sensitivity checks but does not sum to 1 across categories.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

from .errors import LexiconFormatError

EMOTION_CATEGORIES = (
    "anger",
    "anticipation",
    "disgust",
    "fear",
    "joy",
    "negative",
    "positive",
    "sadness",
    "surprise",
    "trust",
)

DEFAULT_EXCLUSIONS = frozenset({"feeling", "positive", "negative"})

DENOMINATOR_MEMBERSHIP = "membership"
DENOMINATOR_CARRIER = "carrier"


@dataclass(frozen=True)
class SentimentLexicon:
    """term -> set of associated categories; excluded terms carry nothing."""

    associations: dict[str, frozenset[str]]
    excluded: frozenset[str]

    def categories_for(self, token: str) -> frozenset[str]:
        return self.associations.get(token, frozenset())

    def __len__(self) -> int:
        return len(self.associations)


@dataclass
class EmotionCounts:
    """Category membership counts over all tokens of one day."""

    day: int
    counts: dict[str, int] = field(
        default_factory=lambda: {c: 0 for c in EMOTION_CATEGORIES}
    )
    emotion_carrying_total: int = 0

    def membership_total(self) -> int:
        return sum(self.counts.values())

    def proportions(self, denominator: str = DENOMINATOR_MEMBERSHIP) -> dict[str, float] | None:
        """Per-category proportions, or None when the day has no emotion words."""
        if denominator == DENOMINATOR_MEMBERSHIP:
            total = self.membership_total()
        elif denominator == DENOMINATOR_CARRIER:
            total = self.emotion_carrying_total
        else:
            raise ValueError(f"unknown denominator mode: {denominator}")
        if total == 0:
            return None
        return {c: self.counts[c] / total for c in EMOTION_CATEGORIES}


def load_lexicon(
    path: str | Path,
    exclusions: frozenset[str] | set[str] = DEFAULT_EXCLUSIONS,
) -> SentimentLexicon:
    """Parse a term/category/flag TSV into a lexicon, dropping excluded terms."""
    path = Path(path)
    associations: dict[str, set[str]] = {}
    excluded = frozenset(t.lower() for t in exclusions)
    try:
        lines = path.read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        raise LexiconFormatError(str(path), 0, f"cannot read lexicon: {exc}") from exc
    for line_no, line in enumerate(lines, start=1):
        if not line.strip() or line.startswith("#"):
            continue
        parts = line.split("\t")
        if len(parts) != 3:
            raise LexiconFormatError(
                str(path), line_no, f"expected 3 tab-separated fields, got {len(parts)}"
            )
        term, category, flag = (p.strip() for p in parts)
        if category not in EMOTION_CATEGORIES:
            raise LexiconFormatError(str(path), line_no, f"unknown category '{category}'")
        if flag not in ("0", "1"):
            raise LexiconFormatError(str(path), line_no, f"flag must be 0 or 1, got '{flag}'")
        term = term.lower()
        if flag == "1" and term not in excluded:
            associations.setdefault(term, set()).add(category)
    return SentimentLexicon(
        associations={t: frozenset(cats) for t, cats in associations.items()},
        excluded=excluded,
    )


def score_day(day: int, tokens: list[str], lexicon: SentimentLexicon) -> EmotionCounts:
    """Count category memberships over all prepared tokens of one day.

    Every occurrence counts: a token associated with three categories adds
    one to each of the three, and one to the emotion-carrying total.
    """
    result = EmotionCounts(day=day)
    for token in tokens:
        categories = lexicon.categories_for(token)
        if not categories:
            continue
        result.emotion_carrying_total += 1
        for category in categories:
            result.counts[category] += 1
    return result
