"""Day annotation: split posts into segments stamped with a day-since-onset number.

Two marker grammars are recognized. "Day-x" markers are explicit day
references such as ``Day 4``, ``day #2`` or ``Days 3-5`` (a range yields the
midpoint, rounded half up). Absolute-date markers are calendar dates in the
forms ``March 3``, ``3 March``, ``3/15`` or ``3/15/2020``; the first date
mentioned in a post becomes day 1 and later dates are offset from it. A post
follows exactly one grammar: Day-x wins when both appear. Posts without any
usable marker keep their text on an NA day only when a marker exists
elsewhere in the post; otherwise they are not annotatable.

Text before the first body marker is one segment with day NA, unless the
title names a day (``Day 7 update``), in which case the title's day is used
for that text. Day values below 1 (a written ``Day 0``, or a date earlier
than the post's first date) are coerced to 1 and counted in the report.
"""

from __future__ import annotations

import datetime as dt
import re
from dataclasses import dataclass, field

from .errors import NotAnnotatable
from .ingest import RawPost

FORMAT_DAILY = "daily_journal"
FORMAT_DATE = "absolute_date"
FORMAT_TITLE = "title_only"
FORMAT_NONE = "none"

# Year assumed for dates written without one.
DEFAULT_YEAR = 2020

DAY_RE = re.compile(r"\bdays?\s*#?\s*(\d+)(?:\s*[-–to]+\s*(\d+))?", re.IGNORECASE)

_MONTHS = {
    "january": 1, "february": 2, "march": 3, "april": 4, "may": 5,
    "june": 6, "july": 7, "august": 8, "september": 9, "october": 10,
    "november": 11, "december": 12,
    "jan": 1, "feb": 2, "mar": 3, "apr": 4, "jun": 6, "jul": 7,
    "aug": 8, "sep": 9, "oct": 10, "nov": 11, "dec": 12,
}
# Longest alternatives first so "march" is not consumed as "mar" + "ch".
_MONTH_ALT = "|".join(sorted(_MONTHS, key=len, reverse=True))
_ORD = r"(?:st|nd|rd|th)?"

DATE_RE = re.compile(
    rf"\b(?:"
    rf"(?P<mname>{_MONTH_ALT})\.?\s+(?P<mday>\d{{1,2}}){_ORD}\b"
    rf"|(?P<dday>\d{{1,2}}){_ORD}\s+(?P<dmonth>{_MONTH_ALT})\b"
    rf"|(?P<nmonth>\d{{1,2}})/(?P<nday>\d{{1,2}})(?:/(?P<nyear>\d{{4}}))?\b"
    rf")",
    re.IGNORECASE,
)

# Separator punctuation left dangling once a marker is cut out of the text.
_SEPARATORS = ":;,.-–—"


@dataclass(frozen=True)
class Marker:
    """One day marker found in a text, with its exact span for lossless splits."""

    start: int
    end: int
    text: str
    day: int | None = None        # Day-x markers: written day (range midpoint applied)
    date: dt.date | None = None   # absolute-date markers


@dataclass(frozen=True)
class DaySegment:
    """A stretch of post text attributed to one day (or to no day at all)."""

    post_id: str
    author: str
    day: int | None
    text: str
    format: str

    def to_json_dict(self) -> dict:
        return {
            "post_id": self.post_id,
            "author": self.author,
            "day": self.day,
            "text": self.text,
            "format": self.format,
        }

    @staticmethod
    def from_json_dict(record: dict) -> "DaySegment":
        return DaySegment(
            post_id=record["post_id"],
            author=record["author"],
            day=record["day"],
            text=record["text"],
            format=record["format"],
        )


@dataclass
class AnnotationReport:
    """Corpus-level annotation bookkeeping."""

    format_counts: dict[str, int] = field(
        default_factory=lambda: {FORMAT_DAILY: 0, FORMAT_DATE: 0, FORMAT_NONE: 0}
    )
    n_posts_annotated: int = 0
    n_segments: int = 0
    n_day_mentions: int = 0
    day_mentions: dict[int, int] = field(default_factory=dict)
    day_posts: dict[int, int] = field(default_factory=dict)
    coerced_to_day_one: int = 0

    def to_json_dict(self) -> dict:
        return {
            "format_counts": dict(sorted(self.format_counts.items())),
            "n_posts_annotated": self.n_posts_annotated,
            "n_segments": self.n_segments,
            "n_day_mentions": self.n_day_mentions,
            "day_mentions": {str(d): c for d, c in sorted(self.day_mentions.items())},
            "day_posts": {str(d): c for d, c in sorted(self.day_posts.items())},
            "coerced_to_day_one": self.coerced_to_day_one,
        }


def _midpoint(a: int, b: int) -> int:
    """Midpoint of a written day range, rounding halves up."""
    return (a + b + 1) // 2


def find_day_markers(text: str) -> list[Marker]:
    """All Day-x markers in reading order, with range midpoints applied."""
    markers = []
    for m in DAY_RE.finditer(text):
        day = int(m.group(1))
        if m.group(2) is not None:
            day = _midpoint(day, int(m.group(2)))
        markers.append(Marker(start=m.start(), end=m.end(), text=m.group(0), day=day))
    return markers


def find_date_markers(text: str) -> list[Marker]:
    """All absolute-date markers in reading order; unparseable dates are skipped."""
    markers = []
    for m in DATE_RE.finditer(text):
        if m.group("mname") is not None:
            month, day, year = _MONTHS[m.group("mname").lower()], int(m.group("mday")), DEFAULT_YEAR
        elif m.group("dmonth") is not None:
            month, day, year = _MONTHS[m.group("dmonth").lower()], int(m.group("dday")), DEFAULT_YEAR
        else:
            month, day = int(m.group("nmonth")), int(m.group("nday"))
            year = int(m.group("nyear")) if m.group("nyear") else DEFAULT_YEAR
        try:
            parsed = dt.date(year, month, day)
        except ValueError:
            continue
        markers.append(Marker(start=m.start(), end=m.end(), text=m.group(0), date=parsed))
    return markers


def classify_format(post: RawPost) -> str:
    """daily_journal when Day-x appears in body or title, else absolute_date, else none."""
    if DAY_RE.search(post.body) or DAY_RE.search(post.title):
        return FORMAT_DAILY
    if find_date_markers(post.body):
        return FORMAT_DATE
    return FORMAT_NONE


def split_at_markers(body: str, markers: list[Marker]) -> tuple[str, list[tuple[str, str]]]:
    """Cut the body at each marker span.

    Returns (prefix, [(marker_text, following_text), ...]) such that
    prefix + "".join(marker_text + following_text) reconstructs the body
    exactly.
    """
    if not markers:
        return body, []
    prefix = body[: markers[0].start]
    pieces = []
    for i, marker in enumerate(markers):
        tail_end = markers[i + 1].start if i + 1 < len(markers) else len(body)
        pieces.append((marker.text, body[marker.end:tail_end]))
    return prefix, pieces


def _clean_segment(text: str) -> str:
    """Trim whitespace and the separator punctuation a marker leaves behind."""
    return text.strip().lstrip(_SEPARATORS).strip()


def _title_day(post: RawPost) -> tuple[int, bool] | None:
    """Day named by the title, if any, as (day, was_coerced)."""
    markers = find_day_markers(post.title)
    if not markers:
        return None
    day = markers[0].day
    assert day is not None
    return (max(day, 1), day < 1)


def _annotate_detailed(post: RawPost) -> tuple[list[DaySegment], list[int], int]:
    """Segments plus the day-mention list and the count of coerced day values."""
    fmt = classify_format(post)
    title = _title_day(post)
    if fmt == FORMAT_NONE and title is None:
        raise NotAnnotatable(f"post {post.id} has no recognizable day marker")

    if fmt == FORMAT_DAILY:
        markers = find_day_markers(post.body)
    else:
        markers = find_date_markers(post.body)

    coerced = 0
    days: list[int] = []
    if fmt == FORMAT_DAILY:
        for marker in markers:
            assert marker.day is not None
            if marker.day < 1:
                coerced += 1
            days.append(max(marker.day, 1))
    else:
        origin = markers[0].date
        assert origin is not None
        for marker in markers:
            assert marker.date is not None
            day = 1 + (marker.date - origin).days
            if day < 1:
                coerced += 1
            days.append(max(day, 1))

    prefix, pieces = split_at_markers(post.body, markers)

    segments: list[DaySegment] = []
    mentions: list[int] = []

    prefix_text = _clean_segment(prefix)
    if prefix_text:
        if title is not None:
            day, title_coerced = title
            segments.append(DaySegment(post.id, post.author, day, prefix_text, FORMAT_TITLE))
            mentions.append(day)
            coerced += int(title_coerced)
        else:
            segments.append(DaySegment(post.id, post.author, None, prefix_text, fmt))

    for day, (_, tail) in zip(days, pieces):
        mentions.append(day)
        text = _clean_segment(tail)
        if text:
            segments.append(DaySegment(post.id, post.author, day, text, fmt))

    return segments, mentions, coerced


def annotate(post: RawPost) -> list[DaySegment]:
    """Split one post into day-stamped segments in reading order.

    Raises NotAnnotatable when the post names no day in body or title.
    Segments whose text is empty once markers and separators are removed are
    dropped, so a post can legitimately produce an empty list.
    """
    segments, _, _ = _annotate_detailed(post)
    return segments


def annotate_corpus(posts: list[RawPost]) -> tuple[list[DaySegment], AnnotationReport]:
    """Annotate every post, discarding the ones without day markers."""
    report = AnnotationReport()
    segments: list[DaySegment] = []
    for post in posts:
        fmt = classify_format(post)
        report.format_counts[fmt] += 1
        if fmt == FORMAT_NONE:
            continue
        report.n_posts_annotated += 1
        post_segments, mentions, coerced = _annotate_detailed(post)
        segments.extend(post_segments)
        report.n_segments += len(post_segments)
        report.coerced_to_day_one += coerced
        report.n_day_mentions += len(mentions)
        for day in mentions:
            report.day_mentions[day] = report.day_mentions.get(day, 0) + 1
        for day in sorted(set(mentions)):
            report.day_posts[day] = report.day_posts.get(day, 0) + 1
    return segments, report
