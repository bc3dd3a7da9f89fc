"""Snapshot ingestion: fetch forum posts from a local JSONL file or a paged HTTP API.

Records follow the archive schema: one JSON object per post with at least
``id``, ``author``, ``link_flair_text``, ``title``, ``selftext`` and
``created_utc``. Remote sources are paged with ``after``/``before``/``size``
query parameters and return ``{"data": [...]}`` bodies.
"""

from __future__ import annotations

import json
import logging
import time
from dataclasses import dataclass, field
from pathlib import Path

from .errors import FetchError

logger = logging.getLogger(__name__)

# Bodies with these exact values are placeholders left by the platform after
# author or moderator deletion and carry no text.
DELETED_BODIES = ("[deleted]", "[removed]")

DEFAULT_PAGE_SIZE = 100
DEFAULT_DELAY_MS = 200
DEFAULT_MAX_ATTEMPTS = 3


@dataclass(frozen=True)
class RawPost:
    """One forum post as retrieved, before any filtering."""

    id: str
    author: str
    flair: str
    title: str
    body: str
    created_utc: int


@dataclass(frozen=True)
class IngestConfig:
    source: str
    subreddit: str = ""
    flairs: tuple[str, ...] = ()
    after: int = 0
    before: int = 4102444800  # 2100-01-01, effectively unbounded
    page_size: int = DEFAULT_PAGE_SIZE
    delay_ms: int = DEFAULT_DELAY_MS
    max_attempts: int = DEFAULT_MAX_ATTEMPTS


@dataclass
class FetchReport:
    """Posts plus bookkeeping about what the fetch skipped or retried."""

    posts: list[RawPost] = field(default_factory=list)
    skipped: int = 0
    pages: int = 0
    attempts: int = 0


def _coerce_post(record: object) -> RawPost | None:
    """Build a RawPost from one decoded record, or None if it is unusable."""
    if not isinstance(record, dict):
        return None
    post_id = record.get("id")
    created = record.get("created_utc")
    if not isinstance(post_id, str) or not post_id:
        return None
    try:
        created_utc = int(created)  # type: ignore[arg-type]
    except (TypeError, ValueError):
        return None

    def _text(key: str) -> str:
        value = record.get(key)
        return value if isinstance(value, str) else ""

    return RawPost(
        id=post_id,
        author=_text("author"),
        flair=_text("link_flair_text"),
        title=_text("title"),
        body=_text("selftext"),
        created_utc=created_utc,
    )


def _read_local(path: Path, config: IngestConfig, report: FetchReport) -> None:
    try:
        lines = path.read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        raise FetchError(f"cannot read snapshot {path}: {exc}") from exc
    report.attempts = 1
    for line_no, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        try:
            record = json.loads(line)
        except json.JSONDecodeError:
            logger.warning("skipping malformed record at %s:%d", path, line_no)
            report.skipped += 1
            continue
        post = _coerce_post(record)
        if post is None:
            logger.warning("skipping malformed record at %s:%d", path, line_no)
            report.skipped += 1
            continue
        if config.after <= post.created_utc <= config.before:
            report.posts.append(post)


def _get_page(session, url: str, params: dict, config: IngestConfig, report: FetchReport) -> list:
    import requests

    last_error: Exception | None = None
    for attempt in range(1, config.max_attempts + 1):
        report.attempts += 1
        try:
            response = session.get(url, params=params, timeout=30)
            response.raise_for_status()
            payload = response.json()
            data = payload.get("data") if isinstance(payload, dict) else None
            if not isinstance(data, list):
                raise ValueError("response body lacks a 'data' list")
            return data
        except (requests.RequestException, ValueError) as exc:
            last_error = exc
            logger.warning("fetch attempt %d/%d failed: %s", attempt, config.max_attempts, exc)
            if attempt < config.max_attempts:
                time.sleep(config.delay_ms / 1000.0)
    raise FetchError(f"remote fetch from {url} failed: {last_error}", attempts=config.max_attempts)


def _read_remote(config: IngestConfig, report: FetchReport) -> None:
    import requests

    session = requests.Session()
    # The API treats after/before as exclusive bounds, so widen by one second
    # to keep the configured window inclusive.
    cursor = config.after - 1
    while True:
        params: dict[str, object] = {
            "after": cursor,
            "before": config.before + 1,
            "size": config.page_size,
            "sort": "asc",
            "sort_type": "created_utc",
        }
        if config.subreddit:
            params["subreddit"] = config.subreddit
        data = _get_page(session, config.source, params, config, report)
        report.pages += 1
        page_posts = []
        for record in data:
            post = _coerce_post(record)
            if post is None:
                report.skipped += 1
                continue
            page_posts.append(post)
        report.posts.extend(page_posts)
        if len(data) < config.page_size:
            break
        if not page_posts:
            # A full page of unusable records gives no cursor to advance past.
            logger.warning("stopping pagination: page %d had no usable records", report.pages)
            break
        cursor = max(p.created_utc for p in page_posts)
        time.sleep(config.delay_ms / 1000.0)


def fetch_posts_detailed(config: IngestConfig) -> FetchReport:
    """Fetch every post in the configured window, with skip and page counts.

    Posts are deduplicated by id (the latest retrieved copy wins) and returned
    sorted ascending by (created_utc, id) so downstream output is stable.
    """
    report = FetchReport()
    if config.source.startswith(("http://", "https://")):
        _read_remote(config, report)
    else:
        _read_local(Path(config.source), config, report)
    by_id: dict[str, RawPost] = {}
    for post in report.posts:
        by_id[post.id] = post
    report.posts = sorted(by_id.values(), key=lambda p: (p.created_utc, p.id))
    return report


def fetch_posts(config: IngestConfig) -> list[RawPost]:
    """Fetch every post in the configured window (see fetch_posts_detailed)."""
    return fetch_posts_detailed(config).posts


def filter_flair(posts: list[RawPost], flairs: tuple[str, ...] | list[str]) -> list[RawPost]:
    """Keep posts whose trimmed flair matches the whitelist exactly and whose body has text.

    Matching is case-sensitive. Placeholder bodies left after deletion count
    as empty.
    """
    wanted = {f.strip() for f in flairs}
    kept = []
    for post in posts:
        if post.flair.strip() not in wanted:
            continue
        body = post.body.strip()
        if not body or body in DELETED_BODIES:
            continue
        kept.append(post)
    return kept
