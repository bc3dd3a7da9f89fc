"""Shared fixtures: a post factory and one session-wide golden pipeline run."""

from __future__ import annotations

from pathlib import Path

import pytest
from hypothesis import settings

from daycourse.ingest import RawPost
from daycourse.pipeline import load_config, run_pipeline

DATA_DIR = Path(__file__).parent / "data"
GOLDEN_DIR = DATA_DIR / "golden"
GOLDEN_SNAPSHOT = GOLDEN_DIR / "snapshot.jsonl"
GOLDEN_CONFIG = GOLDEN_DIR / "config.txt"

settings.register_profile("suite", deadline=None, max_examples=50)
settings.load_profile("suite")


def make_post(
    id: str = "p1",
    author: str = "alice",
    flair: str = "Tested Positive - Me",
    title: str = "update",
    body: str = "",
    created_utc: int = 1583000000,
) -> RawPost:
    return RawPost(
        id=id, author=author, flair=flair, title=title, body=body,
        created_utc=created_utc,
    )


def golden_config(out_dir: Path):
    return load_config(
        GOLDEN_CONFIG,
        {"source": str(GOLDEN_SNAPSHOT), "out_dir": str(out_dir)},
    )


@pytest.fixture(scope="session")
def golden_run(tmp_path_factory) -> tuple[Path, dict]:
    """One full pipeline run over the bundled synthetic snapshot."""
    out = tmp_path_factory.mktemp("golden_run")
    manifest = run_pipeline(golden_config(out))
    return out, manifest
