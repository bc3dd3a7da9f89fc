"""Shared fixture: one pipeline run whose artifact files feed the renderer.

The pipeline package is a test-time dependency used only to produce the
files; the renderer itself never imports it.
"""

from __future__ import annotations

from pathlib import Path

import pytest

ROOT = Path(__file__).resolve().parents[2]
GOLDEN = ROOT / "tests" / "data" / "golden"


@pytest.fixture(scope="session")
def artifacts(tmp_path_factory) -> Path:
    from daycourse.pipeline import load_config, run_pipeline

    out = tmp_path_factory.mktemp("artifacts")
    config = load_config(
        GOLDEN / "config.txt",
        {"source": str(GOLDEN / "snapshot.jsonl"), "out_dir": str(out)},
    )
    run_pipeline(config)
    return out
