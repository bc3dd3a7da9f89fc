"""Readers for the pipeline artifact files, with schema validation.

Every reader names the offending file and the missing column or key, so a
schema drift between the pipeline and the renderer fails loudly.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

from .colors import SENTIMENT_COLORS

DAY_HISTOGRAM_FILE = "day_histogram.csv"
WORDCLOUDS_FILE = "wordclouds.json"
SERIES_FILE = "series.csv"
CURVES_FILE = "curves.csv"
HEATMAP_FILE = "heatmap.csv"
TREE_FILE = "tree.json"
MDS_FILE = "mds.csv"


class RenderInputError(Exception):
    """An input file is missing or does not match the expected schema."""


def _read_csv(path: Path, required: list[str]) -> list[dict[str, str]]:
    if not path.is_file():
        raise RenderInputError(f"missing input file: {path}")
    with open(path, newline="", encoding="utf-8") as handle:
        reader = csv.DictReader(handle)
        header = reader.fieldnames or []
        for column in required:
            if column not in header:
                raise RenderInputError(f"{path.name}: missing column '{column}'")
        return list(reader)


def _read_json(path: Path, required: list[str]) -> dict:
    if not path.is_file():
        raise RenderInputError(f"missing input file: {path}")
    try:
        payload = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise RenderInputError(f"{path.name}: not valid JSON ({exc})") from exc
    if not isinstance(payload, dict):
        raise RenderInputError(f"{path.name}: expected a JSON object")
    for key in required:
        if key not in payload:
            raise RenderInputError(f"{path.name}: missing key '{key}'")
    return payload


def load_day_histogram(in_dir: Path) -> tuple[list[int], list[int], list[float]]:
    """Days, mention counts, and mentioning-post fractions, in day order."""
    rows = _read_csv(
        in_dir / DAY_HISTOGRAM_FILE,
        ["day", "mention_count", "fraction_of_posts_mentioning"],
    )
    days = [int(r["day"]) for r in rows]
    counts = [int(r["mention_count"]) for r in rows]
    fractions = [float(r["fraction_of_posts_mentioning"]) for r in rows]
    return days, counts, fractions


def load_wordclouds(in_dir: Path) -> dict[str, list[tuple[str, float]]]:
    """Per-topic (word, probability) lists, highest probability first."""
    payload = _read_json(in_dir / WORDCLOUDS_FILE, ["topics"])
    clouds: dict[str, list[tuple[str, float]]] = {}
    for entry in payload["topics"]:
        for key in ("label", "words"):
            if key not in entry:
                raise RenderInputError(f"{WORDCLOUDS_FILE}: topic entry missing key '{key}'")
        words = []
        for item in entry["words"]:
            if "word" not in item or "p" not in item:
                raise RenderInputError(
                    f"{WORDCLOUDS_FILE}: word entry missing key 'word' or 'p'"
                )
            words.append((str(item["word"]), float(item["p"])))
        clouds[str(entry["label"])] = words
    return clouds


def load_series(in_dir: Path) -> list[dict[str, str]]:
    """Raw per-day series rows; value is empty on days without documents."""
    return _read_csv(in_dir / SERIES_FILE, ["day", "kind", "label", "value", "n_docs"])


def load_curves(in_dir: Path) -> dict[tuple[str, str], tuple[list[float], list[float]]]:
    """Smoothed (x, y) samples keyed by (kind, label)."""
    rows = _read_csv(in_dir / CURVES_FILE, ["kind", "label", "x", "y"])
    curves: dict[tuple[str, str], tuple[list[float], list[float]]] = {}
    for row in rows:
        xs, ys = curves.setdefault((row["kind"], row["label"]), ([], []))
        xs.append(float(row["x"]))
        ys.append(float(row["y"]))
    return curves


def load_heatmap(in_dir: Path) -> tuple[list[str], list[list[float]]]:
    """Correlation matrix with its row/column labels in file order."""
    path = in_dir / HEATMAP_FILE
    rows = _read_csv(path, ["label"])
    if not rows:
        raise RenderInputError(f"{path.name}: no matrix rows")
    labels = [c for c in rows[0].keys() if c != "label"]
    row_labels = [r["label"] for r in rows]
    if row_labels != labels:
        raise RenderInputError(f"{path.name}: row order does not match column order")
    matrix = [[float(r[c]) for c in labels] for r in rows]
    return labels, matrix


def load_tree(in_dir: Path) -> dict:
    tree = _read_json(in_dir / TREE_FILE, ["labels", "linkage", "merges", "leaf_order"])
    for merge in tree["merges"]:
        for key in ("id", "left", "right", "height", "size"):
            if key not in merge:
                raise RenderInputError(f"{TREE_FILE}: merge entry missing key '{key}'")
    return tree


def load_mds(in_dir: Path) -> list[dict[str, str]]:
    """Embedding rows; topic rows must carry a known sentiment category."""
    rows = _read_csv(in_dir / MDS_FILE, ["label", "kind", "x", "y", "nearest_sentiment"])
    for row in rows:
        if row["kind"] == "topic" and row["nearest_sentiment"] not in SENTIMENT_COLORS:
            raise RenderInputError(
                f"{MDS_FILE}: unknown sentiment category "
                f"'{row['nearest_sentiment']}' on topic '{row['label']}'"
            )
    return rows
