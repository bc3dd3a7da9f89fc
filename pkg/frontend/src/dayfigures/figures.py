"""The five figure builders and the render entry point.

Rendering is read-only over the artifact directory and fully deterministic:
word placement is computed from the word list alone, never from a random
generator or a measured text extent.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from pathlib import Path

import matplotlib

matplotlib.use("Agg")  # batch rendering must not require a display

import matplotlib.pyplot as plt
import numpy as np

from . import io
from .colors import SENTIMENT_COLORS
from .io import RenderInputError

KINDS = ("day_histogram", "topic_panels", "sentiment_curves", "heatmap", "mds_map")

MAX_WORD_PT = 26.0
CLOUD_WORDS = 20
_TOPIC_NUM = re.compile(r"^topic_(\d+)$")


@dataclass(frozen=True)
class FigureSpec:
    kind: str
    in_dir: Path
    out_path: Path


def word_font_sizes(ps: list[float], max_pt: float = MAX_WORD_PT) -> list[float]:
    """Font sizes proportional to probability, largest word at max_pt."""
    if not ps:
        return []
    p_max = max(ps)
    if p_max <= 0:
        return [max_pt] * len(ps)
    return [max_pt * p / p_max for p in ps]


def _topic_order(label: str) -> tuple[int, str]:
    match = _TOPIC_NUM.match(label)
    return (int(match.group(1)), label) if match else (1 << 30, label)


def _draw_cloud(ax, words: list[tuple[str, float]], color: str, gid: str) -> None:
    """Flow words left to right in weight order, sized by probability."""
    words = words[:CLOUD_WORDS]
    sizes = word_font_sizes([p for _, p in words])
    x, y, row_height = 0.0, 0.98, 0.0
    for (word, _), size in zip(words, sizes):
        width = size * (len(word) + 1) / 384.0
        if x > 0.0 and x + width > 1.0:
            x = 0.0
            y -= row_height * 1.45
            row_height = 0.0
        text = ax.text(x, y, word, fontsize=max(size, 2.0), color=color,
                       ha="left", va="top", transform=ax.transAxes)
        text.set_gid(gid)
        x += width
        row_height = max(row_height, size / 150.0)
    ax.set_axis_off()


def day_histogram_figure(in_dir: Path):
    days, counts, fractions = io.load_day_histogram(in_dir)
    fig, ax = plt.subplots(figsize=(8, 4))
    ax.bar(days, counts, color="#5B7FA6")
    ax.set_xlabel("day since symptom onset")
    ax.set_ylabel("day mentions")
    twin = ax.twinx()
    twin.plot(days, fractions, color="#B7001F", marker="o", linewidth=1.2)
    twin.set_ylabel("fraction of annotated posts mentioning the day")
    twin.set_ylim(0.0, 1.05)
    fig.tight_layout()
    return fig


def topic_panels_figure(in_dir: Path):
    series = io.load_series(in_dir)
    curves = io.load_curves(in_dir)
    clouds = io.load_wordclouds(in_dir)
    labels = sorted({r["label"] for r in series if r["kind"] == "topic"}, key=_topic_order)
    if not labels:
        raise RenderInputError(f"{io.SERIES_FILE}: no topic rows")

    fig, axes = plt.subplots(
        len(labels), 2, figsize=(9.0, 2.6 * len(labels)),
        squeeze=False, gridspec_kw={"width_ratios": [1.0, 1.5]},
    )
    for row, label in enumerate(labels):
        cloud_ax, curve_ax = axes[row]
        _draw_cloud(cloud_ax, clouds.get(label, []), color="#333333", gid="panel-word")
        cloud_ax.set_title(label, fontsize=10)

        observed = [
            (int(r["day"]), float(r["value"]))
            for r in series
            if r["kind"] == "topic" and r["label"] == label and r["value"] != ""
        ]
        if observed:
            xs, ys = zip(*sorted(observed))
            curve_ax.plot(xs, ys, "o", color="#999999", markersize=4)
        if ("topic", label) in curves:
            xs, ys = curves[("topic", label)]
            curve_ax.plot(xs, ys, color="#2F5D8A", linewidth=1.6)
        curve_ax.set_xlabel("day")
        curve_ax.set_ylabel("mean density")
    fig.tight_layout()
    return fig


def sentiment_curves_figure(in_dir: Path):
    curves = io.load_curves(in_dir)
    sentiment = [(label, xy) for (kind, label), xy in curves.items() if kind == "sentiment"]
    if not sentiment:
        raise RenderInputError(f"{io.CURVES_FILE}: no sentiment rows")
    fig, ax = plt.subplots(figsize=(8.5, 4.5))
    for label, (xs, ys) in sorted(sentiment):
        if label not in SENTIMENT_COLORS:
            raise RenderInputError(
                f"{io.CURVES_FILE}: unknown sentiment category '{label}'"
            )
        ax.plot(xs, ys, color=SENTIMENT_COLORS[label], linewidth=1.6, label=label)
    ax.set_xlabel("day since symptom onset")
    ax.set_ylabel("emotion proportion")
    ax.legend(loc="center left", bbox_to_anchor=(1.01, 0.5), frameon=False)
    fig.tight_layout()
    return fig


def _draw_dendrogram(ax, tree: dict) -> None:
    leaf_order = tree["leaf_order"]
    position = {i: float(leaf_order.index(label)) for i, label in enumerate(tree["labels"])}
    height = {i: 0.0 for i in range(len(tree["labels"]))}
    for merge in tree["merges"]:
        x1, x2 = position[merge["left"]], position[merge["right"]]
        y1, y2 = height[merge["left"]], height[merge["right"]]
        top = merge["height"]
        ax.plot([x1, x1, x2, x2], [y1, top, top, y2], color="#444444", linewidth=1.0)
        position[merge["id"]] = (x1 + x2) / 2.0
        height[merge["id"]] = top
    ax.set_xlim(-0.5, len(leaf_order) - 0.5)
    roof = max((m["height"] for m in tree["merges"]), default=1.0)
    ax.set_ylim(0.0, roof * 1.05 if roof > 0 else 1.0)
    ax.set_xticks([])
    ax.set_ylabel("1 - r", fontsize=8)
    for side in ("top", "right", "bottom"):
        ax.spines[side].set_visible(False)


def heatmap_figure(in_dir: Path):
    labels, matrix = io.load_heatmap(in_dir)
    tree = io.load_tree(in_dir)
    if labels != tree["leaf_order"]:
        raise RenderInputError(
            f"{io.HEATMAP_FILE} columns do not match {io.TREE_FILE} leaf order"
        )
    n = len(labels)
    side = max(6.5, 0.45 * n + 3.0)
    fig = plt.figure(figsize=(side, side + 1.2))
    dendro_ax = fig.add_axes([0.28, 0.78, 0.50, 0.18])
    heat_ax = fig.add_axes([0.28, 0.14, 0.50, 0.60])
    cbar_ax = fig.add_axes([0.82, 0.14, 0.03, 0.60])
    _draw_dendrogram(dendro_ax, tree)
    image = heat_ax.imshow(np.array(matrix), cmap="RdBu_r", vmin=-1.0, vmax=1.0)
    heat_ax.set_xticks(range(n), labels, rotation=90, fontsize=8)
    heat_ax.set_yticks(range(n), labels, fontsize=8)
    fig.colorbar(image, cax=cbar_ax, label="pearson r")
    return fig


def mds_map_figure(in_dir: Path):
    rows = io.load_mds(in_dir)
    clouds = io.load_wordclouds(in_dir)
    fig, ax = plt.subplots(figsize=(9.0, 7.5))
    for row in rows:
        x, y = float(row["x"]), float(row["y"])
        if row["kind"] == "sentiment":
            if row["label"] not in SENTIMENT_COLORS:
                raise RenderInputError(
                    f"{io.MDS_FILE}: unknown sentiment category '{row['label']}'"
                )
            color = SENTIMENT_COLORS[row["label"]]
            ax.scatter([x], [y], color=color, s=70, zorder=3, gid="sentiment-marker")
            text = ax.annotate(row["label"], (x, y), xytext=(0, 9),
                               textcoords="offset points", ha="center",
                               fontsize=10, color=color)
            text.set_gid("sentiment-label")
        else:
            color = SENTIMENT_COLORS[row["nearest_sentiment"]]
            ax.scatter([x], [y], color=color, s=25, marker="s", zorder=3,
                       gid="topic-marker")
            words = clouds.get(row["label"]) or [(row["label"], 1.0)]
            words = words[:6]
            sizes = word_font_sizes([p for _, p in words], max_pt=13.0)
            line_heights = [max(s, 5.0) * 1.15 for s in sizes]
            cursor = sum(line_heights) / 2.0
            for (word, _), size, line in zip(words, sizes, line_heights):
                cursor -= line / 2.0
                text = ax.annotate(word, (x, y), xytext=(0, cursor),
                                   textcoords="offset points", ha="center",
                                   va="center", fontsize=max(size, 4.0), color=color)
                text.set_gid("topic-word")
                cursor -= line / 2.0
    ax.set_xlabel("axis 1")
    ax.set_ylabel("axis 2")
    ax.set_aspect("equal", adjustable="datalim")
    fig.tight_layout()
    return fig


_BUILDERS = {
    "day_histogram": day_histogram_figure,
    "topic_panels": topic_panels_figure,
    "sentiment_curves": sentiment_curves_figure,
    "heatmap": heatmap_figure,
    "mds_map": mds_map_figure,
}


def build_figure(kind: str, in_dir: Path):
    if kind not in _BUILDERS:
        raise RenderInputError(
            f"unknown figure kind '{kind}'; expected one of {', '.join(KINDS)}"
        )
    return _BUILDERS[kind](Path(in_dir))


def render(spec: FigureSpec) -> Path:
    """Build one figure and write it to spec.out_path."""
    figure = build_figure(spec.kind, spec.in_dir)
    out_path = Path(spec.out_path)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    figure.savefig(out_path, dpi=150)
    plt.close(figure)
    return out_path
