"""Per-day series assembly and locally weighted polynomial smoothing.

Days run 1..t_max. A day with no documents is missing, never zero: topic
rows and sentiment rows both carry NaN there so downstream consumers must
treat absence explicitly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .annotate import DaySegment
from .blockmodel import TopicModel
from .sentiment import DENOMINATOR_MEMBERSHIP, EMOTION_CATEGORIES, EmotionCounts

DEFAULT_T_MAX = 14
DEFAULT_SPAN = 0.75
DEFAULT_DEGREE = 2
DEFAULT_GRID_POINTS = 200


@dataclass
class DailySeries:
    """Topic and sentiment trends on the shared 1..t_max day axis."""

    days: np.ndarray
    topic_labels: tuple[str, ...]
    topic_means: np.ndarray
    sentiment_labels: tuple[str, ...]
    sentiment_props: np.ndarray
    doc_counts: np.ndarray

    def t_max(self) -> int:
        return len(self.days)


@dataclass
class SmoothedCurve:
    grid: np.ndarray
    values: np.ndarray
    span: float
    degree: int
    fallback: np.ndarray  # True where the local fit degenerated to a weighted mean


def sentiment_matrix(
    emotions_by_day: dict[int, EmotionCounts],
    t_max: int = DEFAULT_T_MAX,
    denominator: str = DENOMINATOR_MEMBERSHIP,
) -> np.ndarray:
    """Proportion rows on the 1..t_max axis, NaN where a day has no signal."""
    matrix = np.full((t_max, len(EMOTION_CATEGORIES)), np.nan)
    for day, emotion in emotions_by_day.items():
        if not 1 <= day <= t_max:
            continue
        props = emotion.proportions(denominator)
        if props is not None:
            matrix[day - 1] = [props[c] for c in EMOTION_CATEGORIES]
    return matrix


def build_series(
    model: TopicModel,
    segments: list[DaySegment],
    sentiment_props: np.ndarray,
    t_max: int = DEFAULT_T_MAX,
    weights: np.ndarray | None = None,
) -> DailySeries:
    """Average p(topic | document) per day and align sentiment proportions.

    Document rows are matched to days through the model's segment indices;
    segments without a day stay out of every series. `sentiment_props` must
    already be a (t_max, 10) proportion matrix (see sentiment_matrix).
    When `weights` is given (one positive value per document, e.g. token
    counts) the per-day means are weighted instead of plain averages.
    """
    if t_max < 1:
        raise ValueError("t_max must be at least 1")
    sentiment = np.asarray(sentiment_props, dtype=np.float64)
    if sentiment.shape != (t_max, len(EMOTION_CATEGORIES)):
        raise ValueError("sentiment_props must be (t_max, n_categories)")
    n_docs = len(model.doc_segment_indices)
    if weights is None:
        doc_weights = np.ones(n_docs, dtype=np.float64)
    else:
        doc_weights = np.asarray(weights, dtype=np.float64)
        if doc_weights.shape != (n_docs,):
            raise ValueError("weights must hold one value per document")
        if not np.all(np.isfinite(doc_weights)) or np.any(doc_weights <= 0):
            raise ValueError("weights must be finite and positive")
    n_topics = model.n_topics
    days = np.arange(1, t_max + 1)

    sums = np.zeros((t_max, n_topics), dtype=np.float64)
    weight_sums = np.zeros(t_max, dtype=np.float64)
    counts = np.zeros(t_max, dtype=np.int64)
    for row, segment_index in enumerate(model.doc_segment_indices):
        day = segments[segment_index].day
        if day is None or not 1 <= day <= t_max:
            continue
        sums[day - 1] += doc_weights[row] * model.p_topic_given_document[row]
        weight_sums[day - 1] += doc_weights[row]
        counts[day - 1] += 1

    topic_means = np.full((t_max, n_topics), np.nan)
    present = counts > 0
    topic_means[present] = sums[present] / weight_sums[present, None]

    return DailySeries(
        days=days,
        topic_labels=tuple(f"topic_{t + 1}" for t in range(n_topics)),
        topic_means=topic_means,
        sentiment_labels=EMOTION_CATEGORIES,
        sentiment_props=sentiment,
        doc_counts=counts,
    )


def loess(
    points: np.ndarray | list[tuple[float, float]],
    span: float = DEFAULT_SPAN,
    degree: int = DEFAULT_DEGREE,
    grid: np.ndarray | None = None,
) -> SmoothedCurve:
    """Tricube-weighted local polynomial regression on a fixed grid.

    For each grid point the span * n nearest observations get weights
    (1 - (d/h)^3)^3 with h the bandwidth to the farthest neighbor, and a
    degree-`degree` polynomial is fit by weighted least squares. Evaluation
    clamps to the observed x range, so the curve never extrapolates. Grid
    points where the local design is rank-deficient fall back to the
    weighted mean and are flagged.
    """
    pts = np.asarray(points, dtype=np.float64)
    if pts.ndim != 2 or pts.shape[1] != 2:
        raise ValueError("points must be an (n, 2) array of (x, y)")
    n = pts.shape[0]
    if degree < 0:
        raise ValueError("degree must be non-negative")
    if n < degree + 1:
        raise ValueError(f"need at least {degree + 1} points for degree {degree}")
    if not 0 < span <= 1:
        raise ValueError("span must lie in (0, 1]")
    x = pts[:, 0]
    y = pts[:, 1]
    if grid is None:
        grid = np.linspace(x.min(), x.max(), DEFAULT_GRID_POINTS)
    grid = np.asarray(grid, dtype=np.float64)
    if grid.ndim != 1 or len(grid) == 0 or np.any(np.diff(grid) <= 0):
        raise ValueError("grid must be one-dimensional and strictly increasing")

    q = max(degree + 1, int(math.ceil(span * n)))
    q = min(q, n)
    values = np.empty(len(grid))
    fallback = np.zeros(len(grid), dtype=bool)
    x_lo, x_hi = float(x.min()), float(x.max())

    for g, raw_x0 in enumerate(grid):
        x0 = min(max(float(raw_x0), x_lo), x_hi)
        dist = np.abs(x - x0)
        # Stable nearest-q selection: ties broken by input order.
        order = np.lexsort((np.arange(n), dist))
        chosen = order[:q]
        h = dist[chosen[-1]]
        if h == 0:
            weights = np.ones(q)
        else:
            weights = (1 - (dist[chosen] / h) ** 3) ** 3
        if weights.sum() <= 0:
            weights = np.ones(q)
        sqrt_w = np.sqrt(weights)
        dx = x[chosen] - x0
        design = np.vander(dx, degree + 1, increasing=True)
        coef, _, rank, _ = np.linalg.lstsq(design * sqrt_w[:, None], y[chosen] * sqrt_w, rcond=None)
        if rank < degree + 1:
            values[g] = float(np.sum(weights * y[chosen]) / weights.sum())
            fallback[g] = True
        else:
            values[g] = float(coef[0])

    return SmoothedCurve(grid=grid, values=values, span=span, degree=degree, fallback=fallback)
