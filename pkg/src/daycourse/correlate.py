"""Correlation of day series, hierarchical clustering, and 2-D embedding.

Correlations are Pearson over pairwise-complete days. Dissimilarity is
1 - correlation. Clustering is agglomerative (average linkage by default)
with lexicographic tie-breaks so output order never depends on dict or
floating-point iteration order. The embedding is SMACOF majorization
started from classical scaling, centered and rotated to principal axes.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .sentiment import EMOTION_CATEGORIES

LINKAGE_AVERAGE = "average"
LINKAGE_COMPLETE = "complete"

KIND_TOPIC = "topic"
KIND_SENTIMENT = "sentiment"

MDS_MAX_ITER = 1000
MDS_REL_TOL = 1e-9


def pearson(x: np.ndarray, y: np.ndarray) -> float:
    """Pearson correlation over positions where both series are observed."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape or x.ndim != 1:
        raise ValueError("series must be one-dimensional and equally long")
    mask = ~(np.isnan(x) | np.isnan(y))
    if mask.sum() < 2:
        raise ValueError("fewer than 2 paired observations")
    xs = x[mask] - x[mask].mean()
    ys = y[mask] - y[mask].mean()
    sx = np.sqrt(np.sum(xs * xs))
    sy = np.sqrt(np.sum(ys * ys))
    if sx == 0 or sy == 0:
        raise ValueError("correlation undefined for a constant series")
    return float(np.sum(xs * ys) / (sx * sy))


@dataclass
class CorrelationMatrix:
    labels: tuple[str, ...]
    kinds: tuple[str, ...]
    values: np.ndarray
    dropped: list[tuple[str, str]] = field(default_factory=list)

    def dissimilarity(self) -> np.ndarray:
        return to_dissimilarity(self.values)


def to_dissimilarity(correlation: np.ndarray | float) -> np.ndarray | float:
    return 1.0 - correlation


def correlation_matrix(
    labels: list[str],
    kinds: list[str],
    rows: np.ndarray,
) -> CorrelationMatrix:
    """All-pairs Pearson matrix with undefined series dropped, not guessed.

    A series that is constant, has under 2 observations, or shares under 2
    observed days with some surviving series is removed with a warning and
    recorded in `dropped`.
    """
    rows = np.asarray(rows, dtype=np.float64)
    if rows.ndim != 2 or rows.shape[0] != len(labels) or len(kinds) != len(labels):
        raise ValueError("labels, kinds, and rows must align")

    keep: list[int] = []
    dropped: list[tuple[str, str]] = []
    for i, label in enumerate(labels):
        observed = rows[i][~np.isnan(rows[i])]
        if len(observed) < 2:
            reason = "fewer than 2 observed days"
        elif np.all(observed == observed[0]):
            reason = "constant series"
        else:
            keep.append(i)
            continue
        dropped.append((label, reason))
        warnings.warn(f"dropping series {label!r}: {reason}", stacklevel=2)

    while True:
        m = len(keep)
        values = np.eye(m)
        failures = np.zeros(m, dtype=np.int64)
        pair_ok = True
        for a in range(m):
            for b in range(a + 1, m):
                try:
                    rho = pearson(rows[keep[a]], rows[keep[b]])
                except ValueError:
                    values[a, b] = values[b, a] = np.nan
                    failures[a] += 1
                    failures[b] += 1
                    pair_ok = False
                else:
                    values[a, b] = values[b, a] = rho
        if pair_ok:
            break
        # Drop the series participating in the most undefined pairs;
        # ties go to the lexicographically smaller label.
        worst = min(range(m), key=lambda a: (-failures[a], labels[keep[a]]))
        label = labels[keep[worst]]
        dropped.append((label, "undefined correlation with surviving series"))
        warnings.warn(
            f"dropping series {label!r}: undefined correlation with surviving series",
            stacklevel=2,
        )
        del keep[worst]

    return CorrelationMatrix(
        labels=tuple(labels[i] for i in keep),
        kinds=tuple(kinds[i] for i in keep),
        values=values,
        dropped=dropped,
    )


@dataclass
class ClusterTree:
    """Merge history of agglomerative clustering.

    Node ids 0..n-1 are leaves in label order; internal nodes continue from
    n in merge order. `leaf_order` visits tighter children first, breaking
    height ties by the smallest label inside each child.
    """

    labels: tuple[str, ...]
    linkage: str
    merges: list[dict]
    leaf_order: tuple[str, ...]


def cluster(
    dissimilarity: np.ndarray,
    labels: list[str],
    linkage: str = LINKAGE_AVERAGE,
) -> ClusterTree:
    d = np.asarray(dissimilarity, dtype=np.float64)
    n = len(labels)
    if n < 2:
        raise ValueError("clustering needs at least 2 series")
    if d.shape != (n, n):
        raise ValueError("dissimilarity matrix must be square over the labels")
    if not np.allclose(d, d.T, atol=1e-9) or np.any(np.abs(np.diag(d)) > 1e-12):
        raise ValueError("dissimilarity matrix must be symmetric with a zero diagonal")
    if linkage not in (LINKAGE_AVERAGE, LINKAGE_COMPLETE):
        raise ValueError(f"unknown linkage {linkage!r}")

    # Per active cluster: size, smallest member label, children, height.
    size = {i: 1 for i in range(n)}
    min_label = {i: labels[i] for i in range(n)}
    height = {i: 0.0 for i in range(n)}
    children: dict[int, tuple[int, int]] = {}
    dist: dict[tuple[int, int], float] = {}
    for a in range(n):
        for b in range(a + 1, n):
            dist[(a, b)] = float(d[a, b])

    active = set(range(n))
    merges: list[dict] = []
    next_id = n
    last_height = 0.0
    while len(active) > 1:
        best = min(
            dist.items(),
            key=lambda kv: (kv[1], min(min_label[kv[0][0]], min_label[kv[0][1]]),
                            max(min_label[kv[0][0]], min_label[kv[0][1]])),
        )
        (a, b), merge_d = best
        del dist[(a, b)]
        if min_label[b] < min_label[a]:
            a, b = b, a
        new = next_id
        next_id += 1
        if merge_d < last_height - 1e-9:
            raise ValueError("linkage produced non-monotone merge heights")
        last_height = max(last_height, merge_d)
        size[new] = size[a] + size[b]
        min_label[new] = min(min_label[a], min_label[b])
        height[new] = merge_d
        children[new] = (a, b)
        merges.append({"id": new, "left": a, "right": b, "height": merge_d, "size": size[new]})

        for other in sorted(active - {a, b}):
            d_ao = dist.pop((min(a, other), max(a, other)))
            d_bo = dist.pop((min(b, other), max(b, other)))
            if linkage == LINKAGE_AVERAGE:
                merged = (size[a] * d_ao + size[b] * d_bo) / (size[a] + size[b])
            else:
                merged = max(d_ao, d_bo)
            dist[(min(new, other), max(new, other))] = merged
        active -= {a, b}
        active.add(new)

    def visit(node: int) -> list[str]:
        if node < n:
            return [labels[node]]
        left, right = children[node]
        ordered = sorted((left, right), key=lambda c: (height[c], min_label[c]))
        return visit(ordered[0]) + visit(ordered[1])

    root = next_id - 1
    return ClusterTree(
        labels=tuple(labels),
        linkage=linkage,
        merges=merges,
        leaf_order=tuple(visit(root)),
    )


@dataclass
class MdsEmbedding:
    labels: tuple[str, ...]
    kinds: tuple[str, ...]
    coordinates: np.ndarray
    stress: float
    n_iter: int


def _classical_init(d: np.ndarray, dims: int) -> np.ndarray:
    n = d.shape[0]
    j = np.eye(n) - np.ones((n, n)) / n
    b = -0.5 * j @ (d * d) @ j
    eigval, eigvec = np.linalg.eigh(b)
    order = np.argsort(eigval)[::-1][:dims]
    coords = np.zeros((n, dims))
    for axis, idx in enumerate(order):
        if eigval[idx] > 0:
            coords[:, axis] = eigvec[:, idx] * np.sqrt(eigval[idx])
    return coords


def _stress(coords: np.ndarray, d: np.ndarray) -> float:
    delta = np.sqrt(np.maximum(0.0, _sq_dists(coords)))
    diff = d - delta
    return float(np.sum(np.triu(diff, 1) ** 2))


def _sq_dists(coords: np.ndarray) -> np.ndarray:
    sq = np.sum(coords * coords, axis=1)
    return sq[:, None] + sq[None, :] - 2 * coords @ coords.T


def mds(
    dissimilarity: np.ndarray,
    labels: list[str],
    kinds: list[str] | None = None,
    dims: int = 2,
    seed: int = 0,
) -> MdsEmbedding:
    """Metric MDS by SMACOF majorization with uniform weights.

    Stops when the relative stress decrease falls under 1e-9 or after 1000
    iterations. The result is centered, rotated to principal axes, and
    sign-fixed so the first label lands in the non-negative quadrant.
    """
    d = np.asarray(dissimilarity, dtype=np.float64)
    n = len(labels)
    if d.shape != (n, n):
        raise ValueError("dissimilarity matrix must be square over the labels")
    if not np.allclose(d, d.T, atol=1e-9) or np.any(np.abs(np.diag(d)) > 1e-12):
        raise ValueError("dissimilarity matrix must be symmetric with a zero diagonal")
    if np.any(d < 0):
        raise ValueError("dissimilarities must be non-negative")
    if kinds is None:
        kinds = [KIND_TOPIC] * n
    if len(kinds) != n:
        raise ValueError("kinds must align with labels")
    if n == 1:
        return MdsEmbedding(tuple(labels), tuple(kinds), np.zeros((1, dims)), 0.0, 0)

    coords = _classical_init(d, dims)
    # Coincident starting points with nonzero target distance stall the
    # update; a seeded jitter separates them deterministically.
    delta0 = np.sqrt(np.maximum(0.0, _sq_dists(coords)))
    np.fill_diagonal(delta0, 1.0)
    if np.any((delta0 <= 1e-12) & (d > 0)):
        rng = np.random.default_rng(seed)
        coords = coords + rng.normal(scale=1e-6, size=coords.shape)

    stress = _stress(coords, d)
    n_iter = 0
    for n_iter in range(1, MDS_MAX_ITER + 1):
        delta = np.sqrt(np.maximum(0.0, _sq_dists(coords)))
        np.fill_diagonal(delta, 1.0)
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = np.where(delta > 1e-12, d / delta, 0.0)
        b = -ratio
        np.fill_diagonal(b, 0.0)
        np.fill_diagonal(b, -b.sum(axis=1))
        coords = (b @ coords) / n
        coords = coords - coords.mean(axis=0)
        new_stress = _stress(coords, d)
        if new_stress > stress + 1e-9:
            raise ValueError("stress increased during majorization")
        if stress == 0.0 or (stress - new_stress) / max(stress, 1e-300) < MDS_REL_TOL:
            stress = new_stress
            break
        stress = new_stress

    coords = coords - coords.mean(axis=0)
    _, _, vt = np.linalg.svd(coords, full_matrices=False)
    coords = coords @ vt.T
    if coords.shape[1] < dims:
        coords = np.hstack([coords, np.zeros((n, dims - coords.shape[1]))])
    for axis in range(dims):
        column = coords[:, axis]
        for value in column:
            if abs(value) > 1e-12:
                if value < 0:
                    coords[:, axis] = -column
                break

    return MdsEmbedding(tuple(labels), tuple(kinds), coords, stress, n_iter)


def nearest_sentiment_coloring(embedding: MdsEmbedding) -> dict[str, str]:
    """Map each topic label to its closest sentiment label in the embedding.

    Distance ties resolve to the alphabetically first sentiment. All ten
    emotion categories must be present among the sentiment points.
    """
    sentiments = [
        (label, embedding.coordinates[i])
        for i, (label, kind) in enumerate(zip(embedding.labels, embedding.kinds))
        if kind == KIND_SENTIMENT
    ]
    present = {label for label, _ in sentiments}
    missing = [c for c in EMOTION_CATEGORIES if c not in present]
    if missing:
        raise ValueError(f"embedding is missing sentiment points: {', '.join(missing)}")

    coloring: dict[str, str] = {}
    for i, (label, kind) in enumerate(zip(embedding.labels, embedding.kinds)):
        if kind != KIND_SENTIMENT:
            point = embedding.coordinates[i]
            best = min(
                sentiments,
                key=lambda item: (float(np.sum((item[1] - point) ** 2)), item[0]),
            )
            coloring[label] = best[0]
    return coloring
