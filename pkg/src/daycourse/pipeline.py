"""Stage orchestration, configuration, artifact files, and the run manifest.

Stages communicate only through files in the output directory, so any stage
can run in a fresh process once its predecessors have written their
artifacts. All artifacts except manifest.json are byte-deterministic for a
fixed configuration and input (the manifest carries wall-clock timings).
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import math
import time
import warnings
from dataclasses import dataclass, fields
from importlib import resources
from pathlib import Path

import numpy as np

from . import __version__
from .annotate import AnnotationReport, DaySegment, annotate_corpus
from .blockmodel import (
    TopicModel,
    build_graph,
    choose_level,
    extract_topics,
    infer,
)
from .correlate import (
    KIND_SENTIMENT,
    KIND_TOPIC,
    cluster,
    correlation_matrix,
    mds,
    nearest_sentiment_coloring,
)
from .errors import ConfigError, EmptyCorpusError, PipelineStageError
from .ingest import IngestConfig, RawPost, fetch_posts_detailed, filter_flair
from .sentiment import (
    DENOMINATOR_CARRIER,
    DENOMINATOR_MEMBERSHIP,
    EMOTION_CATEGORIES,
    load_lexicon,
    score_day,
)
from .series import build_series, loess
from .textprep import BagOfWords, Corpus, Vocabulary, build_corpus, load_stopwords, remove_stopwords, tokenize

STAGES = ("fetch", "annotate", "prep", "model", "sentiment", "series", "correlate")

POSTS_FILE = "posts.jsonl"
SEGMENTS_FILE = "segments.jsonl"
REPORT_FILE = "report.json"
DAY_HISTOGRAM_FILE = "day_histogram.csv"
CORPUS_FILE = "corpus.json"
TOPICS_FILE = "topics.json"
WORDCLOUDS_FILE = "wordclouds.json"
SENTIMENT_FILE = "sentiment.csv"
SERIES_FILE = "series.csv"
CURVES_FILE = "curves.csv"
HEATMAP_FILE = "heatmap.csv"
TREE_FILE = "tree.json"
MDS_FILE = "mds.csv"
MANIFEST_FILE = "manifest.json"

LEVEL_AUTO = "auto"
TOPIC_MEAN_UNWEIGHTED = "unweighted"
TOPIC_MEAN_LENGTH_WEIGHTED = "length_weighted"

_BUNDLED_LEXICON = "toy_emotion_lexicon.txt"
_BUNDLED_STOPWORDS = "stopwords_en.txt"


@dataclass(frozen=True)
class PipelineConfig:
    """Every knob of the pipeline, file-loadable and CLI-overridable."""

    source: str = ""
    subreddit: str = "COVID19positive"
    flairs: tuple[str, ...] = ("Tested Positive - Me", "Tested Positive")
    after: int = 0
    before: int = 4102444800
    page_size: int = 100
    delay_ms: int = 200
    max_attempts: int = 3
    out_dir: str = "out"
    stopwords: str = ""
    lexicon: str = ""
    t_max: int = 14
    seed: int = 1
    sweeps: int = 1000
    init_passes: int = 10
    max_levels: int = 10
    refine_rounds: int = 5
    level: str = LEVEL_AUTO
    denominator: str = DENOMINATOR_MEMBERSHIP
    span: float = 0.75
    degree: int = 2
    grid_points: int = 200
    linkage: str = "average"
    mds_seed: int = 0
    top_words: int = 30
    topic_mean: str = TOPIC_MEAN_UNWEIGHTED
    exclude: tuple[str, ...] = ("feeling", "positive", "negative")

    def to_dict(self) -> dict:
        out = {}
        for f in fields(self):
            value = getattr(self, f.name)
            out[f.name] = list(value) if isinstance(value, tuple) else value
        return out


_INT_KEYS = {
    "after", "before", "page_size", "delay_ms", "max_attempts", "t_max",
    "seed", "sweeps", "init_passes", "max_levels", "refine_rounds", "degree", "grid_points",
    "mds_seed", "top_words",
}
_FLOAT_KEYS = {"span"}
_STR_KEYS = {
    "source", "subreddit", "out_dir", "stopwords", "lexicon", "level",
    "denominator", "linkage", "topic_mean",
}
_LIST_KEYS = {"flairs", "exclude"}


def _coerce(key: str, raw: str, where: str) -> object:
    if key in _LIST_KEYS:
        return tuple(p.strip() for p in raw.split(",") if p.strip())
    if key in _INT_KEYS:
        try:
            return int(raw)
        except ValueError:
            raise ConfigError(f"{where}: {key} must be an integer, got {raw!r}") from None
    if key in _FLOAT_KEYS:
        try:
            return float(raw)
        except ValueError:
            raise ConfigError(f"{where}: {key} must be a number, got {raw!r}") from None
    if key in _STR_KEYS:
        return raw
    raise ConfigError(f"{where}: unknown config key {key!r}")


def _validate(config: PipelineConfig) -> PipelineConfig:
    if config.t_max < 1:
        raise ConfigError("t_max must be at least 1")
    if config.sweeps < 0 or config.init_passes < 0:
        raise ConfigError("sweeps and init_passes must be non-negative")
    if config.max_levels < 1:
        raise ConfigError("max_levels must be at least 1")
    if config.refine_rounds < 1:
        raise ConfigError("refine_rounds must be at least 1")
    if config.level != LEVEL_AUTO:
        try:
            if int(config.level) < 0:
                raise ValueError
        except ValueError:
            raise ConfigError(
                f"level must be {LEVEL_AUTO!r} or a non-negative integer, got {config.level!r}"
            ) from None
    if config.denominator not in (DENOMINATOR_MEMBERSHIP, DENOMINATOR_CARRIER):
        raise ConfigError(f"unknown denominator {config.denominator!r}")
    if not 0 < config.span <= 1:
        raise ConfigError("span must lie in (0, 1]")
    if config.degree < 0:
        raise ConfigError("degree must be non-negative")
    if config.grid_points < 2:
        raise ConfigError("grid_points must be at least 2")
    if config.linkage not in ("average", "complete"):
        raise ConfigError(f"unknown linkage {config.linkage!r}")
    if config.page_size < 1 or config.max_attempts < 1 or config.delay_ms < 0:
        raise ConfigError("page_size and max_attempts must be positive, delay_ms non-negative")
    if config.top_words < 1:
        raise ConfigError("top_words must be at least 1")
    if config.before <= config.after:
        raise ConfigError("before must be greater than after")
    if config.topic_mean not in (TOPIC_MEAN_UNWEIGHTED, TOPIC_MEAN_LENGTH_WEIGHTED):
        raise ConfigError(f"unknown topic_mean {config.topic_mean!r}")
    if config.source and not config.source.startswith(("http://", "https://")):
        if not Path(config.source).is_file():
            raise ConfigError(f"source file not found: {config.source}")
    if config.stopwords and not Path(config.stopwords).is_file():
        raise ConfigError(f"stopwords file not found: {config.stopwords}")
    if config.lexicon and not Path(config.lexicon).is_file():
        raise ConfigError(f"lexicon file not found: {config.lexicon}")
    return config


def load_config(
    path: str | Path | None = None,
    overrides: dict[str, str] | None = None,
) -> PipelineConfig:
    """Defaults, then `key = value` lines from `path`, then overrides."""
    values: dict[str, object] = {}
    if path is not None:
        path = Path(path)
        if not path.is_file():
            raise ConfigError(f"config file not found: {path}")
        for line_no, line in enumerate(path.read_text(encoding="utf-8").splitlines(), 1):
            stripped = line.strip()
            if not stripped or stripped.startswith("#"):
                continue
            if "=" not in stripped:
                raise ConfigError(f"{path}:{line_no}: expected key = value, got {stripped!r}")
            key, _, raw = stripped.partition("=")
            values[key.strip()] = _coerce(key.strip(), raw.strip(), f"{path}:{line_no}")
    for key, raw in (overrides or {}).items():
        values[key] = _coerce(key, raw, "override")
    return _validate(PipelineConfig(**values))  # type: ignore[arg-type]


# ---------------------------------------------------------------------------
# Deterministic writers and readers


def _fmt(value: object) -> str:
    """CSV cell text. Floats print by repr for exact round-trips, NaN empty."""
    if value is None:
        return ""
    if isinstance(value, (float, np.floating)):
        v = float(value)
        return "" if math.isnan(v) else repr(v)
    return str(value)


def _write_csv(path: Path, header: list[str], rows: list[list[object]]) -> None:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_fmt(cell) for cell in row])
    path.write_text(buffer.getvalue(), encoding="utf-8")


def _read_csv(path: Path) -> tuple[list[str], list[dict[str, str]]]:
    with path.open(encoding="utf-8", newline="") as handle:
        reader = csv.DictReader(handle)
        return list(reader.fieldnames or []), list(reader)


def _write_json(path: Path, obj: object) -> None:
    path.write_text(json.dumps(obj, sort_keys=True, indent=2) + "\n", encoding="utf-8")


def _read_json(path: Path):
    return json.loads(path.read_text(encoding="utf-8"))


def _require(path: Path, producer: str) -> Path:
    if not path.is_file():
        raise FileNotFoundError(f"{path.name} is missing; run the {producer} stage first")
    return path


def _sha256(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def _input_digests(config: PipelineConfig) -> dict[str, dict[str, str]]:
    digests: dict[str, dict[str, str]] = {}
    source = Path(config.source)
    if config.source and not config.source.startswith(("http://", "https://")) and source.is_file():
        digests["source"] = {"path": str(source), "sha256": _sha256(source.read_bytes())}
    elif config.source:
        digests["source"] = {"path": config.source, "sha256": ""}
    if config.stopwords:
        p = Path(config.stopwords)
        if p.is_file():
            digests["stopwords"] = {"path": str(p), "sha256": _sha256(p.read_bytes())}
    else:
        data = resources.files("daycourse").joinpath(f"data/{_BUNDLED_STOPWORDS}").read_bytes()
        digests["stopwords"] = {"path": f"bundled:{_BUNDLED_STOPWORDS}", "sha256": _sha256(data)}
    if config.lexicon:
        p = Path(config.lexicon)
        if p.is_file():
            digests["lexicon"] = {"path": str(p), "sha256": _sha256(p.read_bytes())}
    else:
        data = resources.files("daycourse").joinpath(f"data/{_BUNDLED_LEXICON}").read_bytes()
        digests["lexicon"] = {"path": f"bundled:{_BUNDLED_LEXICON}", "sha256": _sha256(data)}
    return digests


def _lexicon_path(config: PipelineConfig) -> Path:
    if config.lexicon:
        return Path(config.lexicon)
    return Path(str(resources.files("daycourse").joinpath(f"data/{_BUNDLED_LEXICON}")))


# ---------------------------------------------------------------------------
# Stages. Each reads its predecessors' files and returns manifest counts.


def _read_posts(out: Path) -> list[RawPost]:
    posts = []
    for line in _require(out / POSTS_FILE, "fetch").read_text(encoding="utf-8").splitlines():
        record = json.loads(line)
        posts.append(RawPost(**record))
    return posts


def _read_segments(out: Path) -> list[DaySegment]:
    lines = _require(out / SEGMENTS_FILE, "annotate").read_text(encoding="utf-8").splitlines()
    return [DaySegment.from_json_dict(json.loads(line)) for line in lines]


def _stage_fetch(config: PipelineConfig, out: Path) -> dict:
    if not config.source:
        raise ConfigError("source must be set to fetch posts")
    report = fetch_posts_detailed(
        IngestConfig(
            source=config.source,
            subreddit=config.subreddit,
            flairs=config.flairs,
            after=config.after,
            before=config.before,
            page_size=config.page_size,
            delay_ms=config.delay_ms,
            max_attempts=config.max_attempts,
        )
    )
    with (out / POSTS_FILE).open("w", encoding="utf-8") as handle:
        for post in report.posts:
            handle.write(json.dumps(post.__dict__, sort_keys=True) + "\n")
    return {
        "n_posts": len(report.posts),
        "n_skipped": report.skipped,
        "n_pages": report.pages,
        "n_retries": report.attempts,
    }


DAY_HISTOGRAM_HEADER = ["day", "mention_count", "fraction_of_posts_mentioning"]


def day_histogram_rows(report: AnnotationReport) -> list[list[object]]:
    """One row per observed day: mention count and the share of annotated
    posts that mention the day at least once."""
    annotated = report.n_posts_annotated
    rows: list[list[object]] = []
    for day in sorted(report.day_mentions):
        mentioned_by = report.day_posts.get(day, 0)
        rows.append([
            day,
            report.day_mentions[day],
            (mentioned_by / annotated) if annotated else 0.0,
        ])
    return rows


def _stage_annotate(config: PipelineConfig, out: Path) -> dict:
    posts = _read_posts(out)
    kept = filter_flair(posts, config.flairs)
    segments, report = annotate_corpus(kept)
    with (out / SEGMENTS_FILE).open("w", encoding="utf-8") as handle:
        for segment in segments:
            handle.write(json.dumps(segment.to_json_dict(), sort_keys=True) + "\n")
    _write_json(out / REPORT_FILE, report.to_json_dict())
    _write_csv(out / DAY_HISTOGRAM_FILE, DAY_HISTOGRAM_HEADER, day_histogram_rows(report))
    return {
        "n_posts_in": len(posts),
        "n_posts_kept": len(kept),
        "n_posts_annotated": report.n_posts_annotated,
        "n_segments": len(segments),
        "n_day_mentions": report.n_day_mentions,
        "n_coerced_to_day_one": report.coerced_to_day_one,
    }


def _stage_prep(config: PipelineConfig, out: Path) -> dict:
    segments = _read_segments(out)
    stopwords = load_stopwords(config.stopwords or None)
    corpus = build_corpus(segments, stopwords)
    if not corpus.bags:
        raise EmptyCorpusError(
            "no documents: no segments survived annotation and stopword removal"
        )
    _write_json(
        out / CORPUS_FILE,
        {
            "vocabulary": list(corpus.vocabulary.tokens),
            "document_frequency": dict(sorted(corpus.vocabulary.document_frequency.items())),
            "bags": [
                {"segment_index": bag.segment_index,
                 "counts": {str(k): v for k, v in sorted(bag.counts.items())}}
                for bag in corpus.bags
            ],
            "n_dropped_empty": corpus.n_dropped_empty,
        },
    )
    return {
        "n_segments_in": len(segments),
        "n_documents": len(corpus.bags),
        "n_dropped_empty": corpus.n_dropped_empty,
        "vocabulary_size": len(corpus.vocabulary),
        "n_tokens": sum(bag.total() for bag in corpus.bags),
    }


def _load_corpus(out: Path) -> Corpus:
    data = _read_json(_require(out / CORPUS_FILE, "prep"))
    tokens = tuple(data["vocabulary"])
    vocabulary = Vocabulary(
        tokens=tokens,
        index={t: i for i, t in enumerate(tokens)},
        document_frequency=dict(data["document_frequency"]),
    )
    bags = tuple(
        BagOfWords(
            segment_index=bag["segment_index"],
            counts={int(k): v for k, v in bag["counts"].items()},
        )
        for bag in data["bags"]
    )
    return Corpus(vocabulary=vocabulary, bags=bags, n_dropped_empty=data["n_dropped_empty"])


def _stage_model(config: PipelineConfig, out: Path) -> dict:
    corpus = _load_corpus(out)
    graph = build_graph(corpus)
    state = infer(
        graph,
        seed=config.seed,
        sweeps=config.sweeps,
        init_passes=config.init_passes,
        max_levels=config.max_levels,
        refine_rounds=config.refine_rounds,
    )
    level = choose_level(state, graph) if config.level == LEVEL_AUTO else int(config.level)
    model = extract_topics(graph, state, level)

    _write_json(
        out / TOPICS_FILE,
        {
            "level": model.level,
            "n_topics": model.n_topics,
            "topic_labels": [f"topic_{t + 1}" for t in range(model.n_topics)],
            "sigma": state.sigma,
            "sigma_trace": list(state.sigma_trace),
            "block_counts": list(state.block_counts),
            "p_word_given_topic": model.p_word_given_topic.tolist(),
            "p_topic_given_document": model.p_topic_given_document.tolist(),
            "word_topics": model.word_topics.tolist(),
            "doc_segment_indices": list(model.doc_segment_indices),
            "doc_lengths": [int(v) for v in model.doc_lengths],
        },
    )

    vocabulary = corpus.vocabulary.tokens
    clouds = []
    for t in range(model.n_topics):
        weights = model.p_word_given_topic[t]
        ranked = sorted(
            ((float(weights[w]), vocabulary[w]) for w in np.flatnonzero(weights > 0)),
            key=lambda item: (-item[0], item[1]),
        )[: config.top_words]
        clouds.append({
            "label": f"topic_{t + 1}",
            "words": [{"word": word, "p": p} for p, word in ranked],
        })
    _write_json(out / WORDCLOUDS_FILE, {"topics": clouds})
    return {
        "n_documents": graph.n_docs,
        "n_words": graph.n_words,
        "n_edges": graph.total_edges,
        "n_levels": len(state.block_counts),
        "chosen_level": level,
        "n_topics": model.n_topics,
        "sigma": state.sigma,
    }


def _stage_sentiment(config: PipelineConfig, out: Path) -> dict:
    segments = _read_segments(out)
    stopwords = load_stopwords(config.stopwords or None)
    lexicon = load_lexicon(_lexicon_path(config), exclusions=frozenset(config.exclude))

    tokens_by_day: dict[int, list[str]] = {}
    for segment in segments:
        if segment.day is None or not 1 <= segment.day <= config.t_max:
            continue
        tokens = remove_stopwords(tokenize(segment.text), stopwords)
        tokens_by_day.setdefault(segment.day, []).extend(tokens)

    rows: list[list[object]] = []
    n_carriers = 0
    for day in range(1, config.t_max + 1):
        counts = score_day(day, tokens_by_day.get(day, []), lexicon)
        n_carriers += counts.emotion_carrying_total
        props = counts.proportions(config.denominator)
        for category in EMOTION_CATEGORIES:
            rows.append([
                day,
                category,
                counts.counts[category],
                props[category] if props is not None else None,
            ])
    _write_csv(out / SENTIMENT_FILE, ["day", "category", "count", "proportion"], rows)
    return {
        "n_days": config.t_max,
        "n_lexicon_terms": len(lexicon),
        "n_emotion_carrying_tokens": n_carriers,
    }


def _load_topic_model(out: Path) -> TopicModel:
    data = _read_json(_require(out / TOPICS_FILE, "model"))
    return TopicModel(
        level=data["level"],
        n_topics=data["n_topics"],
        p_word_given_topic=np.asarray(data["p_word_given_topic"], dtype=np.float64),
        p_topic_given_document=np.asarray(data["p_topic_given_document"], dtype=np.float64),
        word_topics=np.asarray(data["word_topics"], dtype=np.int64),
        doc_segment_indices=tuple(data["doc_segment_indices"]),
        doc_lengths=np.asarray(data["doc_lengths"], dtype=np.int64),
    )


def _load_sentiment_matrix(out: Path, t_max: int) -> np.ndarray:
    _, records = _read_csv(_require(out / SENTIMENT_FILE, "sentiment"))
    matrix = np.full((t_max, len(EMOTION_CATEGORIES)), np.nan)
    column = {c: j for j, c in enumerate(EMOTION_CATEGORIES)}
    for record in records:
        day = int(record["day"])
        if not 1 <= day <= t_max or record["proportion"] == "":
            continue
        matrix[day - 1, column[record["category"]]] = float(record["proportion"])
    return matrix


def _stage_series(config: PipelineConfig, out: Path) -> dict:
    segments = _read_segments(out)
    model = _load_topic_model(out)
    sentiment = _load_sentiment_matrix(out, config.t_max)
    weights = model.doc_lengths if config.topic_mean == TOPIC_MEAN_LENGTH_WEIGHTED else None
    daily = build_series(model, segments, sentiment, t_max=config.t_max, weights=weights)

    rows: list[list[object]] = []
    for d in range(config.t_max):
        day = d + 1
        n_docs = int(daily.doc_counts[d])
        for j, label in enumerate(daily.sentiment_labels):
            rows.append([day, KIND_SENTIMENT, label, daily.sentiment_props[d, j], n_docs])
        for j, label in enumerate(daily.topic_labels):
            rows.append([day, KIND_TOPIC, label, daily.topic_means[d, j], n_docs])
    _write_csv(out / SERIES_FILE, ["day", "kind", "label", "value", "n_docs"], rows)

    curve_rows: list[list[object]] = []
    n_skipped = 0
    for kind, labels, matrix in (
        (KIND_SENTIMENT, daily.sentiment_labels, daily.sentiment_props),
        (KIND_TOPIC, daily.topic_labels, daily.topic_means),
    ):
        for j, label in enumerate(labels):
            observed = ~np.isnan(matrix[:, j])
            if observed.sum() < config.degree + 1:
                warnings.warn(
                    f"skipping curve for {label!r}: needs {config.degree + 1} observed days",
                    stacklevel=2,
                )
                n_skipped += 1
                continue
            x = daily.days[observed].astype(np.float64)
            y = matrix[observed, j]
            grid = np.linspace(x.min(), x.max(), config.grid_points)
            curve = loess(np.column_stack([x, y]), config.span, config.degree, grid)
            for gx, gy in zip(curve.grid, curve.values):
                curve_rows.append([kind, label, gx, gy])
    _write_csv(out / CURVES_FILE, ["kind", "label", "x", "y"], curve_rows)
    return {
        "n_topic_series": len(daily.topic_labels),
        "n_sentiment_series": len(daily.sentiment_labels),
        "n_curves_skipped": n_skipped,
        "n_days_covered": int((daily.doc_counts > 0).sum()),
        "n_days_without_documents": int((daily.doc_counts == 0).sum()),
    }


def _load_series(out: Path, t_max: int) -> tuple[list[str], list[str], np.ndarray]:
    """Series rows from disk in stable order: topics first, then sentiments."""
    _, records = _read_csv(_require(out / SERIES_FILE, "series"))
    values: dict[tuple[str, str], np.ndarray] = {}
    order: list[tuple[str, str]] = []
    for record in records:
        key = (record["kind"], record["label"])
        if key not in values:
            values[key] = np.full(t_max, np.nan)
            order.append(key)
        day = int(record["day"])
        if 1 <= day <= t_max and record["value"] != "":
            values[key][day - 1] = float(record["value"])
    ordered = [k for k in order if k[0] == KIND_TOPIC] + [k for k in order if k[0] != KIND_TOPIC]
    labels = [label for _, label in ordered]
    kinds = [kind for kind, _ in ordered]
    return labels, kinds, np.vstack([values[k] for k in ordered])


def _stage_correlate(config: PipelineConfig, out: Path) -> dict:
    labels, kinds, rows = _load_series(out, config.t_max)
    matrix = correlation_matrix(labels, kinds, rows)
    dissimilarity = matrix.dissimilarity()

    tree = cluster(dissimilarity, list(matrix.labels), config.linkage)
    _write_json(
        out / TREE_FILE,
        {
            "labels": list(tree.labels),
            "linkage": tree.linkage,
            "merges": tree.merges,
            "leaf_order": list(tree.leaf_order),
        },
    )

    index = {label: i for i, label in enumerate(matrix.labels)}
    header = ["label"] + list(tree.leaf_order)
    heat_rows: list[list[object]] = []
    for row_label in tree.leaf_order:
        i = index[row_label]
        heat_rows.append(
            [row_label] + [matrix.values[i, index[c]] for c in tree.leaf_order]
        )
    _write_csv(out / HEATMAP_FILE, header, heat_rows)

    embedding = mds(
        dissimilarity,
        list(matrix.labels),
        list(matrix.kinds),
        dims=2,
        seed=config.mds_seed,
    )
    surviving_sentiments = {l for l, k in zip(matrix.labels, matrix.kinds) if k == KIND_SENTIMENT}
    if all(c in surviving_sentiments for c in EMOTION_CATEGORIES):
        coloring = nearest_sentiment_coloring(embedding)
    else:
        warnings.warn("sentiment series were dropped; topic coloring unavailable", stacklevel=2)
        coloring = {}
    mds_rows: list[list[object]] = []
    for i, (label, kind) in enumerate(zip(embedding.labels, embedding.kinds)):
        mds_rows.append([
            label,
            kind,
            embedding.coordinates[i, 0],
            embedding.coordinates[i, 1],
            coloring.get(label, ""),
        ])
    _write_csv(out / MDS_FILE, ["label", "kind", "x", "y", "nearest_sentiment"], mds_rows)
    return {
        "n_series_in": len(labels),
        "n_series_dropped": len(matrix.dropped),
        "n_series_kept": len(matrix.labels),
        "mds_stress": embedding.stress,
        "mds_iterations": embedding.n_iter,
    }


_STAGE_FUNCTIONS = {
    "fetch": _stage_fetch,
    "annotate": _stage_annotate,
    "prep": _stage_prep,
    "model": _stage_model,
    "sentiment": _stage_sentiment,
    "series": _stage_series,
    "correlate": _stage_correlate,
}


# ---------------------------------------------------------------------------
# Manifest and the runner


def _load_manifest(out: Path) -> dict:
    path = out / MANIFEST_FILE
    if path.is_file():
        return _read_json(path)
    return {"package_version": __version__, "stages": {}, "status": "ok"}


def _overall_status(manifest: dict) -> str:
    for stage in STAGES:
        entry = manifest["stages"].get(stage)
        if entry and entry["status"] == "failed":
            return f"failed:{stage}"
    return "ok"


def _update_manifest(out: Path, config: PipelineConfig, stage: str, entry: dict) -> dict:
    manifest = _load_manifest(out)
    manifest["package_version"] = __version__
    manifest["config"] = config.to_dict()
    manifest["inputs"] = _input_digests(config)
    manifest["stages"][stage] = entry
    # Artifacts of later stages predate this run of an earlier stage.
    passed = False
    for name in STAGES:
        if name == stage:
            passed = True
            continue
        if passed and name in manifest["stages"] and manifest["stages"][name]["status"] == "ok":
            manifest["stages"][name]["status"] = "stale"
    manifest["status"] = _overall_status(manifest)
    _write_json(out / MANIFEST_FILE, manifest)
    return manifest


def run_pipeline(config: PipelineConfig, stages: list[str] | None = None) -> dict:
    """Run the requested stages in canonical order, updating the manifest.

    Raises PipelineStageError on the first failing stage; the manifest
    records the failure before the exception propagates.
    """
    requested = list(STAGES) if stages is None else list(stages)
    unknown = [s for s in requested if s not in STAGES]
    if unknown:
        raise ConfigError(f"unknown stages: {', '.join(unknown)}")
    ordered = [s for s in STAGES if s in requested]

    out = Path(config.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    manifest: dict = {}
    for stage in ordered:
        start = time.perf_counter()
        try:
            counts = _STAGE_FUNCTIONS[stage](config, out)
        except Exception as exc:
            entry = {
                "status": "failed",
                "error": f"{type(exc).__name__}: {exc}",
                "seconds": round(time.perf_counter() - start, 6),
            }
            _update_manifest(out, config, stage, entry)
            raise PipelineStageError(stage, exc) from exc
        entry = {
            "status": "ok",
            "counts": counts,
            "seconds": round(time.perf_counter() - start, 6),
        }
        manifest = _update_manifest(out, config, stage, entry)
    return manifest
