"""Daily series assembly and LOESS smoothing."""

from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from daycourse.annotate import FORMAT_DAILY, DaySegment
from daycourse.blockmodel import TopicModel
from daycourse.sentiment import (
    DENOMINATOR_CARRIER,
    EMOTION_CATEGORIES,
    EmotionCounts,
)
from daycourse.series import DEFAULT_T_MAX, build_series, loess, sentiment_matrix

# Frozen output of the independent weighted-least-squares oracle on the
# 7-point fixture (tests/oracles.py, run standalone).
SEVEN_POINTS = [(1.0, 2.0), (2.0, 2.5), (3.0, 1.0), (4.0, 4.0), (5.0, 3.5), (6.0, 5.0), (8.0, 7.5)]
SEVEN_POINT_FIT_AT_3_5 = 2.4375000000000293


def seg(day, index: int = 0) -> DaySegment:
    return DaySegment(post_id=f"p{index}", author="a", day=day, text="x", format=FORMAT_DAILY)


def make_model(rows, segment_indices, lengths=None) -> TopicModel:
    rows = np.asarray(rows, dtype=np.float64)
    n_docs, n_topics = rows.shape
    if lengths is None:
        lengths = np.ones(n_docs, dtype=np.int64)
    return TopicModel(
        level=0,
        n_topics=n_topics,
        p_word_given_topic=np.full((n_topics, 1), 1.0),
        p_topic_given_document=rows,
        word_topics=np.zeros(1, dtype=np.int64),
        doc_segment_indices=tuple(segment_indices),
        doc_lengths=np.asarray(lengths, dtype=np.int64),
    )


def blank_sentiment(t_max: int = DEFAULT_T_MAX) -> np.ndarray:
    return np.full((t_max, len(EMOTION_CATEGORIES)), np.nan)


def emotion(day: int, carrying: int, **counts: int) -> EmotionCounts:
    result = EmotionCounts(day=day)
    for category, value in counts.items():
        result.counts[category] = value
    result.emotion_carrying_total = carrying
    return result


class TestSentimentMatrix:
    def test_rows_land_on_their_day(self):
        matrix = sentiment_matrix({2: emotion(2, 4, joy=3, fear=1)}, t_max=3)
        assert matrix.shape == (3, 10)
        joy = EMOTION_CATEGORIES.index("joy")
        fear = EMOTION_CATEGORIES.index("fear")
        assert matrix[1, joy] == 0.75
        assert matrix[1, fear] == 0.25
        assert np.isnan(matrix[0]).all()
        assert np.isnan(matrix[2]).all()

    def test_days_without_emotion_words_stay_nan(self):
        matrix = sentiment_matrix({1: emotion(1, 0)}, t_max=2)
        assert np.isnan(matrix).all()

    def test_out_of_range_days_are_ignored(self):
        matrix = sentiment_matrix(
            {0: emotion(0, 1, joy=1), 15: emotion(15, 1, joy=1)}, t_max=14
        )
        assert np.isnan(matrix).all()

    def test_denominator_mode_is_honored(self):
        matrix = sentiment_matrix(
            {1: emotion(1, 2, joy=2, trust=2)}, t_max=1, denominator=DENOMINATOR_CARRIER
        )
        joy = EMOTION_CATEGORIES.index("joy")
        assert matrix[0, joy] == 1.0


class TestBuildSeries:
    def test_same_day_documents_average(self):
        model = make_model([[1.0, 0.0], [0.0, 1.0]], [0, 1])
        daily = build_series(model, [seg(1, 0), seg(1, 1)], blank_sentiment())
        assert daily.topic_means[0].tolist() == [0.5, 0.5]
        assert daily.doc_counts[0] == 2
        assert daily.doc_counts[1:].sum() == 0

    def test_days_without_documents_are_nan(self):
        model = make_model([[1.0]], [0])
        daily = build_series(model, [seg(1)], blank_sentiment())
        assert np.isnan(daily.topic_means[8]).all()

    def test_segments_without_a_day_are_excluded(self):
        model = make_model([[1.0, 0.0], [0.0, 1.0]], [0, 1])
        daily = build_series(model, [seg(1, 0), seg(None, 1)], blank_sentiment())
        assert daily.topic_means[0].tolist() == [1.0, 0.0]
        assert daily.doc_counts[0] == 1

    def test_days_beyond_t_max_are_excluded(self):
        model = make_model([[1.0], [1.0]], [0, 1])
        daily = build_series(model, [seg(1, 0), seg(15, 1)], blank_sentiment())
        assert daily.doc_counts.sum() == 1

    def test_observed_day_rows_sum_to_one(self):
        model = make_model([[0.3, 0.7], [0.6, 0.4]], [0, 1])
        daily = build_series(model, [seg(1, 0), seg(1, 1)], blank_sentiment())
        assert daily.topic_means[0].sum() == pytest.approx(1.0, abs=1e-12)
        assert daily.topic_means[0].tolist() == pytest.approx([0.45, 0.55], abs=1e-12)

    def test_length_weights_shift_the_mean(self):
        model = make_model([[1.0, 0.0], [0.0, 1.0]], [0, 1], lengths=[2, 4])
        daily = build_series(
            model,
            [seg(1, 0), seg(1, 1)],
            blank_sentiment(),
            weights=model.doc_lengths,
        )
        assert daily.topic_means[0].tolist() == pytest.approx([1 / 3, 2 / 3], abs=1e-12)
        assert daily.doc_counts[0] == 2

    def test_weights_must_match_the_document_count(self):
        model = make_model([[1.0]], [0])
        with pytest.raises(ValueError, match="one value per document"):
            build_series(model, [seg(1)], blank_sentiment(), weights=np.array([1.0, 2.0]))

    def test_weights_must_be_finite_and_positive(self):
        model = make_model([[1.0], [1.0]], [0, 1])
        segments = [seg(1, 0), seg(1, 1)]
        with pytest.raises(ValueError, match="finite and positive"):
            build_series(model, segments, blank_sentiment(), weights=np.array([1.0, 0.0]))
        with pytest.raises(ValueError, match="finite and positive"):
            build_series(model, segments, blank_sentiment(), weights=np.array([1.0, np.nan]))

    def test_sentiment_shape_is_validated(self):
        model = make_model([[1.0]], [0])
        with pytest.raises(ValueError, match="sentiment_props"):
            build_series(model, [seg(1)], np.zeros((3, 3)))

    def test_t_max_must_be_positive(self):
        model = make_model([[1.0]], [0])
        with pytest.raises(ValueError, match="t_max"):
            build_series(model, [seg(1)], blank_sentiment(0), t_max=0)

    def test_axis_and_labels(self):
        model = make_model([[1.0, 0.0, 0.0]], [0])
        daily = build_series(model, [seg(1)], blank_sentiment(5), t_max=5)
        assert daily.days.tolist() == [1, 2, 3, 4, 5]
        assert daily.t_max() == 5
        assert daily.topic_labels == ("topic_1", "topic_2", "topic_3")
        assert daily.sentiment_labels == EMOTION_CATEGORIES

    def test_sentiment_rows_pass_through_unchanged(self):
        model = make_model([[1.0]], [0])
        sentiment = np.arange(10, dtype=np.float64)[None, :] / 45.0
        daily = build_series(model, [seg(1)], sentiment, t_max=1)
        assert np.array_equal(daily.sentiment_props, sentiment)


class TestLoess:
    def test_straight_line_is_recovered_exactly(self):
        xs = np.arange(1.0, 21.0)
        curve = loess(np.column_stack([xs, 2 * xs + 1]))
        assert len(curve.grid) == 200
        assert np.allclose(curve.values, 2 * curve.grid + 1, atol=1e-9)
        assert not curve.fallback.any()

    def test_seven_point_fixture_matches_frozen_oracle_value(self):
        curve = loess(SEVEN_POINTS, span=0.75, degree=2, grid=np.array([3.5]))
        assert curve.values[0] == pytest.approx(SEVEN_POINT_FIT_AT_3_5, abs=1e-9)
        assert not curve.fallback[0]

    def test_rank_deficient_fit_falls_back_to_weighted_mean(self):
        curve = loess([(2.0, 1.0), (2.0, 3.0), (2.0, 5.0)], degree=1, grid=np.array([2.0]))
        assert curve.fallback[0]
        assert curve.values[0] == pytest.approx(3.0, abs=1e-12)

    def test_evaluation_clamps_to_the_observed_range(self):
        xs = np.arange(1.0, 6.0)
        curve = loess(
            np.column_stack([xs, 2 * xs + 1]),
            grid=np.array([-10.0, 3.0, 99.0]),
        )
        assert curve.values == pytest.approx([3.0, 7.0, 11.0], abs=1e-9)

    def test_grid_must_be_strictly_increasing(self):
        pts = SEVEN_POINTS
        with pytest.raises(ValueError, match="strictly increasing"):
            loess(pts, grid=np.array([1.0, 1.0, 2.0]))
        with pytest.raises(ValueError, match="strictly increasing"):
            loess(pts, grid=np.array([[1.0, 2.0]]))

    def test_point_shape_is_validated(self):
        with pytest.raises(ValueError, match=r"\(n, 2\)"):
            loess(np.zeros((3, 3)))

    def test_too_few_points_for_the_degree(self):
        with pytest.raises(ValueError, match="at least 3 points"):
            loess([(0.0, 0.0), (1.0, 1.0)], degree=2)

    def test_span_bounds(self):
        with pytest.raises(ValueError, match="span"):
            loess(SEVEN_POINTS, span=0.0)
        with pytest.raises(ValueError, match="span"):
            loess(SEVEN_POINTS, span=1.5)

    @given(
        ys=st.lists(
            st.floats(-10, 10, allow_nan=False, allow_infinity=False, width=32),
            min_size=4,
            max_size=9,
        ),
        seed=st.integers(0, 2**16),
    )
    def test_point_order_does_not_change_the_curve(self, ys, seed):
        n = len(ys)
        pts = [(float(i), float(v)) for i, v in enumerate(ys)]
        perm = np.random.default_rng(seed).permutation(n)
        shuffled = [pts[i] for i in perm]
        grid = np.linspace(0, n - 1, 7)
        a = loess(pts, span=1.0, degree=1, grid=grid)
        b = loess(shuffled, span=1.0, degree=1, grid=grid)
        assert np.allclose(a.values, b.values, atol=1e-8)

    def test_shifting_and_scaling_x_moves_the_curve_with_it(self):
        grid = np.array([2.0, 3.5, 5.0])
        base = loess(SEVEN_POINTS, span=0.75, degree=2, grid=grid)
        moved_pts = [(2 * x + 3, y) for x, y in SEVEN_POINTS]
        moved = loess(moved_pts, span=0.75, degree=2, grid=2 * grid + 3)
        assert np.allclose(base.values, moved.values, atol=1e-8)
