"""Lexicon parsing and per-day emotion scoring."""

from __future__ import annotations

import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from daycourse.errors import LexiconFormatError
from daycourse.pipeline import _lexicon_path  # bundled toy lexicon location
from daycourse.pipeline import PipelineConfig
from daycourse.sentiment import (
    DEFAULT_EXCLUSIONS,
    DENOMINATOR_CARRIER,
    DENOMINATOR_MEMBERSHIP,
    EMOTION_CATEGORIES,
    load_lexicon,
    score_day,
)


def write_lexicon(tmp_path, lines: list[str]):
    path = tmp_path / "lexicon.txt"
    path.write_text("\n".join(lines) + ("\n" if lines else ""), encoding="utf-8")
    return path


@pytest.fixture(scope="module")
def toy_lexicon():
    return load_lexicon(_lexicon_path(PipelineConfig()))


class TestLoadLexicon:
    def test_only_flag_one_rows_create_associations(self, tmp_path):
        path = write_lexicon(tmp_path, ["fever\tfear\t1", "fever\tjoy\t0"])
        lexicon = load_lexicon(path)
        assert lexicon.categories_for("fever") == frozenset({"fear"})

    def test_default_exclusions_strip_the_term_entirely(self, tmp_path):
        path = write_lexicon(tmp_path, ["positive\tjoy\t1"])
        lexicon = load_lexicon(path)
        assert lexicon.categories_for("positive") == frozenset()
        assert len(lexicon) == 0

    def test_empty_file_yields_empty_lexicon(self, tmp_path):
        lexicon = load_lexicon(write_lexicon(tmp_path, []))
        assert len(lexicon) == 0

    def test_exclusions_are_configurable(self, tmp_path):
        path = write_lexicon(tmp_path, ["positive\tjoy\t1", "fever\tfear\t1"])
        lexicon = load_lexicon(path, exclusions={"fever"})
        assert lexicon.categories_for("positive") == frozenset({"joy"})
        assert lexicon.categories_for("fever") == frozenset()

    def test_terms_are_matched_lowercase(self, tmp_path):
        path = write_lexicon(tmp_path, ["Fever\tfear\t1"])
        assert load_lexicon(path).categories_for("fever") == frozenset({"fear"})

    def test_comments_and_blank_lines_are_skipped(self, tmp_path):
        path = write_lexicon(tmp_path, ["# header", "", "fever\tfear\t1"])
        assert len(load_lexicon(path)) == 1

    def test_wrong_field_count_reports_the_line_number(self, tmp_path):
        path = write_lexicon(tmp_path, ["fever\tfear\t1", "broken line"])
        with pytest.raises(LexiconFormatError) as excinfo:
            load_lexicon(path)
        assert excinfo.value.line_no == 2
        assert str(path) in str(excinfo.value)

    def test_unknown_category_is_rejected(self, tmp_path):
        path = write_lexicon(tmp_path, ["fever\tdread\t1"])
        with pytest.raises(LexiconFormatError):
            load_lexicon(path)

    def test_flag_must_be_zero_or_one(self, tmp_path):
        path = write_lexicon(tmp_path, ["fever\tfear\t2"])
        with pytest.raises(LexiconFormatError):
            load_lexicon(path)

    def test_missing_file_is_a_format_error(self, tmp_path):
        with pytest.raises(LexiconFormatError):
            load_lexicon(tmp_path / "absent.txt")


class TestScoreDay:
    @pytest.fixture
    def small_lexicon(self, tmp_path):
        return load_lexicon(
            write_lexicon(
                tmp_path,
                [
                    "fever\tfear\t1",
                    "fever\tnegative\t1",
                    "hope\tjoy\t1",
                    "hope\tpositive\t1",
                    "hope\ttrust\t1",
                ],
            )
        )

    def test_two_tokens_spread_over_five_categories(self, small_lexicon):
        counts = score_day(1, ["fever", "hope"], small_lexicon)
        expected = {"fear": 1, "negative": 1, "joy": 1, "positive": 1, "trust": 1}
        for category in EMOTION_CATEGORIES:
            assert counts.counts[category] == expected.get(category, 0)
        props = counts.proportions(DENOMINATOR_MEMBERSHIP)
        for category, value in props.items():
            assert value == pytest.approx(expected.get(category, 0) / 5, abs=1e-15)
        assert props["fear"] == 0.2

    def test_tokens_without_lexicon_hits_leave_proportions_undefined(self, small_lexicon):
        counts = score_day(2, ["banana", "chair"], small_lexicon)
        assert counts.proportions() is None
        assert counts.emotion_carrying_total == 0

    def test_duplicate_tokens_count_each_occurrence(self, small_lexicon):
        counts = score_day(3, ["fever", "fever"], small_lexicon)
        assert counts.counts["fear"] == 2
        assert counts.emotion_carrying_total == 2

    def test_carrier_denominator_divides_by_token_occurrences(self, small_lexicon):
        counts = score_day(1, ["fever", "hope"], small_lexicon)
        props = counts.proportions(DENOMINATOR_CARRIER)
        assert props["fear"] == 0.5
        assert props["joy"] == 0.5

    def test_unknown_denominator_is_rejected(self, small_lexicon):
        counts = score_day(1, ["fever"], small_lexicon)
        with pytest.raises(ValueError):
            counts.proportions("geometric")

    def test_proportions_sum_to_one(self, small_lexicon):
        counts = score_day(1, ["fever", "hope", "fever"], small_lexicon)
        total = math.fsum(counts.proportions().values())
        assert abs(total - 1.0) < 1e-9

    @given(st.permutations(["fever", "hope", "fever", "banana", "hope"]))
    def test_scoring_ignores_token_order(self, tokens):
        from daycourse.sentiment import SentimentLexicon

        lexicon = SentimentLexicon(
            associations={
                "fever": frozenset({"fear", "negative"}),
                "hope": frozenset({"joy", "positive", "trust"}),
            },
            excluded=DEFAULT_EXCLUSIONS,
        )
        counts = score_day(1, list(tokens), lexicon)
        assert counts.counts["fear"] == 2
        assert counts.counts["joy"] == 2
        assert counts.emotion_carrying_total == 4


class TestBundledToyLexicon:
    def test_excluded_terms_are_absent(self, toy_lexicon):
        for term in DEFAULT_EXCLUSIONS:
            assert toy_lexicon.categories_for(term) == frozenset()

    def test_every_category_is_represented(self, toy_lexicon):
        covered = set()
        for categories in toy_lexicon.associations.values():
            covered |= categories
        assert covered == set(EMOTION_CATEGORIES)

    def test_known_entries(self, toy_lexicon):
        assert "fear" in toy_lexicon.categories_for("fever")
        assert "negative" in toy_lexicon.categories_for("fever")
        assert "joy" in toy_lexicon.categories_for("hope")

    def test_term_count(self, toy_lexicon):
        assert len(toy_lexicon) == 37
