"""Benchmark dataset, runner, and analysis arithmetic."""

from __future__ import annotations

import json
from fractions import Fraction

import pytest

from graphchat.bench.analysis import (
    ENCODING_CORRECTNESS,
    ENCODING_LETTER_ORDINAL,
    answer_vector,
    difference_tables,
    pearson,
    pearson_matrix,
    render_signed,
    render_truncated,
    similarity_rate,
    truncate_fraction,
    variability,
)
from graphchat.bench.dataset import (
    INVALID,
    apply_answer_key,
    load_benchmark,
    load_default_benchmark,
    parse_choice,
    render_prompt,
)
from graphchat.bench.runner import (
    load_scorecard,
    run_model_benchmark,
    save_scorecard,
    scorecard_from_counts,
)
from graphchat.errors import DuplicateQid, MismatchedQuestionSets, SchemaError


@pytest.fixture(scope="module")
def questions():
    return load_default_benchmark()


class TestDataset:
    def test_fixture_counts(self, questions):
        knowledge = [q for q in questions if q.category == "knowledge"]
        code = [q for q in questions if q.category == "code"]
        debug = [q for q in code if q.subcategory == "code_debug"]
        assert len(knowledge) == 20
        assert len(code) == 14
        assert len(debug) == 8

    def test_first_knowledge_key(self, questions):
        assert questions[0].qid == "k01"
        assert questions[0].correct == "B"

    def test_unkeyed_question_flagged(self, questions):
        k02 = next(q for q in questions if q.qid == "k02")
        assert k02.correct is None
        assert not k02.has_key

    def test_schema_error_on_three_options(self, tmp_path):
        bad = [
            {
                "qid": "x1",
                "category": "knowledge",
                "subcategory": "beginner",
                "stem": "?",
                "options": {"A": "1", "B": "2", "C": "3"},
                "correct": "A",
            }
        ]
        path = tmp_path / "bad.json"
        path.write_text(json.dumps(bad))
        with pytest.raises(SchemaError):
            load_benchmark(path)

    def test_duplicate_qid(self, tmp_path):
        row = {
            "qid": "dup",
            "category": "code",
            "subcategory": "code_plain",
            "stem": "?",
            "options": {"A": "1", "B": "2", "C": "3", "D": "4"},
            "correct": "A",
        }
        path = tmp_path / "dup.json"
        path.write_text(json.dumps([row, row]))
        with pytest.raises(DuplicateQid):
            load_benchmark(path)

    def test_prompt_contains_instruction_block(self, questions):
        prompt = render_prompt(questions[0])
        assert "labeled A, B, C, and D" in prompt
        positions = [prompt.index(f"\n{label}. ") for label in "ABCD"]
        assert positions == sorted(positions)

    def test_code_stem_fences_preserved(self, questions):
        c02 = next(q for q in questions if q.qid == "c02")
        prompt = render_prompt(c02)
        assert "```python" in prompt

    def test_answer_key_overlay(self, questions):
        patched = apply_answer_key(questions, {"k02": "A"})
        k02 = next(q for q in patched if q.qid == "k02")
        assert k02.correct == "A"
        # original untouched
        assert next(q for q in questions if q.qid == "k02").correct is None


class TestParseChoice:
    @pytest.mark.parametrize(
        "raw,expected",
        [
            ("B", "B"),
            ("The answer is C.", "C"),
            ("Both A and B seem right", "A"),
            ("(d)", "D"),
            ("E", INVALID),
            ("", INVALID),
            ("ABBA nonsense", INVALID),
            ("answer: b.", "B"),
        ],
    )
    def test_cases(self, raw, expected):
        assert parse_choice(raw) == expected


class TestRunner:
    def test_perfect_sheet(self, questions):
        key = {q.qid: q.correct for q in questions}

        def oracle_target(prompt: str) -> str:
            for q in questions:
                if q.stem.strip() in prompt:
                    return q.correct or "A"
            raise AssertionError("prompt for unknown question")

        card = run_model_benchmark(oracle_target, questions, model_name="oracle", workers=2)
        assert card.totals["knowledge"] == Fraction(19)  # k02 has no key
        assert card.totals["code"] == Fraction(14)
        assert card.unkeyed == ["k02"]

    def test_perfect_sheet_with_key_overlay(self, questions):
        patched = apply_answer_key(questions, {"k02": "A"})

        def oracle_target(prompt: str) -> str:
            for q in patched:
                if q.stem.strip() in prompt:
                    return q.correct
            raise AssertionError

        card = run_model_benchmark(oracle_target, patched, model_name="oracle")
        assert card.totals["knowledge"] == Fraction(20)
        assert card.totals["code"] == Fraction(14)
        assert card.unkeyed == []

    def test_two_of_three_repetitions(self, questions):
        subset = [q for q in questions if q.qid in ("k01", "k03")]
        calls = {"k01": 0}

        def flaky(prompt: str) -> str:
            if subset[0].stem in prompt:
                calls["k01"] += 1
                return "B" if calls["k01"] <= 2 else "D"
            return "D"

        card = run_model_benchmark(flaky, subset, model_name="flaky", workers=1)
        assert card.per_question["k01"] == Fraction(2, 3)
        assert render_truncated(card.per_question["k01"]) == "0.66"
        assert card.per_question["k03"] == Fraction(1)

    def test_always_invalid(self, questions):
        card = run_model_benchmark(lambda _p: "E", questions, model_name="e", workers=1)
        assert all(score == 0 for score in card.per_question.values())
        assert card.totals["knowledge"] == 0 and card.totals["code"] == 0

    def test_provider_failures_become_invalid(self, questions):
        from graphchat.errors import ProviderError

        def exploding(_prompt: str) -> str:
            raise ProviderError(500, "kaput")

        card = run_model_benchmark(exploding, questions[:2], model_name="boom", workers=1)
        assert all(r.parsed == INVALID for r in card.records)

    def test_save_load_round_trip(self, questions, tmp_path):
        card = run_model_benchmark(lambda _p: "A", questions, model_name="const", workers=1)
        path = tmp_path / "card.jsonl"
        save_scorecard(card, path)
        again = load_scorecard(path)
        assert again.model_name == card.model_name
        assert again.per_question == card.per_question
        assert again.totals == card.totals
        assert again.records == card.records


class TestTruncation:
    def test_paper_totals(self):
        assert render_truncated(Fraction(56, 3)) == "18.66"
        assert render_truncated(Fraction(26, 3)) == "8.66"
        assert render_truncated(Fraction(38, 3)) == "12.66"

    def test_toward_zero_both_signs(self):
        assert render_truncated(Fraction(-56, 3)) == "-18.66"
        assert render_truncated(Fraction(0)) == "0.00"
        assert truncate_fraction(Fraction(-1, 3)) == Fraction(-33, 100)

    def test_signed_rendering(self):
        assert render_signed(Fraction(366, 5)) == "+73.20"
        assert render_signed(Fraction(-67, 10)) == "-6.70"
        assert render_signed(Fraction(0)) == "0.00"


class TestDifferenceTables:
    def make_cards(self, questions, ours_counts, other_counts, names=("ours", "other")):
        ours = scorecard_from_counts(names[0], questions, ours_counts)
        other = scorecard_from_counts(names[1], questions, other_counts)
        return ours, other

    def test_paper_cells(self, questions):
        patched = apply_answer_key(questions, {"k02": "A"})
        knowledge_qids = [q.qid for q in patched if q.category == "knowledge"]
        code_qids = [q.qid for q in patched if q.category == "code"]

        # ours: knowledge 56/3, code 26/3
        ours_counts = {qid: 3 for qid in knowledge_qids[:16]}
        ours_counts.update({knowledge_qids[16]: 2, knowledge_qids[17]: 2, knowledge_qids[18]: 2, knowledge_qids[19]: 2})
        assert sum(ours_counts.values()) == 16 * 3 + 8  # 56
        ours_counts.update({qid: 0 for qid in code_qids})
        ours_counts.update({code_qids[i]: 3 for i in range(8)})
        ours_counts[code_qids[8]] = 2
        # code: 8 * 3 + 2 = 26

        other_counts = {qid: 3 for qid in knowledge_qids}  # knowledge 20
        other_counts.update({qid: 0 for qid in code_qids})
        other_counts.update({code_qids[i]: 3 for i in range(5)})  # code 5

        ours, other = self.make_cards(patched, ours_counts, other_counts)
        assert ours.totals["knowledge"] == Fraction(56, 3)
        assert ours.totals["code"] == Fraction(26, 3)
        assert other.totals["knowledge"] == Fraction(20)
        assert other.totals["code"] == Fraction(5)

        tables = difference_tables([ours], [other])
        assert tables.difference["knowledge"][0][0] == Fraction(56, 3) - 20
        assert render_signed(tables.percentage["knowledge"][0][0]) == "-6.70"
        assert render_signed(tables.percentage["code"][0][0]) == "+73.20"

    def test_identical_scorecards_zero_row(self, questions):
        counts = {q.qid: 2 for q in questions}
        ours, other = self.make_cards(questions, counts, counts)
        tables = difference_tables([ours], [other])
        for cat in tables.categories:
            assert tables.difference[cat][0][0] == 0
            assert tables.percentage[cat][0][0] == 0

    def test_zero_total_guarded(self, questions):
        ours, other = self.make_cards(
            questions, {q.qid: 3 for q in questions}, {q.qid: 0 for q in questions}
        )
        tables = difference_tables([ours], [other])
        assert tables.percentage["knowledge"][0][0] is None

    def test_mismatched_question_sets(self, questions):
        ours = scorecard_from_counts("a", questions, {})
        other = scorecard_from_counts("b", questions[:10], {})
        with pytest.raises(MismatchedQuestionSets):
            difference_tables([ours], [other])


class TestPearson:
    def test_identical_nonconstant_is_one(self):
        assert pearson([1.0, 0.0, 1.0], [1.0, 0.0, 1.0]) == 1.0

    def test_anticorrelated_is_minus_one(self):
        x = [1.0, 0.0] * 10
        y = [0.0, 1.0] * 10
        assert pearson(x, y) == -1.0

    def test_constant_rules(self):
        assert pearson([1.0, 1.0], [1.0, 1.0]) == 1.0
        assert pearson([1.0, 1.0], [2.0, 2.0]) == 0.0
        assert pearson([1.0, 1.0], [0.0, 1.0]) == 0.0

    def test_matrix_symmetric_unit_diagonal(self, questions):
        import random

        rng = random.Random(5)
        cards = []
        for name in ("m1", "m2", "m3"):
            counts = {q.qid: rng.randint(0, 3) for q in questions}
            cards.append(scorecard_from_counts(name, questions, counts))
        matrix = pearson_matrix(cards, ENCODING_CORRECTNESS)
        n = len(matrix.model_names)
        for i in range(n):
            assert matrix.values[i][i] == 1.0
            for j in range(n):
                assert matrix.values[i][j] == matrix.values[j][i]
                assert -1.0 <= matrix.values[i][j] <= 1.0
        assert "constant" in matrix.metadata["degenerate_rule"]

    def test_all_correct_models_letter_ordinal_one(self, questions):
        patched = apply_answer_key(questions, {"k02": "A"})
        counts = {q.qid: 3 for q in patched}
        a = scorecard_from_counts("a", patched, counts)
        b = scorecard_from_counts("b", patched, counts)
        matrix = pearson_matrix([a, b], ENCODING_LETTER_ORDINAL)
        assert matrix.values[0][1] == 1.0
        # sanity: keys really vary, so the vectors are non-constant
        assert len(set(answer_vector(a, ENCODING_LETTER_ORDINAL))) > 1

    def test_vector_length(self, questions):
        card = scorecard_from_counts("m", questions, {})
        assert len(answer_vector(card, ENCODING_CORRECTNESS)) == 34 * 3
        assert len(answer_vector(card, ENCODING_CORRECTNESS, category="code")) == 14 * 3

    def test_matrix_aligns_shuffled_question_order(self, questions):
        import random

        shuffled = questions[:]
        random.Random(3).shuffle(shuffled)
        counts = {q.qid: 3 for q in questions if q.has_key}
        a = scorecard_from_counts("a", questions, counts)
        b = scorecard_from_counts("b", shuffled, counts)
        matrix = pearson_matrix([a, b], ENCODING_LETTER_ORDINAL)
        # same answers, different listing order: still perfect agreement
        assert matrix.values[0][1] == 1.0


class TestVariability:
    def test_three_of_fourteen(self, questions):
        code_qids = [q.qid for q in questions if q.category == "code"]
        letters = {qid: ["A", "A", "A"] for qid in code_qids}
        for qid in code_qids[:3]:
            letters[qid] = ["A", "B", "A"]
        know_qids = [q.qid for q in questions if q.category == "knowledge"]
        letters.update({qid: ["A", "A", "A"] for qid in know_qids})
        card = scorecard_from_counts("m", questions, {}, letters=letters)
        v = variability(card)
        assert v["code"] == Fraction(3, 14)
        assert render_truncated(v["code"] * 100, 1) == "21.4"

    def test_seven_of_fourteen(self, questions):
        code_qids = [q.qid for q in questions if q.category == "code"]
        letters = {qid: ["C", "C", "C"] for qid in (q.qid for q in questions)}
        for qid in code_qids[:7]:
            letters[qid] = ["C", "D", "C"]
        card = scorecard_from_counts("m", questions, {}, letters=letters)
        v = variability(card)
        assert v["code"] == Fraction(1, 2)
        assert render_truncated(v["code"] * 100, 1) == "50.0"

    def test_all_identical_zero(self, questions):
        card = scorecard_from_counts("m", questions, {q.qid: 3 for q in questions})
        v = variability(card)
        assert v["code"] == 0 and v["knowledge"] == 0


class TestSimilarityRate:
    def test_identical_models_ratio_one(self, questions):
        counts = {q.qid: 2 for q in questions}
        ours = scorecard_from_counts("ours", questions, counts)
        others = [scorecard_from_counts(f"o{i}", questions, counts) for i in range(4)]
        report = similarity_rate(ours, others)
        assert all(r == 1 for r in report.per_question.values())
        assert report.mean == 1 and report.median == 1
        assert report.excluded == []

    def test_direct_formula(self, questions):
        subset = [q for q in questions if q.has_key][:2]
        ours = scorecard_from_counts("ours", subset, {q.qid: 3 for q in subset})
        other = scorecard_from_counts("o", subset, {subset[0].qid: 2, subset[1].qid: 2})
        report = similarity_rate(ours, [other])
        assert report.per_question[subset[0].qid] == Fraction(2, 3)

    def test_zero_score_excluded(self, questions):
        subset = [q for q in questions if q.has_key][:3]
        ours = scorecard_from_counts(
            "ours", subset, {subset[0].qid: 0, subset[1].qid: 3, subset[2].qid: 3}
        )
        other = scorecard_from_counts("o", subset, {q.qid: 3 for q in subset})
        report = similarity_rate(ours, [other])
        assert report.excluded == [subset[0].qid]
        assert len(report.per_question) == 2
