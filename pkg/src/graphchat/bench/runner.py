"""Benchmark execution: repeated independent attempts, exact-rational scores."""

from __future__ import annotations

import json
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Callable, Sequence

from ..errors import GraphChatError
from ..providers import Provider, user_request
from .dataset import CATEGORIES, INVALID, McqQuestion, parse_choice, render_prompt

log = logging.getLogger(__name__)

DEFAULT_REPETITIONS = 3
DEFAULT_TEMPERATURE = 0.1
DEFAULT_WORKERS = 4

# A target answers one standalone prompt; adapters below wrap providers
# and engines into this shape.
AnswerFn = Callable[[str], str]


@dataclass(frozen=True)
class AttemptRecord:
    qid: str
    repetition: int  # 1..R
    raw_reply: str
    parsed: str  # A-D or INVALID
    is_correct: bool


@dataclass
class ModelScorecard:
    model_name: str
    question_order: list[str]
    repetitions: int
    records: list[AttemptRecord]
    per_question: dict[str, Fraction]
    totals: dict[str, Fraction]
    category_of: dict[str, str]
    unkeyed: list[str] = field(default_factory=list)

    def scored_qids(self, category: str | None = None) -> list[str]:
        return [
            qid
            for qid in self.question_order
            if qid not in self.unkeyed
            and (category is None or self.category_of[qid] == category)
        ]

    def qids_in_category(self, category: str) -> list[str]:
        return [qid for qid in self.question_order if self.category_of[qid] == category]

    def records_for(self, qid: str) -> list[AttemptRecord]:
        return [r for r in self.records if r.qid == qid]


def provider_target(provider: Provider, temperature: float = DEFAULT_TEMPERATURE) -> AnswerFn:
    def ask(prompt: str) -> str:
        return provider.complete_chat(user_request(prompt, temperature=temperature))

    return ask


def engine_target(engine) -> AnswerFn:
    """Evaluate the engine itself: each prompt answered via local search
    on a fresh session (no history, independent attempts)."""
    from ..engine import ChatSession, ChatTurn

    def ask(prompt: str) -> str:
        outcome = engine.answer(prompt, ChatSession(), mode="local")
        if isinstance(outcome, ChatTurn):
            return outcome.content
        raise GraphChatError(outcome.describe())

    return ask


def run_model_benchmark(
    target: AnswerFn,
    questions: Sequence[McqQuestion],
    model_name: str = "model",
    repetitions: int = DEFAULT_REPETITIONS,
    workers: int = DEFAULT_WORKERS,
    instructions: str | None = None,
) -> ModelScorecard:
    """Ask every question ``repetitions`` times, each attempt standalone.

    Different questions may run concurrently; a question's repetitions run
    sequentially so repetition indexes stay meaningful. Provider failures
    become INVALID attempts, never abort the run. Unkeyed questions are
    attempted but excluded from totals, with a warning.
    """
    if repetitions < 1:
        raise ValueError("repetitions must be >= 1")

    def run_question(question: McqQuestion) -> list[AttemptRecord]:
        prompt = render_prompt(question, instructions)
        out: list[AttemptRecord] = []
        for rep in range(1, repetitions + 1):
            try:
                raw = target(prompt)
            except GraphChatError as exc:
                log.warning("attempt failed (%s rep %d): %s", question.qid, rep, exc)
                raw = ""
            parsed = parse_choice(raw)
            out.append(
                AttemptRecord(
                    qid=question.qid,
                    repetition=rep,
                    raw_reply=raw,
                    parsed=parsed,
                    is_correct=(question.correct is not None and parsed == question.correct),
                )
            )
        return out

    if workers > 1 and len(questions) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            per_question_records = list(pool.map(run_question, questions))
    else:
        per_question_records = [run_question(q) for q in questions]

    records = [rec for group in per_question_records for rec in group]
    per_question: dict[str, Fraction] = {}
    totals: dict[str, Fraction] = {c: Fraction(0) for c in CATEGORIES}
    unkeyed: list[str] = []
    for question, group in zip(questions, per_question_records):
        score = Fraction(sum(1 for r in group if r.is_correct), repetitions)
        per_question[question.qid] = score
        if question.has_key:
            totals[question.category] += score
        else:
            unkeyed.append(question.qid)
    if unkeyed:
        log.warning("excluded from totals (no answer key): %s", unkeyed)

    return ModelScorecard(
        model_name=model_name,
        question_order=[q.qid for q in questions],
        repetitions=repetitions,
        records=records,
        per_question=per_question,
        totals=totals,
        category_of={q.qid: q.category for q in questions},
        unkeyed=unkeyed,
    )


def scorecard_from_counts(
    model_name: str,
    questions: Sequence[McqQuestion],
    correct_counts: dict[str, int],
    repetitions: int = DEFAULT_REPETITIONS,
    letters: dict[str, Sequence[str]] | None = None,
) -> ModelScorecard:
    """Reconstruct a scorecard from per-question correct counts.

    Used to rebuild published score sheets for the analysis operations
    when raw replies are unavailable. ``letters`` optionally fixes the
    exact reply letters per question (defaults: key for correct attempts,
    a deterministic wrong letter otherwise).
    """
    records: list[AttemptRecord] = []
    per_question: dict[str, Fraction] = {}
    totals: dict[str, Fraction] = {c: Fraction(0) for c in CATEGORIES}
    unkeyed: list[str] = []
    wrong_of = {"A": "B", "B": "C", "C": "D", "D": "A", None: "A"}
    for question in questions:
        count = correct_counts.get(question.qid, 0)
        if not 0 <= count <= repetitions:
            raise ValueError(f"correct count for {question.qid} out of range: {count}")
        chosen: list[str]
        if letters and question.qid in letters:
            chosen = list(letters[question.qid])
            if len(chosen) != repetitions:
                raise ValueError(f"need {repetitions} letters for {question.qid}")
        else:
            right = question.correct or "A"
            wrong = wrong_of[question.correct]
            chosen = [right] * count + [wrong] * (repetitions - count)
        for rep, letter in enumerate(chosen, start=1):
            records.append(
                AttemptRecord(
                    qid=question.qid,
                    repetition=rep,
                    raw_reply=letter,
                    parsed=parse_choice(letter),
                    is_correct=(question.correct is not None and letter == question.correct),
                )
            )
        score = Fraction(sum(1 for r in records[-repetitions:] if r.is_correct), repetitions)
        per_question[question.qid] = score
        if question.has_key:
            totals[question.category] += score
        else:
            unkeyed.append(question.qid)
    return ModelScorecard(
        model_name=model_name,
        question_order=[q.qid for q in questions],
        repetitions=repetitions,
        records=records,
        per_question=per_question,
        totals=totals,
        category_of={q.qid: q.category for q in questions},
        unkeyed=unkeyed,
    )


# -- persistence -------------------------------------------------------------


def save_scorecard(card: ModelScorecard, path: str | Path) -> None:
    """JSON-lines attempts followed by one summary line."""
    with open(path, "w", encoding="utf-8") as fh:
        for rec in card.records:
            fh.write(
                json.dumps(
                    {
                        "qid": rec.qid,
                        "repetition": rec.repetition,
                        "raw_reply": rec.raw_reply,
                        "parsed": rec.parsed,
                        "is_correct": rec.is_correct,
                    },
                    ensure_ascii=False,
                )
                + "\n"
            )
        summary = {
            "summary": True,
            "model_name": card.model_name,
            "question_order": card.question_order,
            "repetitions": card.repetitions,
            "category_of": card.category_of,
            "unkeyed": card.unkeyed,
            "per_question": {q: str(f) for q, f in card.per_question.items()},
            "totals": {c: str(f) for c, f in card.totals.items()},
        }
        fh.write(json.dumps(summary, ensure_ascii=False) + "\n")


def load_scorecard(path: str | Path) -> ModelScorecard:
    records: list[AttemptRecord] = []
    summary: dict | None = None
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        if not line.strip():
            continue
        row = json.loads(line)
        if row.get("summary"):
            summary = row
        else:
            records.append(
                AttemptRecord(
                    qid=row["qid"],
                    repetition=row["repetition"],
                    raw_reply=row["raw_reply"],
                    parsed=row["parsed"],
                    is_correct=row["is_correct"],
                )
            )
    if summary is None:
        raise GraphChatError(f"no summary line in {path}")
    return ModelScorecard(
        model_name=summary["model_name"],
        question_order=summary["question_order"],
        repetitions=summary["repetitions"],
        records=records,
        per_question={q: Fraction(f) for q, f in summary["per_question"].items()},
        totals={c: Fraction(f) for c, f in summary["totals"].items()},
        category_of=summary["category_of"],
        unkeyed=summary["unkeyed"],
    )
