"""MCQ benchmark dataset: schema, loading, prompt rendering, reply parsing."""

from __future__ import annotations

import json
import logging
import re
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

from ..errors import DuplicateQid, SchemaError
from .. import prompts

log = logging.getLogger(__name__)

CATEGORY_KNOWLEDGE = "knowledge"
CATEGORY_CODE = "code"
CATEGORIES = (CATEGORY_KNOWLEDGE, CATEGORY_CODE)

SUBCATEGORIES = (
    "beginner",
    "intermediate",
    "advanced",
    "expert",
    "code_plain",
    "code_debug",
)

OPTION_LABELS = ("A", "B", "C", "D")
INVALID = "INVALID"

_CHOICE_RE = re.compile(r"\b([ABCD])\b", re.IGNORECASE)


@dataclass(frozen=True)
class McqQuestion:
    qid: str
    category: str
    subcategory: str
    stem: str
    options: dict[str, str]
    correct: str | None

    @property
    def has_key(self) -> bool:
        return self.correct is not None


def _validate_question(row: dict) -> McqQuestion:
    qid = str(row.get("qid", "")).strip()
    if not qid:
        raise SchemaError("<missing>", "qid is required")
    category = row.get("category")
    if category not in CATEGORIES:
        raise SchemaError(qid, f"category must be one of {CATEGORIES}, got {category!r}")
    subcategory = row.get("subcategory")
    if subcategory not in SUBCATEGORIES:
        raise SchemaError(qid, f"unknown subcategory {subcategory!r}")
    stem = row.get("stem")
    if not isinstance(stem, str) or not stem.strip():
        raise SchemaError(qid, "stem must be non-empty text")
    options = row.get("options")
    if not isinstance(options, dict) or sorted(options) != sorted(OPTION_LABELS):
        raise SchemaError(qid, f"options must be exactly {OPTION_LABELS}")
    for label in OPTION_LABELS:
        if not isinstance(options[label], str) or not options[label].strip():
            raise SchemaError(qid, f"option {label} must be non-empty text")
    correct = row.get("correct")
    if correct is not None and correct not in OPTION_LABELS:
        raise SchemaError(qid, f"correct must be one of {OPTION_LABELS} or null, got {correct!r}")
    return McqQuestion(
        qid=qid,
        category=category,
        subcategory=subcategory,
        stem=stem,
        options={label: options[label] for label in OPTION_LABELS},
        correct=correct,
    )


def load_benchmark(path: str | Path) -> list[McqQuestion]:
    """Load and validate a dataset file (JSON array of question objects).

    Questions without a key are loaded but flagged; per-category counts
    are logged so a malformed fixture is obvious early.
    """
    rows = json.loads(Path(path).read_text(encoding="utf-8"))
    if not isinstance(rows, list):
        raise SchemaError("<dataset>", "top level must be a JSON array")
    questions = [_validate_question(row) for row in rows]
    seen: set[str] = set()
    for q in questions:
        if q.qid in seen:
            raise DuplicateQid(f"duplicate qid {q.qid!r}")
        seen.add(q.qid)
    counts = {c: sum(1 for q in questions if q.category == c) for c in CATEGORIES}
    unkeyed = [q.qid for q in questions if not q.has_key]
    log.info("loaded %d questions (%s)", len(questions), counts)
    if unkeyed:
        log.warning("questions without an answer key: %s", unkeyed)
    return questions


def default_dataset_path() -> Path:
    return Path(str(resources.files("graphchat").joinpath("data/benchmark_v1.json")))


def load_default_benchmark() -> list[McqQuestion]:
    return load_benchmark(default_dataset_path())


def render_prompt(question: McqQuestion, instructions: str | None = None) -> str:
    """The standardized MCQ prompt: fixed instruction block, stem, options.

    Every attempt is asked with this prompt alone (no history), so runs
    are independent across questions and repetitions.
    """
    if instructions is None:
        instructions = prompts.default_templates().raw("mcq_instructions").strip()
    lines = [instructions, "", question.stem.strip(), ""]
    for label in OPTION_LABELS:
        lines.append(f"{label}. {question.options[label]}")
    return "\n".join(lines)


def parse_choice(raw_reply: str) -> str:
    """First standalone A-D token (case-insensitive) wins, else INVALID.

    "Both A and B seem right" therefore parses as A; replies with no
    standalone letter are INVALID.
    """
    match = _CHOICE_RE.search(raw_reply or "")
    if not match:
        return INVALID
    return match.group(1).upper()


def apply_answer_key(
    questions: list[McqQuestion], key: dict[str, str]
) -> list[McqQuestion]:
    """Overlay user-supplied keys onto questions (for unkeyed fixtures)."""
    out: list[McqQuestion] = []
    for q in questions:
        if q.qid in key:
            letter = key[q.qid]
            if letter not in OPTION_LABELS:
                raise SchemaError(q.qid, f"override key must be A-D, got {letter!r}")
            out.append(
                McqQuestion(
                    qid=q.qid,
                    category=q.category,
                    subcategory=q.subcategory,
                    stem=q.stem,
                    options=q.options,
                    correct=letter,
                )
            )
        else:
            out.append(q)
    return out
