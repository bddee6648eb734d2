"""Scorecard analysis: difference/percentage tables, Pearson agreement,
answer variability, similarity rate.

All scores stay exact rationals internally. Display follows a
truncate-toward-zero rule (56/3 renders as 18.66, never 18.67), and the
percentage table is computed from the truncated totals, which is how the
published two-decimal tables relate to each other (100*(8.66-5)/5 =
73.20, not 100*(26/3-5)/5 = 73.33).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from ..errors import LengthMismatch, MismatchedQuestionSets
from .dataset import CATEGORIES, INVALID, OPTION_LABELS
from .runner import ModelScorecard

ENCODING_CORRECTNESS = "correctness"
ENCODING_LETTER_ORDINAL = "letter_ordinal"
ENCODINGS = (ENCODING_CORRECTNESS, ENCODING_LETTER_ORDINAL)

UNDEFINED_CELL = "n/a"

DEGENERATE_RULE = (
    "two constant equal vectors correlate at 1; "
    "any other constant vector correlates at 0"
)

_LETTER_ORDINAL = {label: i + 1 for i, label in enumerate(OPTION_LABELS)}
_LETTER_ORDINAL[INVALID] = 0


def truncate_fraction(value: Fraction, decimals: int = 2) -> Fraction:
    """Truncate toward zero onto a 10^-decimals grid, exactly."""
    scale = 10**decimals
    scaled = abs(value) * scale
    truncated = Fraction(scaled.numerator // scaled.denominator, scale)
    return -truncated if value < 0 else truncated


def render_truncated(value: Fraction, decimals: int = 2) -> str:
    """Fixed-decimals decimal string of the truncated value (18.666... -> "18.66")."""
    scale = 10**decimals
    magnitude = abs(value) * scale
    units = magnitude.numerator // magnitude.denominator
    whole, frac = divmod(units, scale)
    sign = "-" if value < 0 and units > 0 else ""
    if decimals == 0:
        return f"{sign}{whole}"
    return f"{sign}{whole}.{frac:0{decimals}d}"


def render_signed(value: Fraction, decimals: int = 2) -> str:
    text = render_truncated(value, decimals)
    return f"+{text}" if value > 0 and not text.startswith("-") else text


def _require_same_questions(cards: Sequence[ModelScorecard]) -> None:
    first = cards[0]
    reference = sorted(first.question_order)
    for card in cards[1:]:
        if sorted(card.question_order) != reference:
            raise MismatchedQuestionSets(
                f"{card.model_name} evaluated a different question set than {first.model_name}"
            )
        if card.unkeyed != first.unkeyed and sorted(card.unkeyed) != sorted(first.unkeyed):
            raise MismatchedQuestionSets(
                f"{card.model_name} disagrees on unkeyed questions"
            )


@dataclass
class DifferenceTables:
    """ours x others cells per category.

    ``difference`` is the exact rational gap in points. ``percentage``
    follows 100*(ours-other)/other over truncated totals (None where the
    other total is zero). ``percentage_of_scale`` is the alternative
    reading that divides the raw gap by the points possible in the
    category; both views are rendered, labeled distinctly.
    """

    row_names: list[str]
    col_names: list[str]
    categories: list[str]
    difference: dict[str, list[list[Fraction]]]
    percentage: dict[str, list[list[Fraction | None]]]
    percentage_of_scale: dict[str, list[list[Fraction | None]]]
    points_possible: dict[str, int]


def difference_tables(
    ours: Sequence[ModelScorecard], others: Sequence[ModelScorecard]
) -> DifferenceTables:
    if not ours or not others:
        raise ValueError("need at least one scorecard on each side")
    _require_same_questions(list(ours) + list(others))
    categories = [c for c in CATEGORIES if ours[0].qids_in_category(c)]
    points = {c: len(ours[0].scored_qids(c)) for c in categories}

    difference: dict[str, list[list[Fraction]]] = {}
    percentage: dict[str, list[list[Fraction | None]]] = {}
    pct_scale: dict[str, list[list[Fraction | None]]] = {}
    for cat in categories:
        diff_rows: list[list[Fraction]] = []
        pct_rows: list[list[Fraction | None]] = []
        scale_rows: list[list[Fraction | None]] = []
        for mine in ours:
            diff_row: list[Fraction] = []
            pct_row: list[Fraction | None] = []
            scale_row: list[Fraction | None] = []
            for other in others:
                a, b = mine.totals[cat], other.totals[cat]
                diff_row.append(a - b)
                ta, tb = truncate_fraction(a), truncate_fraction(b)
                pct_row.append(100 * (ta - tb) / tb if tb != 0 else None)
                scale_row.append(
                    100 * (a - b) / points[cat] if points[cat] else None
                )
            diff_rows.append(diff_row)
            pct_rows.append(pct_row)
            scale_rows.append(scale_row)
        difference[cat] = diff_rows
        percentage[cat] = pct_rows
        pct_scale[cat] = scale_rows

    return DifferenceTables(
        row_names=[c.model_name for c in ours],
        col_names=[c.model_name for c in others],
        categories=categories,
        difference=difference,
        percentage=percentage,
        percentage_of_scale=pct_scale,
        points_possible=points,
    )


# -- Pearson agreement --------------------------------------------------------


def answer_vector(
    card: ModelScorecard,
    encoding: str,
    category: str | None = None,
    order: Sequence[str] | None = None,
) -> list[float]:
    """Attempts concatenated in question order, repetitions innermost.

    ``order`` pins the question sequence so vectors from different cards
    line up even if their datasets were listed in different orders.
    """
    if encoding not in ENCODINGS:
        raise ValueError(f"unknown encoding {encoding!r}")
    by_key = {(r.qid, r.repetition): r for r in card.records}
    vector: list[float] = []
    for qid in order if order is not None else card.question_order:
        if category is not None and card.category_of[qid] != category:
            continue
        for rep in range(1, card.repetitions + 1):
            rec = by_key[(qid, rep)]
            if encoding == ENCODING_CORRECTNESS:
                vector.append(1.0 if rec.is_correct else 0.0)
            else:
                vector.append(float(_LETTER_ORDINAL.get(rec.parsed, 0)))
    return vector


def pearson(x: Sequence[float], y: Sequence[float]) -> float:
    """Pearson r with the documented degenerate rule for constant vectors."""
    if len(x) != len(y):
        raise LengthMismatch(f"{len(x)} vs {len(y)}")
    if len(x) == 0:
        raise LengthMismatch("empty vectors")
    ax = np.asarray(x, dtype=np.float64)
    ay = np.asarray(y, dtype=np.float64)
    const_x = bool(np.all(ax == ax[0]))
    const_y = bool(np.all(ay == ay[0]))
    if const_x or const_y:
        return 1.0 if const_x and const_y and ax[0] == ay[0] else 0.0
    if np.array_equal(ax, ay):
        return 1.0
    mx, my = ax.mean(), ay.mean()
    dx, dy = ax - mx, ay - my
    r = float(np.dot(dx, dy) / np.sqrt(np.dot(dx, dx) * np.dot(dy, dy)))
    return max(-1.0, min(1.0, r))


@dataclass
class PearsonMatrix:
    model_names: list[str]
    encoding: str
    category: str | None
    values: list[list[float]]
    metadata: dict = field(default_factory=dict)


def pearson_matrix(
    scorecards: Sequence[ModelScorecard],
    encoding: str = ENCODING_CORRECTNESS,
    category: str | None = None,
) -> PearsonMatrix:
    """Model-by-model agreement matrix; symmetric, unit diagonal."""
    if len(scorecards) < 2:
        raise ValueError("need at least two scorecards")
    _require_same_questions(scorecards)
    reps = {c.repetitions for c in scorecards}
    if len(reps) > 1:
        raise LengthMismatch(f"differing repetition counts: {sorted(reps)}")
    order = scorecards[0].question_order
    vectors = [answer_vector(c, encoding, category, order=order) for c in scorecards]
    n = len(vectors)
    values = [[1.0] * n for _ in range(n)]
    for i in range(n):
        for j in range(i + 1, n):
            r = pearson(vectors[i], vectors[j])
            values[i][j] = r
            values[j][i] = r
        # Diagonal via the same rule (constant vector vs itself is 1).
        values[i][i] = pearson(vectors[i], vectors[i])
    return PearsonMatrix(
        model_names=[c.model_name for c in scorecards],
        encoding=encoding,
        category=category,
        values=values,
        metadata={"degenerate_rule": DEGENERATE_RULE},
    )


# -- variability and similarity ------------------------------------------------


def variability(card: ModelScorecard, category: str | None = None) -> dict[str, Fraction]:
    """Per category: fraction of questions whose parsed letters differ
    across repetitions."""
    if card.repetitions < 2:
        raise ValueError("variability needs at least 2 repetitions")
    cats = [category] if category else [c for c in CATEGORIES if card.qids_in_category(c)]
    out: dict[str, Fraction] = {}
    for cat in cats:
        qids = card.qids_in_category(cat)
        if not qids:
            out[cat] = Fraction(0)
            continue
        varied = 0
        for qid in qids:
            letters = {r.parsed for r in card.records_for(qid)}
            if len(letters) > 1:
                varied += 1
        out[cat] = Fraction(varied, len(qids))
    return out


@dataclass
class SimilarityRateReport:
    per_question: dict[str, Fraction]
    mean: Fraction | None
    median: Fraction | None
    excluded: list[str]
    per_model: dict[str, tuple[Fraction | None, Fraction | None]]


def _series_mean_median(values: list[Fraction]) -> tuple[Fraction | None, Fraction | None]:
    if not values:
        return None, None
    mean = sum(values, Fraction(0)) / len(values)
    ordered = sorted(values)
    mid = len(ordered) // 2
    if len(ordered) % 2 == 1:
        median = ordered[mid]
    else:
        median = (ordered[mid - 1] + ordered[mid]) / 2
    return mean, median


def similarity_rate(
    ours: ModelScorecard, others: Sequence[ModelScorecard]
) -> SimilarityRateReport:
    """Per keyed question with our score > 0: mean of the other models'
    scores divided by ours. Questions we scored 0 on are excluded and
    counted. Also reports the per-model ratio series."""
    if not others:
        raise ValueError("need at least one other scorecard")
    _require_same_questions([ours, *others])
    ratios: dict[str, Fraction] = {}
    excluded: list[str] = []
    per_model_values: dict[str, list[Fraction]] = {c.model_name: [] for c in others}
    for qid in ours.scored_qids():
        mine = ours.per_question[qid]
        if mine == 0:
            excluded.append(qid)
            continue
        other_scores = [c.per_question[qid] for c in others]
        ratios[qid] = (sum(other_scores, Fraction(0)) / len(others)) / mine
        for card, score in zip(others, other_scores):
            per_model_values[card.model_name].append(score / mine)
    mean, median = _series_mean_median(list(ratios.values()))
    return SimilarityRateReport(
        per_question=ratios,
        mean=mean,
        median=median,
        excluded=excluded,
        per_model={name: _series_mean_median(vals) for name, vals in per_model_values.items()},
    )


# -- assembled view and rendering ----------------------------------------------


@dataclass
class AnalysisTables:
    difference: DifferenceTables
    pearson: dict[str, PearsonMatrix]
    variability: dict[str, dict[str, Fraction]]
    similarity_rate: SimilarityRateReport


def analyze(
    ours: Sequence[ModelScorecard],
    others: Sequence[ModelScorecard],
    encoding: str = ENCODING_CORRECTNESS,
) -> AnalysisTables:
    every = list(ours) + list(others)
    matrices = {"all": pearson_matrix(every, encoding)}
    for cat in CATEGORIES:
        if ours[0].qids_in_category(cat):
            matrices[cat] = pearson_matrix(every, encoding, category=cat)
    return AnalysisTables(
        difference=difference_tables(ours, others),
        pearson=matrices,
        variability={c.model_name: variability(c) for c in every if c.repetitions >= 2},
        similarity_rate=similarity_rate(ours[0], others),
    )


def _cell(value: Fraction | None, signed: bool) -> str:
    if value is None:
        return UNDEFINED_CELL
    return render_signed(value) if signed else render_truncated(value)


def render_matrix_csv(
    row_names: list[str],
    col_names: list[str],
    rows: list[list[Fraction | None]],
    signed: bool = False,
) -> str:
    lines = ["," + ",".join(col_names)]
    for name, row in zip(row_names, rows):
        lines.append(name + "," + ",".join(_cell(v, signed) for v in row))
    return "\n".join(lines) + "\n"


def render_matrix_text(
    row_names: list[str],
    col_names: list[str],
    rows: list[list[Fraction | None]],
    signed: bool = False,
) -> str:
    cells = [[_cell(v, signed) for v in row] for row in rows]
    widths = [max(len(name) for name in row_names)]
    for j, col in enumerate(col_names):
        widths.append(max(len(col), max((len(r[j]) for r in cells), default=0)))
    header = "  ".join([" " * widths[0]] + [c.rjust(widths[j + 1]) for j, c in enumerate(col_names)])
    lines = [header]
    for name, row in zip(row_names, cells):
        lines.append("  ".join([name.ljust(widths[0])] + [v.rjust(widths[j + 1]) for j, v in enumerate(row)]))
    return "\n".join(lines) + "\n"


def render_analysis_text(tables: AnalysisTables) -> str:
    """Aligned plain-text report over every assembled table."""
    out: list[str] = []
    diff = tables.difference
    for cat in diff.categories:
        out.append(f"== score difference ({cat}): ours[rows] - others[columns] ==")
        out.append(render_matrix_text(diff.row_names, diff.col_names, diff.difference[cat]))
        out.append(
            f"== relative difference ({cat}), % of the other model's truncated total =="
        )
        out.append(
            render_matrix_text(diff.row_names, diff.col_names, diff.percentage[cat], signed=True)
        )
        out.append(
            f"== gap as % of the {diff.points_possible[cat]}-point scale ({cat}) =="
        )
        out.append(
            render_matrix_text(
                diff.row_names, diff.col_names, diff.percentage_of_scale[cat], signed=True
            )
        )
    for label, matrix in tables.pearson.items():
        out.append(f"== pearson agreement ({label}, {matrix.encoding} encoding) ==")
        rows = [[Fraction(v).limit_denominator(10**6) for v in row] for row in matrix.values]
        out.append(render_matrix_text(matrix.model_names, matrix.model_names, rows))
    out.append("== answer variability (share of questions with non-identical replies) ==")
    for model, per_cat in tables.variability.items():
        parts = ", ".join(
            f"{cat}: {render_truncated(frac * 100, 1)}%" for cat, frac in per_cat.items()
        )
        out.append(f"{model}: {parts}")
    sim = tables.similarity_rate
    out.append("")
    out.append("== similarity rate (mean of others / ours, per question) ==")
    if sim.mean is not None:
        out.append(
            f"mean {render_truncated(sim.mean * 100, 1)}%  "
            f"median {render_truncated(sim.median * 100, 1)}%  "
            f"(excluded, our score 0: {len(sim.excluded)})"
        )
    else:
        out.append("no comparable questions")
    return "\n".join(out) + "\n"


def analysis_to_json(tables: AnalysisTables) -> str:
    """Machine-readable dump; fractions rendered as exact "p/q" strings."""

    def frac(v: Fraction | None) -> str | None:
        return None if v is None else str(v)

    diff = tables.difference
    payload = {
        "difference": {
            "rows": diff.row_names,
            "cols": diff.col_names,
            "points_possible": diff.points_possible,
            "cells": {
                cat: [[frac(v) for v in row] for row in diff.difference[cat]]
                for cat in diff.categories
            },
            "percentage": {
                cat: [[frac(v) for v in row] for row in diff.percentage[cat]]
                for cat in diff.categories
            },
            "percentage_of_scale": {
                cat: [[frac(v) for v in row] for row in diff.percentage_of_scale[cat]]
                for cat in diff.categories
            },
        },
        "pearson": {
            label: {
                "models": m.model_names,
                "encoding": m.encoding,
                "values": m.values,
                "metadata": m.metadata,
            }
            for label, m in tables.pearson.items()
        },
        "variability": {
            model: {cat: frac(v) for cat, v in per_cat.items()}
            for model, per_cat in tables.variability.items()
        },
        "similarity_rate": {
            "per_question": {q: frac(v) for q, v in tables.similarity_rate.per_question.items()},
            "mean": frac(tables.similarity_rate.mean),
            "median": frac(tables.similarity_rate.median),
            "excluded": tables.similarity_rate.excluded,
            "per_model": {
                name: [frac(mean), frac(median)]
                for name, (mean, median) in tables.similarity_rate.per_model.items()
            },
        },
    }
    return json.dumps(payload, indent=2, sort_keys=True)
