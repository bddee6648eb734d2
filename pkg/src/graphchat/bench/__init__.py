"""MCQ benchmark harness: dataset, runner, analysis."""

from .analysis import (
    AnalysisTables,
    DifferenceTables,
    PearsonMatrix,
    SimilarityRateReport,
    analyze,
    difference_tables,
    pearson_matrix,
    render_truncated,
    similarity_rate,
    truncate_fraction,
    variability,
)
from .dataset import (
    INVALID,
    McqQuestion,
    apply_answer_key,
    load_benchmark,
    load_default_benchmark,
    parse_choice,
    render_prompt,
)
from .runner import (
    AttemptRecord,
    ModelScorecard,
    engine_target,
    load_scorecard,
    provider_target,
    run_model_benchmark,
    save_scorecard,
    scorecard_from_counts,
)

__all__ = [
    "AnalysisTables",
    "DifferenceTables",
    "PearsonMatrix",
    "SimilarityRateReport",
    "analyze",
    "difference_tables",
    "pearson_matrix",
    "render_truncated",
    "similarity_rate",
    "truncate_fraction",
    "variability",
    "INVALID",
    "McqQuestion",
    "apply_answer_key",
    "load_benchmark",
    "load_default_benchmark",
    "parse_choice",
    "render_prompt",
    "AttemptRecord",
    "ModelScorecard",
    "engine_target",
    "load_scorecard",
    "provider_target",
    "run_model_benchmark",
    "save_scorecard",
    "scorecard_from_counts",
]
