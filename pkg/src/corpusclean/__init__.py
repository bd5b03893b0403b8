"""Streaming corpus cleaning: parallel/monolingual filters, char n-gram
language identification, sequential-accounting reports."""

__version__ = "0.1.0"

from .core import (
    AlphaCount,
    DecodeError,
    Sentence,
    SentencePair,
    count_alpha,
    fingerprint,
    normalize_line,
    tokenize,
)
from .filters import (
    DECODE_ERROR,
    DedupState,
    FilterDecision,
    FilterId,
    FilterParams,
)
from .langid import (
    LangIdModel,
    LangIdVerdict,
    ModelError,
    ModelFieldError,
    ModelFormatError,
    ModelVersionError,
    TrainingError,
    UndecidableTextError,
    identify,
    load_model,
    save_model,
    train,
)
from .pipeline import (
    AggregateReport,
    AlignmentError,
    FilterReport,
    PipelineConfig,
    PipelineConfigError,
    TooManyBadLines,
    aggregate,
    combine_shuffle,
    render_table,
    report_from_json,
    report_to_json,
    run_mono,
    run_parallel,
)

__all__ = [
    "__version__",
    "AlphaCount", "DecodeError", "Sentence", "SentencePair",
    "count_alpha", "fingerprint", "normalize_line", "tokenize",
    "DECODE_ERROR", "DedupState", "FilterDecision", "FilterId", "FilterParams",
    "LangIdModel", "LangIdVerdict", "ModelError", "ModelFieldError",
    "ModelFormatError", "ModelVersionError", "TrainingError",
    "UndecidableTextError", "identify", "load_model", "save_model", "train",
    "AggregateReport", "AlignmentError", "FilterReport", "PipelineConfig",
    "PipelineConfigError", "TooManyBadLines", "aggregate", "combine_shuffle",
    "render_table", "report_from_json", "report_to_json",
    "run_mono", "run_parallel",
]
