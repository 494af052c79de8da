"""Weakly supervised named entity recognition (C++ core)."""

from wsner._core import (
    AlignmentError,
    Dataset,
    DateRules,
    Embeddings,
    Error,
    EstimationError,
    Gazetteer,
    NumericError,
    ParseError,
    SchemaError,
    Tagger,
    TaggerConfig,
    annotate_distant,
    annotation_quality,
    estimate_confusion,
    mean_standard_error,
    run_experiment,
    span_prf,
    train,
    write_synthetic_corpus,
)

__all__ = [
    "AlignmentError",
    "Dataset",
    "DateRules",
    "Embeddings",
    "Error",
    "EstimationError",
    "Gazetteer",
    "NumericError",
    "ParseError",
    "SchemaError",
    "Tagger",
    "TaggerConfig",
    "annotate_distant",
    "annotation_quality",
    "estimate_confusion",
    "mean_standard_error",
    "run_experiment",
    "span_prf",
    "train",
    "write_synthetic_corpus",
]
