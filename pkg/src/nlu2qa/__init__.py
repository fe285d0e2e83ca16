"""NLU-to-QA pipeline: convert slot/intent data to SQuAD2.0 corpora,
sample few-shot subsets, merge corpora, and score span predictions back
into slot and intent F1."""

from .schema import (
    EvalReport,
    NluRecord,
    Prediction,
    PredictionSet,
    QaAnswer,
    QaCorpus,
    QaGroup,
    QaItem,
    QaParagraph,
    QuestionCatalog,
    SlotSpan,
    TaskScores,
    validate_corpus,
    validate_record,
)

__version__ = "0.1.0"

__all__ = [
    "EvalReport",
    "NluRecord",
    "Prediction",
    "PredictionSet",
    "QaAnswer",
    "QaCorpus",
    "QaGroup",
    "QaItem",
    "QaParagraph",
    "QuestionCatalog",
    "SlotSpan",
    "TaskScores",
    "validate_corpus",
    "validate_record",
    "__version__",
]
