"""Exception hierarchy for the pipeline.

Every module raises a subclass of PipelineError so the CLI can turn any
failure into a single machine-parsable error line and a nonzero exit.
"""


class PipelineError(Exception):
    """Base class for all errors raised by this package."""


class ParseError(PipelineError):
    """An input file violates its declared format."""


class CatalogError(PipelineError):
    """A question catalog is malformed or leaves a slot uncovered."""


class ConvertError(PipelineError):
    """NLU records cannot be converted to QA items."""


class MergeError(PipelineError):
    """Two corpora cannot be merged (e.g. colliding item ids)."""


class SampleError(PipelineError):
    """A few-shot sample cannot be drawn as requested."""


class ScoreError(PipelineError):
    """Predictions cannot be decoded or scored against gold records."""
