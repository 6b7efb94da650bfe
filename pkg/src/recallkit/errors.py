"""Exception types shared across the workbench."""


class WorkbenchError(Exception):
    """Base class for all recallkit errors."""


class IngestError(WorkbenchError):
    """A corpus source could not be parsed or violated an invariant."""


class UnknownIdError(WorkbenchError, KeyError):
    """A document, paragraph, or session id is not known to the store."""

    def __str__(self) -> str:  # KeyError quotes its arg; keep the plain message
        return Exception.__str__(self)


class DimensionError(WorkbenchError, ValueError):
    """Vector dimensions are inconsistent or a zero-norm vector was given."""


class SamplingError(WorkbenchError):
    """A split request cannot be satisfied by the corpus."""


class FeedbackError(WorkbenchError):
    """Feedback violated session rules (e.g. re-reviewing a document)."""
