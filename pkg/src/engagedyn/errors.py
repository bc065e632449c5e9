"""Exception hierarchy shared across the toolkit."""


class EngageDynError(Exception):
    """Base class for all toolkit errors."""


class InvalidInputError(EngageDynError, ValueError):
    """An argument violates a documented precondition."""


class InsufficientDataError(InvalidInputError):
    """A series or cohort is too short/small for the requested analysis."""


class DataSchemaError(EngageDynError, ValueError):
    """A CSV file or feature vector does not match the expected schema."""

    def __init__(self, message, path=None, line=None, column=None):
        parts = []
        if path is not None:
            parts.append(str(path))
        if line is not None:
            parts.append(f"line {line}")
        if column is not None:
            parts.append(f"column {column!r}")
        prefix = ": ".join([", ".join(parts)]) if parts else ""
        super().__init__(f"{prefix}: {message}" if prefix else message)
        self.path = path
        self.line = line
        self.column = column


class SingularDesignError(EngageDynError):
    """A design matrix is rank deficient.

    ``column`` names the offending column when it can be identified.
    """

    def __init__(self, message, column=None):
        super().__init__(message)
        self.column = column


class ConvergenceError(EngageDynError):
    """An iterative solver failed to converge.

    Carries the last iterate so callers can inspect or reuse it.
    """

    def __init__(self, message, last_iterate=None, sse=None):
        super().__init__(message)
        self.last_iterate = last_iterate
        self.sse = sse


class StabilityError(InvalidInputError):
    """Requested stochastic process would be explosive."""


class AnalysisStageError(EngageDynError):
    """A multi-stage pipeline failed; ``stage`` names the failing step."""

    def __init__(self, stage, original):
        super().__init__(f"stage {stage!r}: {original}")
        self.stage = stage
        self.original = original
