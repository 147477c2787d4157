"""Exception hierarchy shared by all modules."""


class ArtifactError(Exception):
    """Base class for every library error."""


class FieldMismatch(ArtifactError):
    pass


class ShapeMismatch(ArtifactError):
    pass


class AmbientMismatch(ArtifactError):
    pass


class BranchCountMismatch(ArtifactError):
    pass


class BranchOutOfRange(ArtifactError):
    pass


class NegativeResult(ArtifactError):
    """An Ext dimension came out negative; always an internal bug."""


class DecompositionFailure(ArtifactError):
    pass


class Unsupported(ArtifactError):
    pass


class LevelTooSmall(ArtifactError):
    pass


class InvariantViolation(ArtifactError):
    pass


class ParseError(ArtifactError):
    pass


class ZeroCardinal(ArtifactError):
    pass


class BudgetExceeded(ArtifactError):
    """Raised when an approximant fails to settle before ``max_level``.

    ``reports`` carries whatever partial evidence was collected.
    """

    def __init__(self, message, reports=None):
        super().__init__(message)
        self.reports = reports


class Unclassified(ArtifactError):
    """Some invariant of a controlled map did not stabilize in budget."""

    def __init__(self, message, reports=None):
        super().__init__(message)
        self.reports = reports
