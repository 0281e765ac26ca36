"""Exception types shared across the package."""


class MulticutError(Exception):
    """Base class for all package-specific errors."""


class ParseError(MulticutError):
    """Malformed instance or config file.

    ``line`` is the 1-based line number of the offending token, or None
    when the problem is not tied to a single line.
    """

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class SizeGuardError(MulticutError):
    """Instance too large for an enumeration-based routine."""


class InfeasibleLabelingError(MulticutError):
    """Edge labeling violates the cycle (triangle) inequalities."""


class InvalidPartitionError(MulticutError):
    """Node partition is malformed or has a disconnected cluster."""


class NotNormalizedError(MulticutError):
    """Operation requires a cost-normalized complete instance."""


class UndefinedGapError(MulticutError):
    """Optimality gap is undefined (reference objective is zero)."""


class TrainingDiverged(MulticutError):
    """Training aborted on a non-finite loss."""
