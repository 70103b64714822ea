"""Exception hierarchy shared across the package."""


class MarkovBasisError(Exception):
    """Base class for all package errors."""


class DimensionError(MarkovBasisError, ValueError):
    """Shapes or sizes do not agree with the operation's contract."""


class ModelInvalidError(MarkovBasisError, ValueError):
    """A design matrix fails a model-level condition."""


class ConfigurationError(MarkovBasisError, ValueError):
    """Inconsistent run or walk configuration."""


class CapExceededError(MarkovBasisError):
    """A configured resource cap was hit. Never raised for a silent truncation."""

    def __init__(self, message, cap=None):
        super().__init__(message)
        self.cap = cap


class CompletionOverflow(CapExceededError):
    """Binomial completion exceeded its generator-count or degree cap."""


class EnumerationCapError(CapExceededError):
    """A fiber has more points than the enumeration cap allows."""


class NonConvergenceError(MarkovBasisError):
    """The MLE fit did not converge where a converged fit is required."""


class InconsistentFitError(MarkovBasisError, ValueError):
    """A cell has zero fitted value but a positive count."""


class ParseError(MarkovBasisError, ValueError):
    """Malformed input file. Carries the offending path and 1-based line."""

    def __init__(self, path, line, message):
        where = f"{path}:{line}" if line is not None else str(path)
        super().__init__(f"{where}: {message}")
        self.path = path
        self.line = line
