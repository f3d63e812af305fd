"""Exception types shared across the package."""


class PecflowError(Exception):
    """Base class for pecflow errors."""


class ConvergenceError(PecflowError):
    """An iterative solver ran out of iterations.

    The last (or best) iterate is attached so callers can decide whether to
    keep going with a flagged result.
    """

    def __init__(self, message, last=None):
        super().__init__(message)
        self.last = last


class DegenerateDataError(PecflowError):
    """The data carries no variation to decompose."""


class InsufficientDataError(PecflowError):
    """Too few observations to produce a reliable fit."""


class SchemaError(PecflowError):
    """Input file violates the expected schema.

    `line` is the 1-based line number in the offending file, when known.
    """

    def __init__(self, message, line=None):
        super().__init__(message)
        self.line = line
