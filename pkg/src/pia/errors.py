"""Exception hierarchy shared by the engine, the job reader and the CLI."""


class PiaError(Exception):
    """Base class for all engine errors."""


class ExprSyntaxError(PiaError):
    """Malformed expression text."""

    def __init__(self, message, position=None, expected=()):
        self.position = position
        self.expected = tuple(expected)
        where = f" at position {position}" if position is not None else ""
        exp = f" (expected one of: {', '.join(self.expected)})" if self.expected else ""
        super().__init__(f"{message}{where}{exp}")


class NotLinearInI(PiaError):
    """Expression cannot be written as a + i*b with i-free a and b."""


class JobFileError(PiaError):
    pass


class UnknownKey(JobFileError):
    pass


class MissingRequiredField(JobFileError):
    pass


class TypeMismatch(JobFileError):
    pass


class FactorizationOutOfScope(PiaError):
    """Denominator needs factors of degree > 2 in the variable.

    ``together`` holds the single-fraction form so callers can degrade.
    """

    def __init__(self, message, together=None):
        super().__init__(message)
        self.together = together


class NotIntegrable(PiaError):
    pass


class SignUndeterminable(PiaError):
    pass


class ZeroDenominator(PiaError):
    pass


class DegenerateEigenproblem(PiaError):
    pass


class SingularPoint(PiaError):
    pass


class UnboundSymbol(PiaError):
    pass


class ScriptError(PiaError):
    """Problem in an appended evaluation script."""
