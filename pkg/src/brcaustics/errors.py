"""Exception hierarchy.

Two families matter to callers (and to the CLI exit code):
input/validation problems (exit 2) and numerical failures (exit 1).
"""


class CausticError(Exception):
    """Base class for every error raised by this package."""


class ValidationError(CausticError, ValueError):
    """Rejected input: malformed scene, bad argument, failed precondition."""

    def __init__(self, message, field=None):
        super().__init__(message if field is None else f"{field}: {message}")
        self.field = field


class ExpressionError(ValidationError):
    """Problem with an embedding expression; carries a source position."""

    def __init__(self, message, line=1, column=1):
        super().__init__(f"{message} (line {line}, column {column})")
        self.line = line
        self.column = column


class ExpressionSyntaxError(ExpressionError):
    pass


class UnknownIdentifierError(ExpressionError):
    pass


class NonIntegerExponentError(ExpressionError):
    pass


class DomainError(ValidationError):
    """Evaluation outside the domain of a function or of the scene."""


class NumericalFailure(CausticError):
    """A numerical procedure failed or two computation paths disagreed."""


class FrameError(NumericalFailure):
    """The momentary frame cannot be built at the requested point."""


class NotImmersed(FrameError):
    pass


class NotSpacelike(FrameError):
    pass


class NotTimelike(FrameError):
    pass
