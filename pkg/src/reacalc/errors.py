"""Exception hierarchy shared by every layer of the engine."""

from __future__ import annotations


class ReacalcError(Exception):
    """Base class for all engine errors."""


class DomainError(ReacalcError):
    """A value does not belong to the declared finite domain."""


class EvalError(ReacalcError):
    """Evaluation of an expression failed (e.g. head of an empty sequence)."""


class SpaceTooLarge(ReacalcError):
    """An exhaustive enumeration would exceed the configured state limit."""


class BoundExceeded(ReacalcError):
    """A bounded oracle hit a value it cannot represent within its bounds."""


class TraceMismatch(ReacalcError):
    """Same-trace quiescent laws were applied to terms with different traces."""


class AlphabetMismatch(ReacalcError):
    """Two contracts over different alphabets or state spaces were combined."""


class EmptyChoice(ReacalcError):
    """A choice operator was applied to an empty list of contracts."""


class NonProductiveBody(ReacalcError):
    """A while loop body may terminate without engaging in any event."""


class LensOverlap(ReacalcError):
    """Parallel name sets are not independent."""


class ExtensionBoundExceeded(ReacalcError):
    """The weakest-rely extension enumeration needed more events than allowed."""


class StuckConfiguration(ReacalcError):
    """A miraculous configuration was asked to step."""


class NormalFormEscape(ReacalcError):
    """An operator produced a relation outside the I/E/Phi normal form."""


class DslError(ReacalcError):
    """Base class for front-end diagnostics; carries an optional location."""

    def __init__(self, message: str, line: int | None = None, col: int | None = None):
        self.message = message
        self.line = line
        self.col = col
        where = f"{line}:{col}: " if line is not None else ""
        super().__init__(f"{where}{message}")


class SyntaxError_(DslError):
    """Parse failure; ``expected`` lists what the parser was looking for."""

    def __init__(self, message: str, line: int, col: int, expected: tuple[str, ...] = ()):
        self.expected = tuple(expected)
        super().__init__(message, line, col)


class TypeError_(DslError):
    """Ill-typed expression or statement."""


class UnknownName(DslError):
    """Reference to an undeclared channel, variable or process."""


# Public aliases; the trailing underscore only avoids shadowing builtins
# inside this module.
DslSyntaxError = SyntaxError_
DslTypeError = TypeError_
