"""Exception hierarchy shared by every oplogic module."""

from __future__ import annotations


class OpLogicError(Exception):
    """Base class for all errors raised by oplogic."""


class DomainError(OpLogicError, ValueError):
    """An argument lies outside the domain of an operation."""


class SizeError(OpLogicError):
    """A configured enumeration bound or budget would be exceeded."""


class ParseError(OpLogicError):
    """Lexical or syntax error, optionally carrying a 1-based position."""

    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        self.message = message
        self.line = line
        self.column = column
        super().__init__(self._render())

    def _render(self) -> str:
        if self.line is None:
            return self.message
        return f"{self.line}:{self.column}: {self.message}"

    def at(self, line: int | None, column: int | None):
        """Return a copy of this error positioned at ``line``/``column``."""
        err = type(self).__new__(type(self))
        ParseError.__init__(err, self.message, line, column)
        return err


class TypingError(ParseError):
    """Ill-typed construction (atom arity/type mismatch, bad quantifier, ...)."""


class IdentityError(TypingError):
    """Identity requested between terms of type e1."""

    def __init__(self, message: str = "identity undefined at type e1",
                 line: int | None = None, column: int | None = None):
        super().__init__(message, line, column)


class CaptureError(OpLogicError):
    """A substitution would capture a free variable of the substituted term."""


class ClassificationError(DomainError):
    """A type or constant is not an opaque relation where one is required."""


class ProofSyntaxError(ParseError):
    """Malformed proof script."""


class FrameError(OpLogicError):
    """Malformed frame description or an evaluation outside the frame."""
