"""Exception taxonomy shared across the package.

Each class maps onto one failure family so callers (and the CLI exit-code
table) can distinguish bad input text, bad values, blown resource budgets,
and numerical breakdowns.
"""


class TrotterrError(Exception):
    """Base class for all errors raised by this package."""


class FcidumpError(TrotterrError):
    """Malformed FCIDUMP content; carries a 1-based line number when known."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class ValidationError(TrotterrError):
    """A value or combination of values is outside the documented domain."""


class ResourceLimitError(TrotterrError):
    """A computation would exceed a configured size limit."""


class NumericalError(TrotterrError):
    """An eigensolver failed to converge, or a result is numerically unusable
    (phase wrap, unresolvable degeneracy, non-Hermitian input)."""
