"""Exception hierarchy shared by the library and the CLI.

Every error carries a stable kebab-case ``code`` and the process exit code the
CLI uses for it.
"""


class TernaryError(Exception):
    """Base class for all errors raised by this package."""

    code = "error"
    exit_code = 1


class PolynomialFormatError(TernaryError, ValueError):
    """Raised when a polynomial string cannot be parsed."""

    code = "bad-polynomial"
    exit_code = 3


class PreconditionError(TernaryError, ValueError):
    """Raised when an input violates a documented precondition."""

    code = "precondition"
    exit_code = 4


class ModulusMismatchError(PreconditionError):
    """Raised when operands live over different fields."""

    code = "modulus-mismatch"


class SearchBoundExceeded(TernaryError, RuntimeError):
    """Raised when a bounded search would have to exceed its bound."""

    code = "bound-exceeded"
    exit_code = 5


class InvariantViolation(TernaryError, ArithmeticError):
    """Raised when an exact identity that must hold fails."""

    code = "invariant"
    exit_code = 6


VERIFY_FAILED_EXIT_CODE = 7
