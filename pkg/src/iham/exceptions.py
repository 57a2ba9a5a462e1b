"""Exception hierarchy shared by every module of the package."""


class IhamError(Exception):
    """Base class for all package errors."""


class ExprError(IhamError, ValueError):
    """Base class for expression-language errors."""


class ExprSyntaxError(ExprError):
    """Malformed expression source.

    ``offset`` is the byte offset into the source where parsing failed.
    """

    def __init__(self, message, offset, source=None):
        self.offset = offset
        self.source = source
        super().__init__(f"{message} (at offset {offset})")


class UnknownFunctionError(ExprSyntaxError):
    pass


class UnboundNameError(ExprError):
    def __init__(self, name):
        self.name = name
        super().__init__(f"unbound name {name!r}")


class ExprDomainError(ExprError, ArithmeticError):
    """Evaluation left the real domain; ``subexpr`` is the offending node."""

    def __init__(self, message, subexpr):
        self.subexpr = subexpr
        super().__init__(f"{message} in {subexpr}")


class ProblemValidationError(IhamError, ValueError):
    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__("; ".join(self.violations))


class ConvergenceError(IhamError, ArithmeticError):
    """Iterative solver stopped before reaching its tolerance."""

    def __init__(self, message, residual=None, iterations=None):
        self.residual = residual
        self.iterations = iterations
        super().__init__(message)


class ZeroPivotError(IhamError, ArithmeticError):
    """Zero pivot in an unpivoted elimination; indicates a malformed system."""
