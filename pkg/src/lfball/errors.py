"""Exception hierarchy.

Numerical "negative" outcomes (an invalid map, a violated Gram check) are
reported as values, not raised. Exceptions are reserved for inputs that cannot
be processed and for computations that could not reach a conclusion.
"""


class LfballError(Exception):
    """Base class for all package errors."""


class DimensionError(LfballError, ValueError):
    """Shapes or lengths of the inputs do not match."""


class DomainError(LfballError, ValueError):
    """An input lies outside the domain of the operation."""


class PoleError(LfballError, ZeroDivisionError):
    """A linear fractional expression hit its pole."""


class NotSelfMapError(LfballError):
    """A map sent an interior point to (or beyond) the boundary."""


class NotPSDError(LfballError):
    """A matrix expected to be positive semidefinite is not.

    The offending eigenvalue is kept on ``eigenvalue``.
    """

    def __init__(self, msg, eigenvalue):
        super().__init__(msg)
        self.eigenvalue = eigenvalue


class NotPositiveDefiniteError(LfballError):
    """A matrix expected to be positive definite is not."""


class IllConditionedError(LfballError):
    """Sample points are too close together to give a usable Gram matrix."""


class ValidationError(LfballError):
    """Map data violates a self-map condition."""


class NumericalFailure(LfballError):
    """Base for computations that ran out of precision or did not converge."""


class PrecisionExhaustedError(NumericalFailure):
    """Floating point can no longer resolve the quantity being tracked.

    ``last_n`` is the last reliable iteration index and ``partial`` holds
    whatever was computed up to it.
    """

    def __init__(self, msg, last_n, partial=None):
        super().__init__(msg)
        self.last_n = last_n
        self.partial = partial


class InconclusiveError(NumericalFailure):
    """An estimate did not settle; ``diagnostics`` says why."""

    def __init__(self, msg, diagnostics=None):
        super().__init__(msg)
        self.diagnostics = diagnostics or {}


class InvariantViolation(LfballError):
    """A mathematically guaranteed inequality failed: an implementation bug."""


class SchemaError(LfballError, ValueError):
    """A map document is malformed; ``field`` names the offending entry."""

    def __init__(self, msg, field=None):
        super().__init__(msg if field is None else f"{field}: {msg}")
        self.field = field


class DocumentParseError(SchemaError):
    """A map document is not valid JSON; ``line`` and ``column`` locate the fault."""

    def __init__(self, msg, line, column):
        super().__init__(f"line {line}, column {column}: {msg}")
        self.line = line
        self.column = column
