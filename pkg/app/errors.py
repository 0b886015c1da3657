"""Exception hierarchy.

Everything raised on purpose derives from ``TangentFieldError``. The CLI maps
``InvalidInputError`` to exit status 2 and ``VerificationError`` to exit status 1.
"""


class TangentFieldError(Exception):
    """Base class for toolkit errors."""


class InvalidInputError(TangentFieldError, ValueError):
    """A precondition on the inputs does not hold."""


class DimensionMismatchError(InvalidInputError):
    pass


class EmptySetError(InvalidInputError):
    pass


class OffSetPointError(InvalidInputError):
    """A basepoint is farther than the resolution from the set."""


class ScaleResolutionError(InvalidInputError):
    """A blowup would magnify below the sampling fidelity of the data."""


class DegenerateCurveError(InvalidInputError):
    pass


class NoGapError(InvalidInputError):
    """No complementary interval qualifies (lambda overestimated or net too coarse)."""


class DegenerateSelectionError(InvalidInputError):
    """Fewer than two approach indices survive disjoint selection."""


class InvalidTargetError(InvalidInputError):
    pass


class VerificationError(TangentFieldError):
    """A computed certificate failed its check."""


class NonCauchyError(VerificationError):
    pass


class SemicontinuityError(VerificationError):
    pass


class BudgetExceededError(VerificationError):
    """The length budget of a splice or a pipeline stage was exceeded."""

    def __init__(self, message, stage=None, spent=None, budget=None):
        super().__init__(message)
        self.stage = stage
        self.spent = spent
        self.budget = budget
