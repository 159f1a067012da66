"""Exception hierarchy.

Two families matter to callers (and map to distinct CLI exit codes):
precondition violations (bad sizes, unsupported parameters, guard limits) and
numerical failures (rank deficiency, annihilated columns, no solution).
"""


class SparseCorruptError(Exception):
    """Base class for all package errors."""


class PreconditionError(SparseCorruptError, ValueError):
    """Inputs violate a documented precondition."""


class DimensionError(PreconditionError):
    pass


class UnsupportedParameterError(PreconditionError):
    pass


class GuardExceededError(PreconditionError):
    """A combinatorial search would exceed the configured work limit."""


class NumericalError(SparseCorruptError):
    """A well-posed call failed for numerical or structural reasons."""


class SingularSystemError(NumericalError):
    """A (sub)dictionary that must have full column rank does not."""


class DegenerateColumnError(NumericalError):
    """One or more columns are (numerically) zero, e.g. after projection."""

    def __init__(self, columns, message="degenerate columns"):
        self.columns = list(columns)
        shown = ", ".join(str(c) for c in self.columns[:10])
        more = "" if len(self.columns) <= 10 else f", ... ({len(self.columns)} total)"
        super().__init__(f"{message}: [{shown}{more}]")


class InfeasibleError(NumericalError):
    pass


class NotFoundError(NumericalError):
    pass
