"""Exception hierarchy shared by all modules."""


class DCMError(Exception):
    pass


class DomainError(DCMError, ValueError):
    """Argument outside the mathematical domain of an operation."""


class SingularityError(DomainError):
    """Evaluation requested at a kernel singularity (coincident points)."""


class AccuracyError(DCMError):
    """Requested evaluation would not meet the documented accuracy."""


class NumericalFailure(DCMError, ArithmeticError):
    """Linear solve broke down (singular matrix, resonance, bad geometry)."""


class UsageError(DCMError, ValueError):
    """Inconsistent inputs or invalid configuration."""
