"""Exception hierarchy shared by all hardylab modules."""


class HardyLabError(Exception):
    """Base class for every error raised by hardylab."""


class InvalidGridError(HardyLabError, ValueError):
    pass


class InvalidOrderError(HardyLabError, ValueError):
    pass


class DomainError(HardyLabError, ValueError):
    pass


class DegenerateInputError(HardyLabError, ValueError):
    pass


class SingularityError(HardyLabError, ValueError):
    pass


class ConditioningError(HardyLabError, ArithmeticError):
    pass


class TrustViolationError(HardyLabError, ValueError):
    """An operator was applied to vectors outside its exactly represented columns."""


class NotLeftInvertibleError(HardyLabError, ArithmeticError):
    pass


class MultiplicityError(HardyLabError, ArithmeticError):
    pass


class DegenerateThetaError(HardyLabError, ValueError):
    pass


class NumericalFailureError(HardyLabError, ArithmeticError):
    """Raised with a ``report`` dict describing what went wrong numerically."""

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = dict(report or {})


class ConfigError(HardyLabError, ValueError):
    def __init__(self, message, details=None):
        super().__init__(message)
        self.details = details or []
