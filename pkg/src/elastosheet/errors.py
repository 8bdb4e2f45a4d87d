"""Exception hierarchy shared by all modules."""


class SheetError(Exception):
    """Base class for every error raised by this package."""


class DomainError(SheetError, ValueError):
    pass


class DegenerateAxisError(DomainError):
    pass


class InconsistentTraceError(SheetError):
    """The two boundary traces disagree (slopes, density or sound speed)."""


class DegenerateLiftError(SheetError):
    pass


class DegenerateTransformationError(SheetError):
    def __init__(self, message, condition=None):
        super().__init__(message)
        self.condition = condition


class PoleProximity(SheetError):
    """Raised when a frequency sits on (or numerically at) a pole.

    ``factor`` holds the guarded quantity ``|k1| * |k1**2 + k2|`` and
    ``threshold`` the value it fell below.
    """

    def __init__(self, message, factor=None, threshold=None):
        super().__init__(message)
        self.factor = factor
        self.threshold = threshold


class FactoredFormUnavailable(SheetError):
    pass


class RootCountAnomaly(SheetError):
    def __init__(self, message, trace=None):
        super().__init__(message)
        self.trace = trace
