class CoslawError(Exception):
    """Base class for all errors raised by coslaw."""


class InvalidMatrix(CoslawError, ValueError):
    pass


class NotNormal(CoslawError, ValueError):
    pass


class NoConvergence(CoslawError, ArithmeticError):
    pass


class DomainError(CoslawError, ValueError):
    """Argument outside the accuracy domain of an evaluator."""


class OutsideDisk(CoslawError, ValueError):
    """Square-root series argument is not strictly inside the unit disk.

    ``stage`` and ``partial`` are set when raised mid-way through a
    dyadic reconstruction.
    """

    def __init__(self, message, stage=None, partial=None):
        super().__init__(message)
        self.stage = stage
        self.partial = partial if partial is not None else []


class ConfigError(CoslawError, ValueError):
    pass


class Overflowed(CoslawError, ArithmeticError):
    """A value exceeded the magnitude cap of the producing operation."""
