"""Exception hierarchy shared by all modules."""


class CNQGError(Exception):
    """Base class for every error raised by this package."""


class InvalidField(CNQGError, ValueError):
    pass


class HermitianViolation(CNQGError, ValueError):
    pass


class MeanNotZero(CNQGError, ValueError):
    pass


class ArityError(CNQGError, ValueError):
    pass


class InvalidTime(CNQGError, ValueError):
    pass


class NotLocalized(CNQGError, ValueError):
    pass


class UnsupportedOrder(CNQGError, ValueError):
    pass


class UnsupportedGrid(CNQGError, ValueError):
    pass


class TooExpensive(CNQGError):
    pass


class SignViolation(CNQGError, ValueError):
    pass


class UnderResolvedMollifier(CNQGError, ValueError):
    pass


class UnderResolved(CNQGError, ValueError):
    pass


class StepTooLarge(CNQGError):
    def __init__(self, message, dt_allowed):
        super().__init__(message)
        self.dt_allowed = dt_allowed


class NumericalBlowup(CNQGError):
    """Non-finite values appeared; ``last_good`` holds the last finite record."""

    def __init__(self, message, last_good=None, trajectory=None):
        super().__init__(message)
        self.last_good = last_good
        self.trajectory = trajectory


class NoContraction(CNQGError):
    def __init__(self, message, result=None):
        super().__init__(message)
        self.result = result


class InvalidExponent(CNQGError, ValueError):
    pass


class InvalidExponents(CNQGError, ValueError):
    pass


class InsufficientData(CNQGError, ValueError):
    pass


class ConfigError(CNQGError, ValueError):
    def __init__(self, key, message):
        super().__init__(f"{key}: {message}")
        self.key = key


class CheckpointError(CNQGError, ValueError):
    pass
