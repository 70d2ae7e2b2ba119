"""Exception hierarchy shared by all modules."""


class BKError(Exception):
    """Base class for every error raised by :mod:`bksph`."""


class CentralIncompatible(BKError):
    pass


class NonWeylStable(BKError):
    pass


class KernelNotHandled(BKError):
    pass


class DimensionMismatch(BKError, ValueError):
    pass


class PoleEncountered(BKError, ZeroDivisionError):
    pass


class IndeterminateAtPole(BKError):
    pass


class DomainViolation(BKError, ValueError):
    """A Mellin or zeta integral was requested outside its convergence region."""


class NotSurjective(BKError):
    pass


class SupportEscape(BKError):
    pass


class SingularMatrix(BKError, ValueError):
    pass


class SlowDecay(BKError):
    """Spectral data does not decay fast enough for the requested truncation."""


class CalibrationUnstable(BKError):
    pass


class WDefectTooLarge(BKError):
    pass


class TubeViolation(BKError, ValueError):
    pass


class SlowModeDisabled(BKError):
    pass


class ConfigInvalid(BKError, ValueError):
    def __init__(self, errors):
        if isinstance(errors, str):
            errors = [errors]
        self.errors = list(errors)
        super().__init__("; ".join(self.errors))
