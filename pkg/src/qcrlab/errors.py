"""Exception types raised across qcrlab."""


class QcrlabError(Exception):
    """Base class for all qcrlab errors."""


class ValidationError(QcrlabError, ValueError):
    """Invalid parameters or inputs."""


class ConfigInvalid(ValidationError):
    """A device config or sweep description failed validation.

    ``errors`` maps field names to messages.
    """

    def __init__(self, errors):
        if isinstance(errors, str):
            errors = {"config": errors}
        self.errors = dict(errors)
        lines = [f"{key}: {msg}" for key, msg in self.errors.items()]
        super().__init__("invalid configuration:\n  " + "\n  ".join(lines))


class NumericalError(QcrlabError, ArithmeticError):
    """A numerical procedure failed to deliver a result."""


class QuadratureNotConverged(NumericalError):
    pass


class DivisionDegenerate(NumericalError):
    pass


class NoRootInBracket(NumericalError):
    pass


class FitDiverged(NumericalError):
    """Raised when an optimizer exhausts its iteration budget.

    The last iterate is attached as ``result``.
    """

    def __init__(self, message, result=None):
        super().__init__(message)
        self.result = result


class GridTooCoarse(ValidationError):
    pass


class PeaksNotResolved(NumericalError):
    pass


class DataOutOfRange(NumericalError):
    pass
