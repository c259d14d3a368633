"""Exception hierarchy shared by every module of the package."""


class WeylPoissonError(Exception):
    """Base class for all engine errors."""


class RingMismatch(WeylPoissonError, TypeError):
    pass


class IndexMismatch(WeylPoissonError, ValueError):
    pass


class NotAPthPower(WeylPoissonError, ValueError):
    pass


class NoReconstruction(WeylPoissonError, ValueError):
    pass


class NonInvertibleDenominator(WeylPoissonError, ZeroDivisionError):
    pass


class RelationCheckFailed(WeylPoissonError, ValueError):
    pass


class NotCentral(WeylPoissonError, ValueError):
    def __init__(self, message, term=None):
        super().__init__(message)
        self.term = term


class RingNotCharP(WeylPoissonError, ValueError):
    pass


class NotDivisibleByP(WeylPoissonError, ArithmeticError):
    pass


class NotClosed(WeylPoissonError, ValueError):
    pass


class UnsupportedPrime(WeylPoissonError, ValueError):
    pass


class NormalizationFailure(WeylPoissonError, ValueError):
    pass


class SchemaError(WeylPoissonError, ValueError):
    """Malformed JSON input; ``path`` is a JSON pointer to the offending field."""

    def __init__(self, message, path=""):
        super().__init__(f"{path or '/'}: {message}")
        self.path = path or "/"
