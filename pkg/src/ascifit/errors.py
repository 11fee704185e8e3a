"""Exception hierarchy shared by all ascifit modules."""


class AscifitError(Exception):
    """Base class for every error raised by this package."""


class InputError(AscifitError, ValueError):
    """Bad caller input (CLI exit status 1)."""


class NumericalError(AscifitError, ArithmeticError):
    """A numerical routine failed (CLI exit status 2)."""


class EmptyInput(InputError):
    pass


class NonFinite(InputError):
    pass


class LengthMismatch(InputError):
    pass


class BadEta(InputError):
    pass


class TooLarge(InputError):
    pass


class InsufficientPoints(InputError):
    pass


class SigmaZero(InputError):
    pass


class OutOfDomain(InputError):
    pass


class NoConvergence(NumericalError):
    pass
