"""Exception hierarchy shared by all modules."""


class GaussBallError(Exception):
    """Base class for library errors."""


class InputError(GaussBallError, ValueError):
    """Invalid user-supplied input (maps to CLI exit code 2)."""


class NumericalError(GaussBallError, ArithmeticError):
    """A numerical routine could not meet its contract (CLI exit code 1)."""


class DimensionZero(InputError):
    pass


class NotSymmetric(InputError):
    pass


class NotPositiveDefinite(InputError):
    pass


class DimensionMismatch(InputError):
    pass


class SOutOfRange(InputError):
    pass


class TNonPositive(InputError):
    pass


class IndexOutOfRange(InputError):
    pass


class IdenticalCovariances(InputError):
    pass


class PaperFormulaDomain(InputError):
    """The printed KL expression is undefined for Δ/t >= 1."""


class ConvergenceFailure(NumericalError):
    pass


class InversionDivergence(NumericalError):
    """Characteristic-function inversion could not reach its tolerance."""


class ClampError(NumericalError):
    """A probability left [0, 1] by more than the allowed rounding slack."""
