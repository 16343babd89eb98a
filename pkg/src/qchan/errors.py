"""Exception types raised across the package."""


class QchanError(Exception):
    """Base class for all package errors."""


class NonSquare(QchanError, ValueError):
    pass


class NonHermitianInput(QchanError, ValueError):
    pass


class RankDeficientBasis(QchanError, ValueError):
    pass


class DimensionMismatch(QchanError, ValueError):
    pass


class InvalidState(QchanError, ValueError):
    """Matrix or vector fails density-matrix / pure-state invariants."""


class IncompleteKrausSet(QchanError, ValueError):
    pass


class ParameterOutOfRange(QchanError, ValueError):
    pass


class NotAProjector(QchanError, ValueError):
    pass


class NonUnitary(QchanError, ValueError):
    pass


class ExpansionResidual(QchanError, ArithmeticError):
    """An operator could not be expanded in the given basis to tolerance."""


class ProjectorDefect(QchanError, ArithmeticError):
    """Syndrome projectors are not idempotent or not mutually orthogonal.

    Raised by recovery construction; it means the error set fed in was not
    correctable on the chosen code.
    """


class ZeroTrace(QchanError, ArithmeticError):
    pass


class NonPureInput(QchanError, ValueError):
    pass


class MalformedInput(QchanError, ValueError):
    pass
