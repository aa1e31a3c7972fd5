"""Exception hierarchy shared by every module.

The CLI maps the three top-level families onto exit codes:
:class:`ValidationError` -> 2, :class:`PreconditionError` -> 3,
:class:`DegenerateInput` -> 4.
"""


class QsdError(Exception):
    """Base class for all errors raised by this package."""


class ValidationError(QsdError, ValueError):
    """Malformed input: bad matrix, bad distribution, bad parameters."""


class RowSumError(ValidationError):
    pass


class NegativeEntry(ValidationError):
    pass


class NotIrreducible(ValidationError):
    pass


class NotAperiodic(ValidationError):
    pass


class ParamOutOfRange(ValidationError):
    pass


class UnsupportedDimension(ValidationError):
    pass


class WindowTooShort(ValidationError):
    pass


class PreconditionError(QsdError):
    """The input is valid but the requested method does not apply to it."""


class NotReversible(PreconditionError):
    pass


class NonPositiveSpectrum(PreconditionError):
    pass


class NumericalError(QsdError, ArithmeticError):
    pass


class ConvergenceFailure(NumericalError):
    pass


class EigensolverFailure(NumericalError):
    pass


class NonPositiveEll(NumericalError):
    pass


class DegenerateInput(QsdError):
    """The starting distribution coincides with the stationary one."""


class AlreadyStationary(DegenerateInput):
    pass


class StationaryStart(AlreadyStationary):
    pass
