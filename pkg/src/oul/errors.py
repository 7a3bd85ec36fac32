"""Exception hierarchy.

Two families matter to callers: :class:`PreconditionError` (bad input, an
unmet assumption such as an unstable drift) and :class:`NumericalError`
(the computation itself broke down). The CLI maps them to exit codes 2 and 3.
"""


class OULError(Exception):
    """Base class for all package errors."""


class PreconditionError(OULError, ValueError):
    pass


class NumericalError(OULError, ArithmeticError):
    pass


# -- linear algebra ---------------------------------------------------------

class NonFinite(NumericalError):
    pass


class NonDiagonalizable(NumericalError):
    pass


class Unstable(PreconditionError):
    """Some eigenvalue of the drift matrix has non-positive real part."""


class SingularKroneckerSum(NumericalError):
    pass


class NearSingularPivot(NumericalError):
    pass


class NotSymmetric(PreconditionError):
    pass


class SingularCovariance(NumericalError):
    pass


# -- special functions ------------------------------------------------------

class OrderTooLarge(PreconditionError):
    pass


class PartsMismatch(PreconditionError):
    pass


class RhoTooCloseToOne(NumericalError):
    pass


class PreconditionNotMet(PreconditionError):
    pass


# -- oracles ----------------------------------------------------------------

class CutoffTooLarge(PreconditionError):
    pass


class TailMass(NumericalError):
    pass


class AmplitudeTooLarge(PreconditionError):
    pass


class GridTooCoarse(PreconditionError):
    pass


class OrderOutOfRange(PreconditionError):
    pass


class InvalidModel(PreconditionError):
    pass


# -- configuration ----------------------------------------------------------

class ParseError(PreconditionError):
    def __init__(self, line, reason):
        self.line = line
        self.reason = reason
        where = f"line {line}" if line is not None else "unknown line"
        super().__init__(f"{where}: {reason}")


class ValidationError(PreconditionError):
    def __init__(self, field, reason, line=None):
        self.field = field
        self.reason = reason
        self.line = line
        loc = f" (line {line})" if line is not None else ""
        super().__init__(f"{field}{loc}: {reason}")


class HermiticityDrift(NumericalError):
    pass
