"""Exception and warning types raised by motorparams."""


class MotorParamsError(Exception):
    """Base class for all package errors."""


class DomainError(MotorParamsError, ValueError):
    """An argument lies outside the domain of the model (e.g. slip <= 0)."""


class DegenerateError(MotorParamsError, ArithmeticError):
    """The circuit collapsed to a (numerically) zero input impedance."""


class ValidationError(MotorParamsError, ValueError):
    """Nameplate or configuration data violates an invariant."""


class NonFiniteError(MotorParamsError, ArithmeticError):
    """A numerical result contained NaN or Inf."""


class ParseError(MotorParamsError, ValueError):
    """A corpus file could not be parsed."""

    def __init__(self, message, row=None, column=None):
        self.row = row
        self.column = column
        where = []
        if row is not None:
            where.append(f"row {row}")
        if column is not None:
            where.append(f"column {column!r}")
        if where:
            message = f"{message} ({', '.join(where)})"
        super().__init__(message)


class ResourceError(MotorParamsError, RuntimeError):
    """A sampler or solver exhausted its budget."""


class MultimodalWarning(UserWarning):
    """The torque-slip curve has more than one local maximum."""
