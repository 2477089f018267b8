"""Exception hierarchy.

Every error carries an ``exit_code`` so the CLI can map failures onto
its documented codes (2 validation, 3 numeric failure, 4 I/O).
"""


class RecfosmError(Exception):
    exit_code = 1


class ValidationError(RecfosmError, ValueError):
    exit_code = 2


class ParameterDomainError(ValidationError):
    """Distribution or model parameters outside their valid domain."""


class ConfigurationError(ValidationError):
    """Malformed study spec, unknown label, unsupported option."""


class UnsupportedConfigurationError(ConfigurationError):
    """Valid input that the requested estimator cannot handle."""


class NumericError(RecfosmError, ArithmeticError):
    exit_code = 3


class NonexistentMomentError(NumericError):
    def __init__(self, order, detail=""):
        self.order = order
        msg = f"moment of order {order} does not exist"
        super().__init__(f"{msg}: {detail}" if detail else msg)


class UnsupportedSupportError(NumericError):
    """Support reaches zero or negative values; reciprocal moments diverge."""


class DivisionDomainError(NumericError, ZeroDivisionError):
    def __init__(self, message, row=None, column=None):
        self.row = row
        self.column = column
        super().__init__(message)


class QuadratureError(NumericError):
    def __init__(self, message, partial_value=float("nan"), residual=float("nan")):
        self.partial_value = partial_value
        self.residual = residual
        super().__init__(f"{message} (partial value {partial_value!r}, residual {residual!r})")


class BracketError(NumericError):
    pass


class EstimatorUndefinedError(NumericError):
    """Too few realizations for the requested estimator."""


class ModelError(NumericError):
    def __init__(self, message, point=None, index=None):
        self.point = point
        self.index = index
        super().__init__(message)


class InputFileError(RecfosmError, OSError):
    exit_code = 4
