"""Exception hierarchy shared by the solver modules and the CLI."""


class PNPError(Exception):
    """Base class for every error raised by :mod:`modpnp`."""


class InvalidExtentError(PNPError, ValueError):
    pass


class TooFewCellsError(PNPError, ValueError):
    pass


class SingularPivotError(PNPError, ArithmeticError):
    pass


class SingularSystemError(PNPError, ArithmeticError):
    pass


class NegativeConcentrationError(PNPError, ValueError):
    pass


class NegativeCoefficientError(PNPError, ValueError):
    pass


class SubIterationDivergenceError(PNPError, RuntimeError):
    pass


class ConfigError(PNPError, ValueError):
    pass


class ConfigParseError(ConfigError):
    def __init__(self, message, line, column=1):
        super().__init__(f"line {line}, column {column}: {message}")
        self.line = line
        self.column = column


class ConfigValidationError(ConfigError):
    def __init__(self, field, reason):
        super().__init__(f"{field}: {reason}")
        self.field = field
        self.reason = reason
