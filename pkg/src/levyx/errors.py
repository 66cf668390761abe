"""Exception hierarchy shared by the library and the CLI exit codes."""


class LevyxError(Exception):
    """Base class."""


class ValidationError(LevyxError, ValueError):
    """Invalid input: bad parameters, malformed specs, violated preconditions."""


class DomainError(ValidationError):
    """Argument outside the domain of a function."""


class RegimeError(ValidationError):
    """Exponent outside the regime an operation requires (drift sign, theta range)."""


class NumericalError(LevyxError, ArithmeticError):
    """Quadrature, series or inversion failed to reach the requested tolerance."""


class HorizonError(NumericalError):
    """Simulation horizon too short for the requested output."""
