"""Exception hierarchy shared by the library and the command line."""


class TiescanError(Exception):
    """Base class for all package errors."""


class InputError(TiescanError, ValueError):
    """Malformed or unusable input data."""


class ConfigError(TiescanError, ValueError):
    """Invalid option or option combination."""


class DegenerateStatisticError(TiescanError, ArithmeticError):
    """A standardized statistic has zero permutation variance."""
