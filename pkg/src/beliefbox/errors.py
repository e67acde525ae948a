"""Exception hierarchy shared across the package."""


class BeliefBoxError(Exception):
    """Base class for every error raised by beliefbox."""


class DomainError(BeliefBoxError, ValueError):
    """An argument lies outside the domain of an operation."""


class DataError(BeliefBoxError, ValueError):
    """A dataset record or file violates its schema."""


class ConfigError(BeliefBoxError, ValueError):
    """An experiment or run configuration is invalid."""


class ParseError(BeliefBoxError, ValueError):
    """A model response could not be parsed into the expected value."""


class BackendError(BeliefBoxError, RuntimeError):
    """A chat backend failed to produce a response."""


class UndefinedStatisticError(BeliefBoxError, ArithmeticError):
    """A statistic is undefined for the given data (e.g. zero variance)."""


class NumericError(BeliefBoxError, ArithmeticError):
    """A numerical routine could not produce a stable answer."""


class DataQualityError(BeliefBoxError):
    """An observation is unusable (missing verdict, incomplete debate) and is excluded."""
