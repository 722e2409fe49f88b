"""Exception types raised across the package."""


class EmpBetaError(Exception):
    """Base class for all package errors."""


class DomainError(EmpBetaError, ValueError):
    """An argument lies outside the domain of the operation."""


class DimensionMismatch(EmpBetaError, ValueError):
    pass


class NonFiniteInput(EmpBetaError, ValueError):
    pass


class ParseError(EmpBetaError, ValueError):
    pass


class TiesPresent(EmpBetaError, ValueError):
    """A column contains duplicated values and ties were not allowed."""


class TiedRanks(TiesPresent):
    """A rank column is not a permutation of 1..n."""


class UndefinedBandwidth(EmpBetaError, ValueError):
    """The bias term vanishes, so the data-driven Bernstein degree is undefined."""


class ConfigError(EmpBetaError, ValueError):
    pass
