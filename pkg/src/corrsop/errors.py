"""Exception hierarchy shared by all corrsop modules."""


class CorrSopError(Exception):
    """Base class for every error raised by corrsop."""


class DomainError(CorrSopError, ValueError):
    """Argument outside the mathematical domain of an operation."""


class NonConvergence(CorrSopError, ArithmeticError):
    """A series or quadrature did not reach its tolerance within its budget."""


class DegenerateCorrelation(CorrSopError, ValueError):
    """A fully-correlated configuration was routed to a general formula.

    Fully-correlated links (|eta| = 1 or |lambda_e| = 1) have dedicated
    closed forms; the general expressions divide by ``1 - eta**2``.
    """


class SecrecyInfeasible(CorrSopError, ValueError):
    """Positive secrecy rate cannot be guaranteed for the configuration."""


class ConfigError(CorrSopError, ValueError):
    """Invalid sweep/validation configuration."""
