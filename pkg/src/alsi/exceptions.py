"""Exception and warning types shared across the package."""


class AlsiError(Exception):
    """Base class for all package errors."""


class ContractViolation(AlsiError):
    """An input violated a documented precondition."""


class DataError(AlsiError):
    """Malformed input data (parse errors, bad headers, ragged rows)."""


class FactorizationError(AlsiError):
    """A matrix factorization failed to converge or is undefined."""


class SingularMatrixError(AlsiError):
    """An inverse-based operation hit a singular matrix with no ridge."""


class NumericsWarning(UserWarning):
    """Non-fatal numerical event (clipped eigenvalues, dropped columns...)."""
