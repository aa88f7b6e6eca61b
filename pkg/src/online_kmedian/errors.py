"""Exception types raised across the package."""


class KMedianError(Exception):
    pass


class DegenerateInputError(KMedianError, ValueError):
    pass


class InvalidSolutionError(KMedianError, ValueError):
    pass


class InvalidSwapError(KMedianError, ValueError):
    pass


class DuplicatePointError(KMedianError, ValueError):
    pass


class PenaltyMonotonicityError(KMedianError, ValueError):
    pass


class InfeasibleError(KMedianError, ValueError):
    pass


class BicriteriaInapplicableError(KMedianError, ValueError):
    """Raised when bicriteria search is requested with z = 0."""


class UnsupportedModeError(KMedianError, ValueError):
    pass


class OracleTooLargeError(KMedianError, ValueError):
    pass


class DataError(KMedianError, ValueError):
    """Malformed or insufficient input data."""
