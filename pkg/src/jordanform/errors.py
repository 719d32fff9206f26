"""Exception types shared across the package."""


class JordanFormError(Exception):
    """Base class for all errors raised by this package."""


class RankDeficientError(JordanFormError):
    """Raised when a least-squares system is numerically rank deficient."""


class ConvergenceError(JordanFormError):
    """Raised when an iteration fails to converge.

    Carries optional diagnostic attributes: ``iterations`` (steps taken)
    and ``kappa`` (condition estimate, ``inf`` for a rank-deficient
    Jacobian).
    """

    def __init__(self, msg, iterations=None, kappa=None):
        super().__init__(msg)
        self.iterations = iterations
        self.kappa = kappa


class StructureError(JordanFormError):
    """Raised when a requested or identified Jordan structure is
    inconsistent with what the data supports."""
