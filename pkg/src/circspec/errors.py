"""Exception hierarchy shared by all modules."""


class CircSpecError(Exception):
    """Base class for every error raised by circspec."""


class ConfigurationError(CircSpecError, ValueError):
    """Unknown map family / noise profile, or invalid parameters."""


class DomainError(CircSpecError, ValueError):
    """An argument lies outside the domain of an operation (e.g. epsilon <= 0)."""


class InvalidOrbitError(CircSpecError, ValueError):
    """A point list does not close up into a periodic orbit."""


class BifurcationPointError(CircSpecError):
    """A neutral orbit (|multiplier| = 1) was supplied where hyperbolicity is required."""


class HypothesisViolationError(CircSpecError):
    """Sampled dynamics contradict the assumptions behind the phase partition."""

    def __init__(self, message, sample=None):
        super().__init__(message)
        self.sample = sample


class NumericalFailureError(CircSpecError):
    """An iterative numerical method did not converge."""

    def __init__(self, message, iterations=None):
        super().__init__(message)
        self.iterations = iterations


class DegeneracyError(CircSpecError):
    """The eigenvalue 1 is not simple to working precision."""


class ContractError(CircSpecError, ValueError):
    """Inputs violate a structural precondition (ordering, grid alignment...)."""
