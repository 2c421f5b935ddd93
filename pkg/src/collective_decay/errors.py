"""Exception types shared across the package."""


class DomainError(ValueError):
    """Invalid input: index out of range, wrong shape, violated precondition."""


class CapacityError(DomainError):
    """Problem size outside what a given method supports."""


class NumericalFailure(RuntimeError):
    """An integrator or quadrature lost accuracy beyond its tolerance."""


class ConvergenceError(NumericalFailure):
    """Steady state not reached within the allotted time."""
