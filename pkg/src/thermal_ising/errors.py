"""Exception types raised by the library."""


class ThermalIsingError(Exception):
    """Base class for all library errors."""


class DomainError(ThermalIsingError, ValueError):
    """Argument outside the domain where the quantity is defined."""


class PoleError(ThermalIsingError, ZeroDivisionError):
    """Evaluation point sits on a pole of a meromorphic function."""


class NearSingularity(ThermalIsingError):
    """Evaluation point is closer than the guard radius to a pole or zero."""


class ConvergenceError(ThermalIsingError):
    """A quadrature, series or iterative solve missed its tolerance."""


class ValidityError(ThermalIsingError):
    """A representation is used outside its domain of validity."""


class OscillationBudgetExceeded(ConvergenceError):
    """Truncating an oscillatory integral left too large a remainder."""


class SingularMatrix(ThermalIsingError):
    """A discretised linear system could not be solved reliably."""


class TruncationError(ThermalIsingError):
    """A truncated domain or series left a tail above tolerance."""


class TailTooLarge(TruncationError):
    """The form-factor mode sum tail exceeds the policy tolerance."""


class BranchAmbiguity(ThermalIsingError):
    """The branch of a logarithm could not be fixed by continuity."""


class BranchError(ThermalIsingError):
    """A branch point was hit exactly."""


class StepSizeError(ThermalIsingError):
    """An ODE step-halving error estimate exceeded tolerance."""


class NonDecayedProfile(ThermalIsingError):
    """A field profile has not decayed at the ends of its domain."""


class RegimeWarning(UserWarning):
    """An asymptotic formula is used outside its comfortable regime."""


class PrecisionLoss(UserWarning):
    """Cancellation may have degraded the accuracy of a result."""
