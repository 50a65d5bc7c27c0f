"""Exception hierarchy shared by all modules."""


class TimeScaleError(Exception):
    """Base class for every error raised by this package."""


class StructuralError(TimeScaleError, ValueError):
    """A structural invariant of an input object is violated."""


class DomainError(TimeScaleError, ValueError):
    """A point lies outside the time scale (typically inside the gap)."""


class UnsupportedError(TimeScaleError):
    """The operation requires a property the input does not have."""


class NumericOverflowError(TimeScaleError, ArithmeticError):
    def __init__(self, lam, detail=""):
        self.lam = lam
        msg = f"non-finite values while integrating at lambda={lam!r}"
        super().__init__(msg + (f": {detail}" if detail else ""))


class ConvergenceError(TimeScaleError):
    """An iterative method did not reach its tolerance."""


class IncompleteSpectrumError(TimeScaleError):
    def __init__(self, found, wanted, ceiling):
        self.found = found
        self.wanted = wanted
        self.ceiling = ceiling
        super().__init__(
            f"found {found} of {wanted} eigenvalues below the scan ceiling lambda={ceiling:.6g}"
        )


class NotAnEigenvalueError(TimeScaleError, ValueError):
    """The supplied lambda is not close to a zero of the characteristic function."""


class ForwardSolveError(TimeScaleError):
    """Forward solver failure inside the inverse loop; carries the coefficients."""

    def __init__(self, coeffs, cause):
        self.coeffs = coeffs
        self.cause = cause
        super().__init__(f"forward solve failed for coefficients {list(coeffs)}: {cause}")
