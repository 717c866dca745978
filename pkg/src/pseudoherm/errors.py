"""Exception hierarchy shared by every module of the package."""


class PseudoHermError(Exception):
    """Base class for all package errors."""


class NumericalFailure(PseudoHermError):
    """An algorithm failed to deliver a numerically trustworthy result."""


class NoConvergence(NumericalFailure):
    """An iterative eigensolver exhausted its iteration budget."""

    def __init__(self, message, partial=None):
        super().__init__(message)
        self.partial = partial


class NotHermitian(PseudoHermError, ValueError):
    pass


class NotSquare(PseudoHermError, ValueError):
    pass


class DimensionMismatch(PseudoHermError, ValueError):
    pass


class Overflow(NumericalFailure):
    """Result magnitude exceeds the representable (or guarded) range."""


class InseparableCluster(PseudoHermError):
    """A Schur reordering would split a group of (numerically) equal eigenvalues."""


class NoInvertibleFound(NumericalFailure):
    """No invertible Hermitian intertwiner was found in the sampled span."""


class NotAnIntertwiner(PseudoHermError, ValueError):
    pass


class SingularG(PseudoHermError, ValueError):
    pass


class ComplexCluster(PseudoHermError, ValueError):
    pass


class NotIndefinite(PseudoHermError, ValueError):
    pass


class UnsupportedMultiplicity(PseudoHermError, ValueError):
    pass


class OnDiabolicPoint(PseudoHermError, ValueError):
    pass


class NotUnitary(PseudoHermError, ValueError):
    pass


class NotInversionSymmetric(PseudoHermError, ValueError):
    pass


class SingularGa(PseudoHermError, ValueError):
    pass


class NoSignChange(PseudoHermError, ValueError):
    pass


class NoDegeneracyFound(PseudoHermError):
    pass
