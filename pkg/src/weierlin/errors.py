"""Exception hierarchy.

``DomainError`` subclasses signal a mathematically meaningful refusal
(a convergence gate, a resonance, a missing offset).  The CLI maps them
to exit status 2; everything else is a programming or I/O error.
"""


class DomainError(Exception):
    """Base class for refusals that follow from the mathematics, not from bad input."""


class DimensionError(ValueError):
    """Vector or map dimensions do not agree."""


class DegreeOverflowError(ValueError):
    """Composition would exceed the configured degree cap."""


class ConvergenceError(DomainError, RuntimeError):
    """Iterative solver exhausted its budget."""


class SingularSystemError(DomainError, ArithmeticError):
    """Newton system is singular; no step can be taken."""


class DefectiveMatrixError(DomainError, ArithmeticError):
    """Eigenvectors do not span the space (repeated eigenvalue without full multiplicity)."""


class ResonanceError(DomainError, ValueError):
    """A small divisor appeared while solving the series.

    Attributes
    ----------
    index : tuple
        Offending multi-index ``m`` (or resonance witness ``n``).
    target : int or None
        Eigenvalue index ``l`` with ``|lambda^m - lambda_l|`` below tolerance.
    """

    def __init__(self, message, index=None, target=None):
        super().__init__(message)
        self.index = index
        self.target = target


class NoNonzeroOffset(DomainError, RuntimeError):
    """Only the trivial offset ``c(0) = 0`` was found: 0 is not an almost-period."""


class HardyViolation(DomainError, ValueError):
    """Weierstrass series outside the window ``|lambda r| > 1 and |r| < 1``."""


class HardyWarning(UserWarning):
    """A mode was dropped because it fails the Hardy window."""


class H1Violation(DomainError, ValueError):
    """Linear part of the vector field does not have exactly one expanding rate."""


class DominanceTie(DomainError, ValueError):
    """Two modes share the smallest ratio modulus, so no mode dominates."""


class DegeneratePointCloud(DomainError, ValueError):
    """All points fall into a single box at the finest scale."""
