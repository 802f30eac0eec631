"""Exception types shared across the package."""


class KgpeError(Exception):
    """Base class for all package-specific failures."""


class DomainError(KgpeError, ValueError):
    """An input violates a physical or mathematical precondition."""


class ResourceError(KgpeError, RuntimeError):
    """A requested computation exceeds the dense-storage budget."""


class ConvergenceError(KgpeError, RuntimeError):
    """An iterative solve exhausted its budget.

    Carries the last residual so callers can report how close it got.
    """

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class BoundaryError(KgpeError, RuntimeError):
    """The boundary-density monitor tripped during propagation."""


class LockstepError(KgpeError, RuntimeError):
    """Condensate and Bogoliubov mode clocks disagree beyond 1e-12."""


class GridMismatchError(KgpeError, ValueError):
    """Two lattice objects that must share a grid do not."""
