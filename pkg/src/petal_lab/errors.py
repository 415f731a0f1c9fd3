"""Error types shared across the package."""


class PetalLabError(Exception):
    """Base class for all library errors."""


class DomainError(PetalLabError, ValueError):
    """A point lies outside the domain an operation requires."""


class SingularityError(PetalLabError, ValueError):
    """A kernel was evaluated at its singular point (e.g. Green's function at z = w)."""


class UnsupportedExactError(PetalLabError, NotImplementedError):
    """No closed-form or explicitly mapped evaluation exists for this input."""


class ConvergenceError(PetalLabError, RuntimeError):
    """An iterative solver failed to reach its tolerance."""


class BackwardInadmissibleError(PetalLabError, ValueError):
    """A backward flow step leaves the Koenigs domain."""


class NoBackwardOrbitError(PetalLabError, ValueError):
    """The point does not lie in a hyperbolic petal."""


class WrongTypeError(PetalLabError, TypeError):
    """The model is of the wrong dynamical type for the requested operation."""


class InputError(PetalLabError, ValueError):
    """Malformed user input (domain specs, function samples)."""
