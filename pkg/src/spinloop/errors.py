"""Exception hierarchy shared across the package."""


class SpinloopError(Exception):
    """Base class for all errors raised by spinloop."""


class InvalidInputError(SpinloopError, ValueError):
    """Arguments violate a documented precondition."""


class NoConvergenceError(SpinloopError):
    """An iterative solve failed to converge."""


class ResolutionError(InvalidInputError):
    """Energy grid too coarse for the requested broadening."""


class SymmetryBreakingError(SpinloopError):
    """Expected degenerate ground doublet was not degenerate.

    Carries the observed gap in ``gap_mev``.
    """

    def __init__(self, message, gap_mev):
        super().__init__(message)
        self.gap_mev = gap_mev


class DegenerateModelError(SpinloopError):
    """Rate model has a non-unique steady state."""


class StiffnessError(SpinloopError):
    """Transient integrator hit its step floor; shorten the time span."""


class FitFailureError(NoConvergenceError):
    """Nonlinear fit did not converge from any start point."""


class PresetParseError(SpinloopError, ValueError):
    """Preset document violates the schema.  Carries the field path."""

    def __init__(self, path, message):
        super().__init__(f"{path}: {message}")
        self.path = path


class PresetValidationError(SpinloopError, ValueError):
    """Preset is parseable but internally inconsistent."""
