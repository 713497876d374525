"""Exception types raised by the toolkit."""


class InvalidModelError(ValueError):
    """A coupling matrix is not symmetric, or is singular."""


class StepFailureError(RuntimeError):
    """An implicit integrator step could not be taken."""
