"""Exception types shared across the package."""


class StateCorruptionError(RuntimeError):
    """A matrix violates the Hermiticity or unit-trace contract of a state."""


class PositivityViolationError(RuntimeError):
    """A state has an eigenvalue below the allowed negativity tolerance."""

    def __init__(self, message, eigenvalue):
        super().__init__(message)
        self.eigenvalue = eigenvalue


class NumericalFailureError(RuntimeError):
    """A numerical routine failed to reach its requested accuracy."""

    def __init__(self, message, achieved=None):
        super().__init__(message)
        self.achieved = achieved


class IntegrationAbortError(NumericalFailureError):
    """Time integration stopped because a stored state became unphysical."""

    def __init__(self, message, time, eigenvalue):
        super().__init__(message, achieved=eigenvalue)
        self.time = time
        self.eigenvalue = eigenvalue


class InternalConsistencyError(RuntimeError):
    """Engine bookkeeping drifted out of sync (moments vs. requested time)."""
