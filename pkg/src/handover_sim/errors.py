"""Exception types shared across the simulator."""


class HandoverSimError(Exception):
    """Base class for all simulator errors."""


class NearSingularError(HandoverSimError):
    """Euler-angle parameterization too close to the pitch singularity."""


class SolveFailureError(HandoverSimError):
    """A linear solve against a model matrix failed (singular or ill-posed)."""


class IllegalTransitionError(HandoverSimError):
    """The state machine received an observation no outgoing edge accepts."""


class ConfigError(HandoverSimError):
    """Scenario configuration violates the documented schema."""
